#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "navslip/grid.hpp"

namespace navslip {

using Complex = std::complex<double>;

/// Wall-normal expansion: Even is cos(k pi z), Odd is sin(k pi z).
enum class Parity { Even, Odd };

constexpr Parity flip(Parity p) { return p == Parity::Even ? Parity::Odd : Parity::Even; }
std::string_view to_string(Parity p);

/// Allocator returning SIMD-aligned storage so FFTW plans can be reused
/// across buffers with the new-array execute interface.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
    T* allocate(std::size_t n);
    void deallocate(T* p, std::size_t) noexcept;
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

void* aligned_alloc_bytes(std::size_t bytes);
void aligned_free(void* p) noexcept;

template <class T>
T* AlignedAllocator<T>::allocate(std::size_t n) {
    return static_cast<T*>(aligned_alloc_bytes(n * sizeof(T)));
}
template <class T>
void AlignedAllocator<T>::deallocate(T* p, std::size_t) noexcept {
    aligned_free(p);
}

using RealBuffer = std::vector<double, AlignedAllocator<double>>;
using ComplexBuffer = std::vector<Complex, AlignedAllocator<Complex>>;

/// Real samples on the collocation points, layout [iz][iy][ix] with ix fastest.
/// The same nx*ny*(nz+1) layout is used for both parities; Odd fields are
/// zero on the wall planes iz = 0 and iz = nz.
class GridSamples {
public:
    GridSamples() = default;
    GridSamples(int nx, int ny, int nzp);
    explicit GridSamples(const Grid& g) : GridSamples(g.nx, g.ny, g.nzp()) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nzp() const { return nzp_; }

    double& operator()(int ix, int iy, int iz) { return data_[index(ix, iy, iz)]; }
    double operator()(int ix, int iy, int iz) const { return data_[index(ix, iy, iz)]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix;
    }

private:
    int nx_ = 0, ny_ = 0, nzp_ = 0;
    RealBuffer data_;
};

/// Band-limited real scalar on the slip channel.
///
///   f(x,y,z) = sum_{kx,ky,kz} c(kx,ky,kz) exp(i(kx x + ky y)) phi_kz(z)
///
/// with phi_kz = cos(kz pi z) (Even) or sin(kz pi z) (Odd). The (0,0,0)
/// Even coefficient is the domain mean. Storage is the r2c half spectrum:
/// kx in [0, nx/2], all ky rows, kz in [0, nz]; coefficients with kx < 0 are
/// implied by conjugate symmetry. Odd fields keep kz = 0 and kz = nz at zero.
class SpectralScalar {
public:
    SpectralScalar() = default;
    SpectralScalar(const Grid& grid, Parity parity);

    const Grid& grid() const { return grid_; }
    Parity parity() const { return parity_; }

    /// Raw half-spectrum access by stored indices.
    Complex& at(int ikx, int iky, int kz) { return c_[index(ikx, iky, kz)]; }
    const Complex& at(int ikx, int iky, int kz) const { return c_[index(ikx, iky, kz)]; }

    /// Coefficient for signed kx in [-nx/2, nx/2), ky in [-ny/2, ny/2).
    Complex coeff(int kx, int ky, int kz) const;
    /// Sets a coefficient and its conjugate partner so the field stays real.
    void set_mode(int kx, int ky, int kz, Complex value);

    std::span<Complex> coeffs() { return c_; }
    std::span<const Complex> coeffs() const { return c_; }

    std::size_t index(int ikx, int iky, int kz) const {
        return (static_cast<std::size_t>(kz) * grid_.ny + iky) * grid_.nkx() + ikx;
    }

    /// Zeroes the coefficients the parity cannot carry (Odd kz = 0, nz).
    void enforce_parity_conventions();

    bool all_finite() const;
    double max_abs() const;
    bool is_zero() const;

    SpectralScalar& operator+=(const SpectralScalar& o);
    SpectralScalar& operator-=(const SpectralScalar& o);
    SpectralScalar& operator*=(double s);
    /// this += a * x
    SpectralScalar& axpy(double a, const SpectralScalar& x);

    friend SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
    friend SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
    friend SpectralScalar operator*(double s, SpectralScalar a) { return a *= s; }

private:
    void require_same_layout(const SpectralScalar& o) const;

    Grid grid_;
    Parity parity_ = Parity::Even;
    ComplexBuffer c_;
};

/// Half-spectrum multiplicity of a stored column: 1 for kx = 0 and the
/// Nyquist column, 2 otherwise.
inline double column_weight(const Grid& g, int ikx) {
    return (ikx == 0 || 2 * ikx == g.nx) ? 1.0 : 2.0;
}

/// Wall-normal quadrature weight of mode kz: integral of phi_kz^2 over [0,1].
inline double z_weight(Parity p, int kz) {
    return (p == Parity::Even && kz == 0) ? 1.0 : 0.5;
}

}  // namespace navslip
