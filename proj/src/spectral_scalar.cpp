#include "navslip/spectral_scalar.hpp"

#include <fftw3.h>
#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <algorithm>
#include <cmath>
#include <new>
#include <string>

#include "navslip/errors.hpp"

namespace navslip {

std::string_view to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

namespace {

// Field buffers are large and short-lived. Keeping them on the heap instead of
// fresh mappings avoids a page fault on every first touch.
bool keep_buffers_on_heap() {
#ifdef __GLIBC__
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    return true;
}

}  // namespace

void* aligned_alloc_bytes(std::size_t bytes) {
    static const bool heap = keep_buffers_on_heap();
    (void)heap;
    if (bytes == 0) bytes = 1;
    void* p = fftw_malloc(bytes);
    if (!p) throw std::bad_alloc();
    return p;
}

void aligned_free(void* p) noexcept { fftw_free(p); }

GridSamples::GridSamples(int nx, int ny, int nzp)
    : nx_(nx), ny_(ny), nzp_(nzp),
      data_(static_cast<std::size_t>(nx) * ny * nzp, 0.0) {}

SpectralScalar::SpectralScalar(const Grid& grid, Parity parity)
    : grid_(grid), parity_(parity), c_(grid.spectral_size(), Complex{}) {}

namespace {
int wrap_row(const Grid& g, int ky) { return ((ky % g.ny) + g.ny) % g.ny; }
}  // namespace

Complex SpectralScalar::coeff(int kx, int ky, int kz) const {
    const int half = grid_.nx / 2;
    if (kx < -half || kx >= half || ky < -grid_.ny / 2 || ky >= grid_.ny / 2 || kz < 0 ||
        kz > grid_.nz)
        throw std::out_of_range("coefficient index out of range");
    if (kx == -half) return at(half, wrap_row(grid_, ky), kz);
    if (kx < 0) return std::conj(at(-kx, wrap_row(grid_, -ky), kz));
    return at(kx, wrap_row(grid_, ky), kz);
}

void SpectralScalar::set_mode(int kx, int ky, int kz, Complex value) {
    const int half = grid_.nx / 2;
    if (kx < -half || kx >= half || ky < -grid_.ny / 2 || ky >= grid_.ny / 2 || kz < 0 ||
        kz > grid_.nz)
        throw std::out_of_range("coefficient index out of range");
    if (kx > 0) {
        at(kx, wrap_row(grid_, ky), kz) = value;
        return;
    }
    if (kx < 0 && kx != -half) {
        at(-kx, wrap_row(grid_, -ky), kz) = std::conj(value);
        return;
    }
    // Self-conjugate columns (kx = 0 and the Nyquist column).
    const int col = kx == 0 ? 0 : half;
    const int r = wrap_row(grid_, ky);
    const int rc = wrap_row(grid_, -ky);
    if (r == rc) {
        at(col, r, kz) = Complex(value.real(), 0.0);
    } else {
        at(col, r, kz) = value;
        at(col, rc, kz) = std::conj(value);
    }
}

void SpectralScalar::enforce_parity_conventions() {
    if (parity_ != Parity::Odd) return;
    const std::size_t plane = static_cast<std::size_t>(grid_.nkx()) * grid_.ny;
    std::fill(c_.begin(), c_.begin() + plane, Complex{});
    std::fill(c_.end() - plane, c_.end(), Complex{});
}

bool SpectralScalar::all_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](const Complex& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

double SpectralScalar::max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::norm(v));
    return std::sqrt(m);
}

bool SpectralScalar::is_zero() const {
    bool nonzero = false;
    for (const auto& v : c_) nonzero |= (v.real() != 0.0) | (v.imag() != 0.0);
    return !nonzero;
}

void SpectralScalar::require_same_layout(const SpectralScalar& o) const {
    require_compatible(grid_, o.grid_);
    if (parity_ != o.parity_)
        throw ParityError(std::string("parity mismatch: ") + std::string(to_string(parity_)) +
                          " vs " + std::string(to_string(o.parity_)));
}

SpectralScalar& SpectralScalar::operator+=(const SpectralScalar& o) {
    require_same_layout(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator-=(const SpectralScalar& o) {
    require_same_layout(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

SpectralScalar& SpectralScalar::axpy(double a, const SpectralScalar& x) {
    require_same_layout(x);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * x.c_[i];
    return *this;
}

}  // namespace navslip
