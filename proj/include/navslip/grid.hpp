#pragma once

#include <cstddef>
#include <numbers>

namespace navslip {

/// Flat slip channel [0,2pi)^2 x [0,1] with walls at z = 0 and z = 1.
///
/// Horizontal directions are periodic with nx, ny Fourier modes. The
/// wall-normal direction carries cos(k pi z) / sin(k pi z) modes for
/// k = 0..nz, sampled on the nz+1 points z_j = j/nz (walls included).
struct Grid {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    double lx = 2.0 * std::numbers::pi;
    double ly = 2.0 * std::numbers::pi;
    double height = 1.0;

    Grid() = default;
    /// Throws std::invalid_argument unless nx, ny are even and >= 4, nz >= 4.
    Grid(int nx_, int ny_, int nz_);

    static Grid cube(int n) { return Grid(n, n, n); }

    int nzp() const { return nz + 1; }
    /// Number of stored half-spectrum columns in x (r2c layout).
    int nkx() const { return nx / 2 + 1; }

    std::size_t physical_size() const {
        return static_cast<std::size_t>(nx) * ny * nzp();
    }
    std::size_t spectral_size() const {
        return static_cast<std::size_t>(nkx()) * ny * nzp();
    }
    std::size_t plane_size() const { return static_cast<std::size_t>(nx) * ny; }

    double volume() const { return lx * ly * height; }

    double x(int i) const { return lx * i / nx; }
    double y(int j) const { return ly * j / ny; }
    double z(int k) const { return height * k / nz; }

    /// Signed ky for a stored row index (FFT ordering).
    int ky_of(int iky) const { return iky <= ny / 2 - 1 ? iky : iky - ny; }
    /// Stored row for a signed ky in [-ny/2, ny/2).
    int row_of(int ky) const { return ky >= 0 ? ky : ky + ny; }

    /// Horizontal wavenumbers in units of 2pi/l.
    double wave_x(int kx) const { return 2.0 * std::numbers::pi * kx / lx; }
    double wave_y(int ky) const { return 2.0 * std::numbers::pi * ky / ly; }
    double wave_z(int kz) const { return std::numbers::pi * kz / height; }

    /// Smallest grid spacing, used by the CFL advisory.
    double h_min() const;

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.nx == b.nx && a.ny == b.ny && a.nz == b.nz && a.lx == b.lx &&
               a.ly == b.ly && a.height == b.height;
    }
};

/// Throws GridMismatchError if the grids differ.
void require_compatible(const Grid& a, const Grid& b);

}  // namespace navslip
