// Shared helpers for the unit tests: random band-limited fields and
// quadrature oracles that do not go through the transform code.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "navslip/spectral.hpp"
#include "navslip/state.hpp"

namespace navslip::test {

inline constexpr double pi = std::numbers::pi;

inline GridSamples random_samples(const Grid& g, Parity p, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    GridSamples s(g);
    for (int iz = 0; iz < g.nzp(); ++iz)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const bool wall = iz == 0 || iz == g.nz;
                s(ix, iy, iz) = (p == Parity::Odd && wall) ? 0.0 : nd(rng);
            }
    return s;
}

/// Random real field restricted to the two-thirds band.
inline SpectralScalar random_field(const Grid& g, Parity p, unsigned seed) {
    return dealias(transform_forward(random_samples(g, p, seed), p, g));
}

inline VelocityState random_divfree(const Grid& g, unsigned seed) {
    return leray_project(random_field(g, Parity::Even, seed),
                         random_field(g, Parity::Even, seed + 1),
                         random_field(g, Parity::Odd, seed + 2));
}

/// Samples an analytic function on the collocation points.
inline GridSamples sample(const Grid& g, const std::function<double(double, double, double)>& f) {
    GridSamples s(g);
    for (int iz = 0; iz < g.nzp(); ++iz)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) s(ix, iy, iz) = f(g.x(ix), g.y(iy), g.z(iz));
    return s;
}

/// Trapezoidal quadrature of f*g over the channel on the collocation points.
/// Exact for band-limited products below the grid's aliasing limit.
inline double quad_product(const Grid& g, const GridSamples& a, const GridSamples& b) {
    double sum = 0.0;
    for (int iz = 0; iz < g.nzp(); ++iz) {
        const double wz = (iz == 0 || iz == g.nz) ? 0.5 : 1.0;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) sum += wz * a(ix, iy, iz) * b(ix, iy, iz);
    }
    return sum * (g.lx / g.nx) * (g.ly / g.ny) * (g.height / g.nz);
}

/// Coefficient of mode (kx, ky, kz) of an analytic function by direct
/// trapezoidal projection on an independent m^3 grid.
inline std::complex<double> project_mode(const std::function<double(double, double, double)>& f,
                                         Parity p, int kx, int ky, int kz, int m = 48) {
    std::complex<double> acc{};
    for (int iz = 0; iz <= m; ++iz) {
        const double z = double(iz) / m;
        const double wz = (iz == 0 || iz == m) ? 0.5 : 1.0;
        const double basis = p == Parity::Even ? std::cos(kz * pi * z) : std::sin(kz * pi * z);
        for (int iy = 0; iy < m; ++iy)
            for (int ix = 0; ix < m; ++ix) {
                const double x = 2 * pi * ix / m, y = 2 * pi * iy / m;
                acc += wz * f(x, y, z) * basis * std::polar(1.0, -(kx * x + ky * y));
            }
    }
    const double norm = (p == Parity::Even && kz == 0) ? 1.0 : 0.5;
    return acc / (double(m) * m * m * norm);
}

}  // namespace navslip::test
