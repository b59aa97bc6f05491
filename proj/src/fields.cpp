#include "navslip/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "navslip/errors.hpp"

namespace navslip {

VorticityState curl(const VelocityState& v) {
    return VorticityState(derivative_difference(v.u3, Axis::Y, v.u2, Axis::Z),
                          derivative_difference(v.u1, Axis::Z, v.u3, Axis::X),
                          derivative_difference(v.u2, Axis::X, v.u1, Axis::Y));
}

VelocityState curl(const VorticityState& w) {
    return VelocityState(derivative_difference(w.w3, Axis::Y, w.w2, Axis::Z),
                         derivative_difference(w.w1, Axis::Z, w.w3, Axis::X),
                         derivative_difference(w.w2, Axis::X, w.w1, Axis::Y));
}

double inner(const SpectralScalar& a, const SpectralScalar& b) {
    require_compatible(a.grid(), b.grid());
    if (a.parity() != b.parity()) throw ParityError("inner product of fields with different parity");
    const Grid& g = a.grid();
    const auto x = a.coeffs(), y = b.coeffs();
    const int nkx = g.nkx();
    const bool nyquist = g.nx % 2 == 0 && nkx > 1;
    double sum = 0.0;
    std::size_t i = 0;
    for (int kz = 0; kz <= g.nz; ++kz) {
        double plane = 0.0;
        for (int iky = 0; iky < g.ny; ++iky) {
            // column weights: 1 for kx = 0 and Nyquist, 2 otherwise
            double lane[2] = {0.0, 0.0};
            for (int ikx = 0; ikx < nkx; ++ikx, ++i) {
                lane[0] += x[i].real() * y[i].real();
                lane[1] += x[i].imag() * y[i].imag();
            }
            const double row = lane[0] + lane[1];
            const std::size_t r0 = i - nkx;
            double edge = x[r0].real() * y[r0].real() + x[r0].imag() * y[r0].imag();
            if (nyquist)
                edge += x[i - 1].real() * y[i - 1].real() + x[i - 1].imag() * y[i - 1].imag();
            plane += 2.0 * row - edge;
        }
        sum += z_weight(a.parity(), kz) * plane;
    }
    return g.volume() * sum;
}

double inner(const VelocityState& a, const VelocityState& b) {
    return inner(a.u1, b.u1) + inner(a.u2, b.u2) + inner(a.u3, b.u3);
}

double inner(const VorticityState& a, const VorticityState& b) {
    return inner(a.w1, b.w1) + inner(a.w2, b.w2) + inner(a.w3, b.w3);
}

double l2_norm(const SpectralScalar& f) { return std::sqrt(std::max(0.0, inner(f, f))); }
double l2_norm(const VelocityState& v) { return std::sqrt(std::max(0.0, inner(v, v))); }
double l2_norm(const VorticityState& w) { return std::sqrt(std::max(0.0, inner(w, w))); }
double l2_norm(const BoussinesqState& s) {
    return std::sqrt(std::max(0.0, inner(s.vel, s.vel) + inner(s.rho, s.rho)));
}

double gradient_norm_sq(const SpectralScalar& f) {
    const Grid& g = f.grid();
    const Parity dzp = flip(f.parity());
    double sum = 0.0;
    for (int kz = 0; kz <= g.nz; ++kz) {
        const double wz = z_weight(f.parity(), kz);
        // d/dz of an Even mode lands on sin(kz pi z), which is dropped at kz = nz.
        const bool dz_exists = !(f.parity() == Parity::Even && (kz == 0 || kz == g.nz));
        const double kzw = dz_exists ? g.wave_z(kz) : 0.0;
        const double wdz = z_weight(dzp, kz);
        for (int iky = 0; iky < g.ny; ++iky) {
            const double ky = (2 * iky == g.ny) ? 0.0 : g.wave_y(g.ky_of(iky));
            for (int ikx = 0; ikx < g.nkx(); ++ikx) {
                const double kx = (2 * ikx == g.nx) ? 0.0 : g.wave_x(ikx);
                const double m2 = std::norm(f.at(ikx, iky, kz));
                sum += column_weight(g, ikx) * m2 * ((kx * kx + ky * ky) * wz + kzw * kzw * wdz);
            }
        }
    }
    return g.volume() * sum;
}

double h1_seminorm(const VelocityState& v) {
    return std::sqrt(gradient_norm_sq(v.u1) + gradient_norm_sq(v.u2) + gradient_norm_sq(v.u3));
}

double ibp_residual(const VelocityState& u, const VelocityState& phi) {
    require_compatible(u.grid(), phi.grid());
    double grad = 0.0;
    for (int c = 0; c < 3; ++c)
        for (Axis a : {Axis::X, Axis::Y, Axis::Z})
            grad += inner(derivative(u[c], a), derivative(phi[c], a));
    return grad - inner(curl(u), curl(phi));
}

namespace {
std::vector<double> plane_of(const GridSamples& s, int iz) {
    const std::size_t n = static_cast<std::size_t>(s.nx()) * s.ny();
    const double* p = s.data() + static_cast<std::size_t>(iz) * n;
    return std::vector<double>(p, p + n);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
}  // namespace

WallTrace boundary_vorticity_trace(const VorticityState& w) {
    const int nz = w.grid().nz;
    const auto s1 = transform_inverse(w.w1);
    const auto s2 = transform_inverse(w.w2);
    const auto s3 = transform_inverse(w.w3);
    WallTrace t;
    t.w1_bottom = plane_of(s1, 0);
    t.w1_top = plane_of(s1, nz);
    t.w2_bottom = plane_of(s2, 0);
    t.w2_top = plane_of(s2, nz);
    t.w3_bottom = plane_of(s3, 0);
    t.w3_top = plane_of(s3, nz);
    return t;
}

double WallTrace::max_tangential() const {
    return std::max({max_abs(w1_bottom), max_abs(w2_bottom), max_abs(w1_top), max_abs(w2_top)});
}

double WallTrace::max_normal() const { return std::max(max_abs(w3_bottom), max_abs(w3_top)); }

double WallTrace::normal_l2(const Grid& g) const {
    double sum = 0.0;
    for (double v : w3_bottom) sum += v * v;
    for (double v : w3_top) sum += v * v;
    return std::sqrt(sum * (g.lx / g.nx) * (g.ly / g.ny));
}

std::vector<double> cumulative_integral(std::span<const double> t, std::span<const double> f) {
    const std::size_t n = t.size();
    if (f.size() != n) throw std::invalid_argument("cumulative_integral: size mismatch");
    if (n < 3) throw std::invalid_argument("cumulative_integral: need at least 3 snapshots");
    const double h = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw std::invalid_argument("cumulative_integral: times must increase");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(t[i] - (t[0] + h * static_cast<double>(i))) > 1e-6 * h)
            throw std::invalid_argument("cumulative_integral: snapshot times are not uniform");

    std::vector<double> out(n, 0.0);
    if (n >= 4)
        out[1] = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
    else
        out[1] = h * (5 * f[0] + 8 * f[1] - f[2]) / 12.0;
    for (std::size_t m = 2; m < n; m += 2)
        out[m] = out[m - 2] + h * (f[m - 2] + 4 * f[m - 1] + f[m]) / 3.0;
    for (std::size_t m = 3; m < n; m += 2)
        out[m] = out[m - 3] + 3.0 * h * (f[m - 3] + 3 * f[m - 2] + 3 * f[m - 1] + f[m]) / 8.0;
    return out;
}

double energy_balance_residual(std::span<const double> times, std::span<const double> energy,
                               std::span<const double> enstrophy, double nu) {
    if (times.size() < 3) throw std::invalid_argument("energy balance: need at least 3 snapshots");
    const auto diss = cumulative_integral(times, enstrophy);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        worst = std::max(worst, std::abs(energy[i] + nu * diss[i] - energy[0]));
    return worst;
}

double energy_balance_residual(std::span<const TimedVelocity> traj, double nu) {
    if (traj.size() < 3) throw std::invalid_argument("energy balance: need at least 3 snapshots");
    std::vector<double> t, e, z;
    for (const auto& s : traj) {
        t.push_back(s.time);
        const double n = l2_norm(s.state);
        e.push_back(0.5 * n * n);
        const double w = l2_norm(curl(s.state));
        z.push_back(w * w);
    }
    return energy_balance_residual(t, e, z, nu);
}

BoussinesqBalance boussinesq_balance_residual(const BalanceSeries& s, double nu, double eps) {
    const std::size_t n = s.times.size();
    if (n < 3) throw std::invalid_argument("boussinesq balance: need at least 3 snapshots");
    std::vector<double> sink(n);
    for (std::size_t i = 0; i < n; ++i)
        sink[i] = nu * s.enstrophy[i] + eps * s.rho_gradient[i] + s.buoyancy[i];
    const auto acc = cumulative_integral(s.times, sink);
    const auto work = cumulative_integral(s.times, s.buoyancy);
    BoussinesqBalance out;
    for (std::size_t i = 0; i < n; ++i) {
        out.residual = std::max(out.residual, std::abs(s.energy[i] + acc[i] - s.energy[0]));
        out.buoyancy_work = std::max(out.buoyancy_work, std::abs(work[i]));
    }
    return out;
}

BoussinesqBalance boussinesq_balance_residual(std::span<const TimedBoussinesq> traj, double nu,
                                              double eps) {
    if (traj.size() < 3) throw std::invalid_argument("boussinesq balance: need at least 3 snapshots");
    BalanceSeries s;
    for (const auto& snap : traj) {
        s.times.push_back(snap.time);
        const double n = l2_norm(snap.state);
        s.energy.push_back(0.5 * n * n);
        const double w = l2_norm(curl(snap.state.vel));
        s.enstrophy.push_back(w * w);
        s.rho_gradient.push_back(gradient_norm_sq(snap.state.rho));
        s.buoyancy.push_back(inner(snap.state.rho, snap.state.vel.u3));
    }
    return boussinesq_balance_residual(s, nu, eps);
}

}  // namespace navslip
