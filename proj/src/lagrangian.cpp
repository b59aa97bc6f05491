#include "navslip/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "navslip/errors.hpp"
#include "navslip/fields.hpp"

namespace navslip {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double wall_tol = 1e-12;
}  // namespace

double sinpi(double a) {
    if (!std::isfinite(a)) return std::numeric_limits<double>::quiet_NaN();
    double r = std::fmod(a, 2.0);  // (-2, 2)
    if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
    if (r > 1.0) r -= 2.0;
    if (r < -1.0) r += 2.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(pi * r);
}

double cospi(double a) {
    if (!std::isfinite(a)) return std::numeric_limits<double>::quiet_NaN();
    double r = std::fmod(std::abs(a), 2.0);  // [0, 2)
    if (r == 0.5 || r == 1.5) return 0.0;
    if (r > 1.0) r = 2.0 - r;  // [0, 1]
    if (r <= 0.25) return std::cos(pi * r);
    if (r <= 0.75) return std::sin(pi * (0.5 - r));
    return -std::cos(pi * (1.0 - r));
}

Band band_of(const SpectralScalar& f) {
    const Grid& g = f.grid();
    Band b;
    for (int kz = 0; kz <= g.nz; ++kz)
        for (int iky = 0; iky < g.ny; ++iky)
            for (int ikx = 0; ikx < g.nkx(); ++ikx) {
                const Complex c = f.at(ikx, iky, kz);
                if (c.real() == 0.0 && c.imag() == 0.0) continue;
                b.kx = std::max(b.kx, ikx);
                b.ky = std::max(b.ky, std::abs(g.ky_of(iky)));
                b.kz = std::max(b.kz, kz);
            }
    return b;
}

PointBasis::PointBasis(const Grid& g, const Vec3& p) : nx_(g.nx), ny_(g.ny), nz_(g.nz) {
    double z = p.z();
    if (!(z >= -wall_tol && z <= g.height + wall_tol))
        throw std::domain_error("point z = " + std::to_string(z) + " lies outside the channel");
    z = std::clamp(z, 0.0, g.height);
    const double xs = p.x() / pi, ys = p.y() / pi;  // arguments in units of pi
    ex_.resize(g.nkx());
    for (int ikx = 0; ikx < g.nkx(); ++ikx) {
        const double w = (ikx == 0 || 2 * ikx == g.nx) ? 1.0 : 2.0;
        ex_[ikx] = {w * cospi(ikx * xs), w * sinpi(ikx * xs)};
    }
    ey_.resize(g.ny);
    for (int iky = 0; iky < g.ny; ++iky) {
        const int ky = g.ky_of(iky);
        ey_[iky] = {cospi(ky * ys), sinpi(ky * ys)};
    }
    cz_.resize(g.nz + 1);
    sz_.resize(g.nz + 1);
    for (int k = 0; k <= g.nz; ++k) {
        cz_[k] = cospi(k * z);
        sz_[k] = sinpi(k * z);
    }
}

ScalarJet eval_jet(const SpectralScalar& f, const PointBasis& b, const Band& band) {
    const Grid& g = f.grid();
    if (g.nx != b.nx_ || g.ny != b.ny_ || g.nz != b.nz_)
        throw GridMismatchError("point basis built for a different grid");
    ScalarJet out;
    if (band.kz < 0) return out;
    const bool even = f.parity() == Parity::Even;
    const int kxmax = band.kx;
    double val = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    for (int kz = 0; kz <= band.kz; ++kz) {
        const double phi = even ? b.cz_[kz] : b.sz_[kz];
        double dphi = even ? -kz * pi * b.sz_[kz] : kz * pi * b.cz_[kz];
        if (even && kz == g.nz) dphi = 0.0;
        // only Re(B), Im(Bx), Im(By) are needed for the real field and its gradient
        double br = 0.0, bxi = 0.0, byi = 0.0;
        for (int iky = 0; iky < g.ny; ++iky) {
            const int ky = g.ky_of(iky);
            if (std::abs(ky) > band.ky) continue;
            const Complex* row = &f.at(0, iky, kz);
            double ar = 0.0, ai = 0.0, axr = 0.0, axi = 0.0;
            for (int ikx = 0; ikx <= kxmax; ++ikx) {
                const double cr = row[ikx].real(), ci = row[ikx].imag();
                const double er = b.ex_[ikx].real(), ei = b.ex_[ikx].imag();
                const double tr = cr * er - ci * ei, ti = cr * ei + ci * er;
                ar += tr;
                ai += ti;
                const double k = (2 * ikx == g.nx) ? 0.0 : static_cast<double>(ikx);
                axr += k * tr;
                axi += k * ti;
            }
            const double er = b.ey_[iky].real(), ei = b.ey_[iky].imag();
            const double sr = ar * er - ai * ei, si = ar * ei + ai * er;
            br += sr;
            bxi += axr * ei + axi * er;
            const double kyd = (2 * iky == g.ny) ? 0.0 : static_cast<double>(ky);
            byi += kyd * si;
        }
        val += phi * br;
        gx -= phi * bxi;  // Re(i * Bx)
        gy -= phi * byi;
        gz += dphi * br;
    }
    out.value = val;
    out.grad = Vec3(gx, gy, gz);
    return out;
}

ScalarJet eval_jet(const SpectralScalar& f, const PointBasis& b) {
    return eval_jet(f, b, band_of(f));
}

double eval_at(const SpectralScalar& f, const Vec3& p) {
    return eval_jet(f, PointBasis(f.grid(), p)).value;
}

std::vector<Vec3> eval_velocity_at(const VelocityState& v, std::span<const Vec3> points) {
    const Band b1 = band_of(v.u1), b2 = band_of(v.u2), b3 = band_of(v.u3);
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const Vec3& p : points) {
        const PointBasis basis(v.grid(), p);
        out.emplace_back(eval_jet(v.u1, basis, b1).value, eval_jet(v.u2, basis, b2).value,
                         eval_jet(v.u3, basis, b3).value);
    }
    return out;
}

Vec3 eval_vorticity_at(const VorticityState& w, const Vec3& p) {
    const PointBasis basis(w.grid(), p);
    return {eval_jet(w.w1, basis).value, eval_jet(w.w2, basis).value, eval_jet(w.w3, basis).value};
}

VorticityState buoyancy_force_curl(const SpectralScalar& rho) {
    SpectralScalar a = derivative(rho, Axis::Y);
    a *= -1.0;
    return VorticityState(std::move(a), derivative(rho, Axis::X),
                          SpectralScalar(rho.grid(), Parity::Even));
}

namespace {

struct FrameBands {
    Band u[3];
    Band f[3];
};

FrameBands bands_of(const FlowFrame& fr) {
    FrameBands b;
    for (int c = 0; c < 3; ++c) b.u[c] = band_of(fr.vel[c]);
    if (fr.force_curl)
        for (int c = 0; c < 3; ++c) b.f[c] = band_of((*fr.force_curl)[c]);
    return b;
}

void sample_frame(const FlowFrame& fr, std::span<const Vec3> points, std::span<FlowSample> out) {
    if (out.size() != points.size()) throw std::invalid_argument("sample: output size mismatch");
    const FrameBands bands = bands_of(fr);
    const Grid& g = fr.vel.grid();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointBasis basis(g, points[i]);
        FlowSample s;
        for (int c = 0; c < 3; ++c) {
            const ScalarJet j = eval_jet(fr.vel[c], basis, bands.u[c]);
            s.u[c] = j.value;
            s.grad_u.row(c) = j.grad.transpose();
        }
        if (fr.force_curl)
            for (int c = 0; c < 3; ++c)
                s.force_curl[c] = eval_jet((*fr.force_curl)[c], basis, bands.f[c]).value;
        out[i] = s;
    }
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

}  // namespace

SteadySampler::SteadySampler(VelocityState v, std::optional<VorticityState> force_curl) {
    frame_.vel = std::move(v);
    frame_.force_curl = std::move(force_curl);
}

double SteadySampler::t_min() const { return -std::numeric_limits<double>::infinity(); }
double SteadySampler::t_max() const { return std::numeric_limits<double>::infinity(); }

void SteadySampler::sample(double, std::span<const Vec3> points, std::span<FlowSample> out) {
    sample_frame(frame_, points, out);
}

void SnapshotSampler::push(FlowFrame frame) {
    if (!frames_.empty() && !(frame.time > frames_.back().time))
        throw std::invalid_argument("SnapshotSampler: frames must be pushed in increasing time");
    frames_.push_back(std::move(frame));
    while (frames_.size() > capacity_) frames_.pop_front();
    cache_.reset();
}

double SnapshotSampler::t_min() const {
    return frames_.empty() ? std::numeric_limits<double>::infinity() : frames_.front().time;
}

double SnapshotSampler::t_max() const {
    return frames_.empty() ? -std::numeric_limits<double>::infinity() : frames_.back().time;
}

FlowFrame SnapshotSampler::interpolate(double t) const {
    if (frames_.empty()) throw std::out_of_range("SnapshotSampler: no frames");
    for (const auto& f : frames_)
        if (near(f.time, t)) return f;
    if (t < t_min() || t > t_max())
        throw std::out_of_range("SnapshotSampler: time " + std::to_string(t) + " outside [" +
                                std::to_string(t_min()) + ", " + std::to_string(t_max()) + "]");
    // four consecutive frames around t, shifted inward at the ends
    const std::size_t n = frames_.size(), m = std::min<std::size_t>(4, n);
    std::size_t upper = 0;
    while (upper < n && frames_[upper].time < t) ++upper;
    std::size_t first = upper >= 2 ? upper - 2 : 0;
    first = std::min(first, n - m);

    FlowFrame out;
    out.time = t;
    out.vel = VelocityState(frames_[first].vel.grid());
    const bool forced = std::all_of(frames_.begin() + first, frames_.begin() + first + m,
                                    [](const FlowFrame& f) { return f.force_curl.has_value(); });
    if (forced) out.force_curl = VorticityState(frames_[first].vel.grid());
    for (std::size_t j = first; j < first + m; ++j) {
        double w = 1.0;
        for (std::size_t k = first; k < first + m; ++k)
            if (k != j) w *= (t - frames_[k].time) / (frames_[j].time - frames_[k].time);
        out.vel.axpy(w, frames_[j].vel);
        if (forced)
            for (int c = 0; c < 3; ++c) (*out.force_curl)[c].axpy(w, (*frames_[j].force_curl)[c]);
    }
    return out;
}

void SnapshotSampler::sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) {
    if (!cache_ || cache_->time != t) cache_ = interpolate(t);
    sample_frame(*cache_, points, out);
}

void ReversedSampler::sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) {
    inner_.sample(t_end_ - t, points, out);
    for (auto& s : out) {
        s.u = -s.u;
        s.grad_u = -s.grad_u;
        s.force_curl = -s.force_curl;
    }
}

ParticleSet::ParticleSet(std::vector<Vec3> seeds, double t0)
    : alphas(std::move(seeds)), positions(alphas), grads(alphas.size(), Mat3::Identity()),
      force_integral(alphas.size(), Vec3::Zero()), time(t0) {}

ParticleSet seed_particles(int interior, int per_wall, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return std::generate_canonical<double, 53>(rng); };
    std::vector<Vec3> pts;
    for (int i = 0; i < interior; ++i) {
        const double x = 2 * pi * unit(), y = 2 * pi * unit();
        pts.emplace_back(x, y, 0.1 + 0.8 * unit());
    }
    for (double zw : {0.0, 1.0})
        for (int i = 0; i < per_wall; ++i) {
            const double x = 2 * pi * unit(), y = 2 * pi * unit();
            pts.emplace_back(x, y, zw);
        }
    return ParticleSet(std::move(pts));
}

void advect(ParticleSet& ps, FlowSampler& sampler, double dt) {
    const double t = ps.time;
    const double tol = 1e-12 * std::max(1.0, std::abs(t) + std::abs(dt));
    if (t < sampler.t_min() - tol || t + dt > sampler.t_max() + tol)
        throw std::out_of_range("advect: [" + std::to_string(t) + ", " + std::to_string(t + dt) +
                                "] outside the sampler range");
    const std::size_t n = ps.size();
    std::vector<Vec3> pos(n);
    std::vector<FlowSample> k1(n), k2(n), k3(n), k4(n);

    sampler.sample(t, ps.positions, k1);
    for (std::size_t i = 0; i < n; ++i) pos[i] = ps.positions[i] + 0.5 * dt * k1[i].u;
    sampler.sample(t + 0.5 * dt, pos, k2);
    for (std::size_t i = 0; i < n; ++i) pos[i] = ps.positions[i] + 0.5 * dt * k2[i].u;
    sampler.sample(t + 0.5 * dt, pos, k3);
    for (std::size_t i = 0; i < n; ++i) pos[i] = ps.positions[i] + dt * k3[i].u;
    sampler.sample(t + dt, pos, k4);

    for (std::size_t i = 0; i < n; ++i) {
        const Mat3& G = ps.grads[i];
        const Mat3 d1 = k1[i].grad_u * G;
        const Mat3 d2 = k2[i].grad_u * (G + 0.5 * dt * d1);
        const Mat3 d3 = k3[i].grad_u * (G + 0.5 * dt * d2);
        const Mat3 d4 = k4[i].grad_u * (G + dt * d3);
        ps.grads[i] = G + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        ps.positions[i] += dt / 6.0 * (k1[i].u + 2.0 * k2[i].u + 2.0 * k3[i].u + k4[i].u);
        ps.force_integral[i] += dt / 6.0 * (k1[i].force_curl + 2.0 * k2[i].force_curl +
                                            2.0 * k3[i].force_curl + k4[i].force_curl);
    }
    ps.time = t + dt;
}

namespace {

struct VortBands {
    Band b[3];
    explicit VortBands(const VorticityState& w) {
        for (int c = 0; c < 3; ++c) b[c] = band_of(w[c]);
    }
    Vec3 at(const VorticityState& w, const PointBasis& basis) const {
        return {eval_jet(w.w1, basis, b[0]).value, eval_jet(w.w2, basis, b[1]).value,
                eval_jet(w.w3, basis, b[2]).value};
    }
};

std::vector<double> cauchy_impl(const ParticleSet& ps, const VorticityState& w_now,
                                const VorticityState& w0, bool forced) {
    const VortBands bn(w_now), b0(w0);
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Vec3 now = bn.at(w_now, PointBasis(w_now.grid(), ps.positions[i]));
        const Vec3 init = b0.at(w0, PointBasis(w0.grid(), ps.alphas[i]));
        Vec3 r = now - ps.grads[i] * init;
        if (forced) r -= ps.force_integral[i];
        out[i] = r.norm();
    }
    return out;
}

}  // namespace

std::vector<double> cauchy_residual(const ParticleSet& ps, const VorticityState& w_now,
                                    const VorticityState& w0) {
    return cauchy_impl(ps, w_now, w0, false);
}

std::vector<double> forced_cauchy_residual(const ParticleSet& ps, const VorticityState& w_now,
                                           const VorticityState& w0) {
    return cauchy_impl(ps, w_now, w0, true);
}

std::vector<double> vorticity_magnitude(const ParticleSet& ps, const VorticityState& w_now) {
    const VortBands bn(w_now);
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        out[i] = bn.at(w_now, PointBasis(w_now.grid(), ps.positions[i])).norm();
    return out;
}

std::vector<DensityResidual> density_gradient_residual(const ParticleSet& ps,
                                                       const SpectralScalar& rho_now,
                                                       const SpectralScalar& rho0) {
    const Band bn = band_of(rho_now), b0 = band_of(rho0);
    std::vector<DensityResidual> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const ScalarJet now = eval_jet(rho_now, PointBasis(rho_now.grid(), ps.positions[i]), bn);
        const ScalarJet init = eval_jet(rho0, PointBasis(rho0.grid(), ps.alphas[i]), b0);
        out[i].value = std::abs(now.value - init.value);
        // chain rule: grad_alpha rho0 = G^T grad_x rho
        out[i].gradient = (ps.grads[i].transpose() * now.grad - init.grad).norm();
        out[i].degenerate = !(ps.grads[i].determinant() > 1e-8);
    }
    return out;
}

double max_det_deviation(const ParticleSet& ps) {
    double m = 0.0;
    for (const Mat3& G : ps.grads) m = std::max(m, std::abs(G.determinant() - 1.0));
    return m;
}

double max_wall_drift(const ParticleSet& ps) {
    double m = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double az = ps.alphas[i].z();
        if (az != 0.0 && az != 1.0) continue;
        m = std::max(m, std::abs(ps.positions[i].z() - az));
    }
    return m;
}

FlowFrame make_frame(double t, const VelocityState& v, const SolverConfig& config) {
    FlowFrame f;
    f.time = t;
    f.vel = v;
    if (config.forcing) f.force_curl = curl(leray_project(config.forcing(t)));
    return f;
}

FlowFrame make_frame(double t, const BoussinesqState& s, const SolverConfig& config) {
    FlowFrame f;
    f.time = t;
    f.vel = s.vel;
    VorticityState fc = buoyancy_force_curl(s.rho);
    if (config.forcing) {
        const VorticityState extra = curl(leray_project(config.forcing(t)));
        for (int c = 0; c < 3; ++c) fc[c] += extra[c];
    }
    f.force_curl = std::move(fc);
    return f;
}

template <class S>
LagrangianRun<S> run_lagrangian(const S& initial, const SolverConfig& config,
                                ParticleSet particles,
                                const std::function<void(const ParticleSet&, const S&)>& observer) {
    SolverConfig c = config;
    c.snapshot_interval = 1;
    Integrator<S> integrator(c);
    SnapshotSampler sampler(4);
    std::deque<std::pair<double, S>> states;

    auto advance_to = [&](double limit) {
        const double tol = 1e-12 * std::max(1.0, limit);
        while (particles.time < limit - tol) {
            auto next = std::find_if(states.begin(), states.end(), [&](const auto& e) {
                return e.first > particles.time + tol;
            });
            advect(particles, sampler, next->first - particles.time);
            particles.time = next->first;
            if (observer) observer(particles, next->second);
        }
    };

    particles.time = 0.0;
    if (observer) observer(particles, initial);
    integrator.integrate(initial, [&](double t, const S& s, const Dissipation&) {
        sampler.push(make_frame(t, s, c));
        states.emplace_back(t, s);
        if (states.size() > 4) states.pop_front();
        if (states.size() >= 4) advance_to(states[states.size() - 2].first);
    });
    advance_to(states.back().first);
    return {states.back().second, std::move(particles)};
}

template LagrangianRun<VelocityState> run_lagrangian(
    const VelocityState&, const SolverConfig&, ParticleSet,
    const std::function<void(const ParticleSet&, const VelocityState&)>&);
template LagrangianRun<BoussinesqState> run_lagrangian(
    const BoussinesqState&, const SolverConfig&, ParticleSet,
    const std::function<void(const ParticleSet&, const BoussinesqState&)>&);

}  // namespace navslip
