#include "navslip/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <span>
#include <sstream>

#include "navslip/errors.hpp"

namespace navslip {

void SolverConfig::validate() const {
    std::vector<std::string> problems;
    if (!(nu >= 0.0) || !std::isfinite(nu)) problems.push_back("nu must be finite and >= 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        problems.push_back("epsilon must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) problems.push_back("dt must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) problems.push_back("t_end must be > 0");
    if (dt > 0.0 && t_end > 0.0 && dt > t_end) problems.push_back("dt must not exceed t_end");
    if (snapshot_interval < 1) problems.push_back("snapshot_interval must be >= 1");
    if (!problems.empty()) throw ValidationError(problems);
}

long SolverConfig::steps() const {
    const double r = t_end / dt;
    const double n = std::round(r);
    if (std::abs(r - n) <= 1e-9 * std::max(1.0, r)) return std::max(1L, static_cast<long>(n));
    return static_cast<long>(std::ceil(r));
}

namespace {

template <class S>
struct Stage {
    S tend;
    double enstrophy = 0.0, rho_gradient = 0.0, buoyancy = 0.0, forcing_work = 0.0;
    double umax = 0.0;
};

double max_abs(const GridSamples& s) {
    // Four independent lanes; max is exact in any order.
    const auto v = s.values();
    double m[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= v.size(); i += 4)
        for (int l = 0; l < 4; ++l) m[l] = std::max(m[l], std::abs(v[i + l]));
    for (; i < v.size(); ++i) m[0] = std::max(m[0], std::abs(v[i]));
    return std::max({m[0], m[1], m[2], m[3]});
}

// Pointwise a*b - c*d on the collocation grid.
GridSamples cross_term(const GridSamples& a, const GridSamples& b, const GridSamples& c,
                       const GridSamples& d) {
    GridSamples out(a.nx(), a.ny(), a.nzp());
    const auto va = a.values(), vb = b.values(), vc = c.values(), vd = d.values();
    auto vo = out.values();
    for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = va[i] * vb[i] - vc[i] * vd[i];
    return out;
}

GridSamples product(const GridSamples& a, const GridSamples& b) {
    GridSamples out(a.nx(), a.ny(), a.nzp());
    const auto va = a.values(), vb = b.values();
    auto vo = out.values();
    for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = va[i] * vb[i];
    return out;
}

SpectralScalar to_band(const GridSamples& s, Parity p, const Grid& g) {
    SpectralScalar f = transform_forward(s, p, g);
    dealias_in_place(f);
    return f;
}

struct Advection {
    SpectralScalar c1, c2, c3;  // dealiased u x omega, not yet projected
    bool vanishes = false;      // c1, c2, c3 are zero
    GridSamples u1, u2, u3;
    double enstrophy = 0.0;
    double umax = 0.0;
};

// samples: also return the velocity samples and max |u|.
Advection rotational(const VelocityState& v, bool products, bool samples) {
    const Grid& g = v.grid();
    const VorticityState w = curl(v);
    Advection a;
    a.enstrophy = inner(w, w);
    // For u = (U(z), V(z), 0) the product u x w = grad(|u|^2 / 2) is removed
    // exactly by the projection, so it is not evaluated.
    const bool layered = horizontally_uniform(v.u1) && horizontally_uniform(v.u2) &&
                         v.u3.is_zero();
    a.vanishes = !products || layered;
    if (samples || !a.vanishes) {
        a.u1 = transform_inverse(v.u1);
        a.u2 = transform_inverse(v.u2);
        a.u3 = transform_inverse(v.u3);
        a.umax = std::max({max_abs(a.u1), max_abs(a.u2), max_abs(a.u3)});
    }
    if (a.vanishes) {
        a.c1 = SpectralScalar(g, Parity::Even);
        a.c2 = SpectralScalar(g, Parity::Even);
        a.c3 = SpectralScalar(g, Parity::Odd);
        return a;
    }
    const GridSamples w1 = transform_inverse(w.w1);
    const GridSamples w2 = transform_inverse(w.w2);
    const GridSamples w3 = transform_inverse(w.w3);
    a.c1 = to_band(cross_term(a.u2, w3, a.u3, w2), Parity::Even, g);
    a.c2 = to_band(cross_term(a.u3, w1, a.u1, w3), Parity::Even, g);
    a.c3 = to_band(cross_term(a.u1, w2, a.u2, w1), Parity::Odd, g);
    return a;
}

// -1/2 (v . grad rho + div(v rho)), dealiased.
SpectralScalar skew_transport(const Advection& a, const SpectralScalar& rho) {
    const Grid& g = rho.grid();
    const GridSamples r = transform_inverse(rho);
    const GridSamples rx = transform_inverse(derivative(rho, Axis::X));
    const GridSamples ry = transform_inverse(derivative(rho, Axis::Y));
    const GridSamples rz = transform_inverse(derivative(rho, Axis::Z));
    GridSamples adv(g);
    {
        auto o = adv.values();
        const auto u1 = a.u1.values(), u2 = a.u2.values(), u3 = a.u3.values();
        const auto gx = rx.values(), gy = ry.values(), gz = rz.values();
        for (std::size_t i = 0; i < o.size(); ++i)
            o[i] = u1[i] * gx[i] + u2[i] * gy[i] + u3[i] * gz[i];
    }
    SpectralScalar out = to_band(adv, Parity::Odd, g);
    out += derivative(to_band(product(a.u1, r), Parity::Odd, g), Axis::X);
    out += derivative(to_band(product(a.u2, r), Parity::Odd, g), Axis::Y);
    out += derivative(to_band(product(a.u3, r), Parity::Even, g), Axis::Z);
    out *= -0.5;
    return out;
}

VelocityState projected_forcing(const SolverConfig& c, double t) {
    return leray_project(c.forcing(t));
}

// cfl: the stage also reports max |u| for the CFL advisory.
Stage<VelocityState> nonlinear(const VelocityState& v, const SolverConfig& c, double t,
                               bool cfl = false) {
    Advection a = rotational(v, c.advection, cfl);
    Stage<VelocityState> s;
    s.tend = a.vanishes ? VelocityState(v.grid())
                        : leray_project(std::move(a.c1), std::move(a.c2), std::move(a.c3));
    s.enstrophy = a.enstrophy;
    s.umax = a.umax;
    if (c.forcing) {
        VelocityState f = projected_forcing(c, t);
        s.forcing_work = inner(f, v);
        s.tend += f;
    }
    return s;
}

Stage<BoussinesqState> nonlinear(const BoussinesqState& st, const SolverConfig& c, double t,
                                 bool cfl = false) {
    Advection a = rotational(st.vel, c.advection, cfl || c.advection);
    Stage<BoussinesqState> s;
    a.c3 -= st.rho;
    s.tend.vel = leray_project(std::move(a.c1), std::move(a.c2), std::move(a.c3));
    s.tend.rho = c.advection ? skew_transport(a, st.rho) : SpectralScalar(st.grid(), Parity::Odd);
    s.enstrophy = a.enstrophy;
    s.umax = a.umax;
    s.rho_gradient = gradient_norm_sq(st.rho);
    s.buoyancy = inner(st.rho, st.vel.u3);
    if (c.forcing) {
        VelocityState f = projected_forcing(c, t);
        s.forcing_work = inner(f, st.vel);
        s.tend.vel += f;
    }
    return s;
}

std::vector<double> decay_factors(const Grid& g, double coef, double h) {
    std::vector<double> out(g.spectral_size());
    std::size_t i = 0;
    for (int kz = 0; kz <= g.nz; ++kz) {
        const double kz2 = g.wave_z(kz) * g.wave_z(kz);
        for (int iky = 0; iky < g.ny; ++iky) {
            const double ky = g.wave_y(g.ky_of(iky));
            for (int ikx = 0; ikx < g.nkx(); ++ikx) {
                const double kx = g.wave_x(ikx);
                out[i++] = coef == 0.0 ? 1.0 : std::exp(-coef * (kx * kx + ky * ky + kz2) * h);
            }
        }
    }
    return out;
}

// One term a * (e . x) of a fused linear combination; e == nullptr means 1.
struct Term {
    const SpectralScalar* x;
    double a;
    const std::vector<double>* e;
};

SpectralScalar combine_list(std::span<const Term> terms) {
    const SpectralScalar& first = *terms.front().x;
    SpectralScalar out(first.grid(), first.parity());
    auto o = out.coeffs();
    for (const Term& t : terms) {
        const auto x = t.x->coeffs();
        if (t.e) {
            const double* e = t.e->data();
            for (std::size_t i = 0; i < o.size(); ++i) o[i] += (t.a * e[i]) * x[i];
        } else {
            for (std::size_t i = 0; i < o.size(); ++i) o[i] += t.a * x[i];
        }
    }
    return out;
}

// Decay factors of one state component.
struct Decay {
    const std::vector<double>* vel;
    const std::vector<double>* rho;
};

// A state term: coefficient and decay choice applied per component.
template <class S>
struct StateTerm {
    const S* x;
    double a;
    Decay d;
};

VelocityState combine(std::span<const StateTerm<VelocityState>> terms) {
    VelocityState out;
    std::vector<Term> ts;
    for (int c = 0; c < 3; ++c) {
        ts.clear();
        for (const auto& t : terms) ts.push_back({&(*t.x)[c], t.a, t.d.vel});
        out[c] = combine_list(ts);
    }
    return out;
}

BoussinesqState combine(std::span<const StateTerm<BoussinesqState>> terms) {
    BoussinesqState out;
    std::vector<Term> ts;
    for (int c = 0; c < 3; ++c) {
        ts.clear();
        for (const auto& t : terms) ts.push_back({&t.x->vel[c], t.a, t.d.vel});
        out.vel[c] = combine_list(ts);
    }
    ts.clear();
    for (const auto& t : terms) ts.push_back({&t.x->rho, t.a, t.d.rho});
    out.rho = combine_list(ts);
    return out;
}

template <class S>
S combine(std::initializer_list<StateTerm<S>> terms) {
    return combine(std::span<const StateTerm<S>>(terms.begin(), terms.size()));
}

template <class S>
void add_integrals(Dissipation& acc, const Stage<S>& s, double w) {
    acc.enstrophy += w * s.enstrophy;
    acc.rho_gradient += w * s.rho_gradient;
    acc.buoyancy += w * s.buoyancy;
    acc.forcing_work += w * s.forcing_work;
}

}  // namespace

template <class S>
Integrator<S>::Integrator(SolverConfig config) : config_(std::move(config)) {
    config_.validate();
}

template <class S>
void Integrator<S>::prepare(double h) {
    if (f_.h == h) return;
    const Grid& g = config_.grid;
    f_.h = h;
    f_.nu_full = decay_factors(g, config_.nu, h);
    f_.nu_half = decay_factors(g, config_.nu, 0.5 * h);
    f_.eps_full = decay_factors(g, config_.epsilon, h);
    f_.eps_half = decay_factors(g, config_.epsilon, 0.5 * h);
}

template <class S>
void Integrator<S>::warn(const std::string& msg) const {
    if (config_.on_warning)
        config_.on_warning(msg);
    else
        std::cerr << "warning: " << msg << '\n';
}

template <class S>
S Integrator<S>::step(const S& s, double t, double h, Dissipation& acc) {
    require_compatible(s.grid(), config_.grid);
    prepare(h);
    const Decay one{nullptr, nullptr};
    const Decay half{&f_.nu_half, &f_.eps_half};
    const Decay full{&f_.nu_full, &f_.eps_full};

    const Stage<S> k1 = nonlinear(s, config_, t, true);
    const double limit = 0.5 * config_.grid.h_min() / k1.umax;
    if (k1.umax > 0.0 && h > limit) {
        std::ostringstream msg;
        msg << "CFL advisory violated at t=" << t << ": dt=" << h << " > " << limit;
        if (config_.strict_cfl) throw CflError(msg.str());
        if (!cfl_warned_) warn(msg.str());
        cfl_warned_ = true;
    }

    // Lawson RK4 on the integrating factor E_h = exp(h L).
    const Stage<S> k2 =
        nonlinear(combine<S>({{&s, 1.0, half}, {&k1.tend, 0.5 * h, half}}), config_, t + 0.5 * h);
    const S es = combine<S>({{&s, 1.0, half}});  // E_{h/2} s
    const Stage<S> k3 =
        nonlinear(combine<S>({{&es, 1.0, one}, {&k2.tend, 0.5 * h, one}}), config_, t + 0.5 * h);
    const Stage<S> k4 =
        nonlinear(combine<S>({{&es, 1.0, half}, {&k3.tend, h, half}}), config_, t + h);
    const S out = combine<S>({{&s, 1.0, full},
                              {&k1.tend, h / 6.0, full},
                              {&k2.tend, h / 3.0, half},
                              {&k3.tend, h / 3.0, half},
                              {&k4.tend, h / 6.0, one}});

    add_integrals(acc, k1, h / 6.0);
    add_integrals(acc, k2, h / 3.0);
    add_integrals(acc, k3, h / 3.0);
    add_integrals(acc, k4, h / 6.0);

    if (!out.all_finite()) {
        std::ostringstream msg;
        msg << "non-finite coefficients at t=" << t + h;
        throw BlowUpError(msg.str(), t + h);
    }
    return out;
}

template <class S>
void Integrator<S>::integrate(
    const S& initial, const std::function<void(double, const S&, const Dissipation&)>& observer) {
    require_compatible(initial.grid(), config_.grid);
    const long n = config_.steps();
    Dissipation acc;
    S s = initial;
    observer(0.0, s, acc);
    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * config_.dt;
        const bool last = i + 1 == n;
        const double t_next = last ? config_.t_end : static_cast<double>(i + 1) * config_.dt;
        s = step(s, t, t_next - t, acc);
        if (last || (i + 1) % config_.snapshot_interval == 0) observer(t_next, s, acc);
    }
}

template <class S>
Trajectory<S> Integrator<S>::integrate(const S& initial) {
    Trajectory<S> traj;
    traj.config = config_;
    integrate(initial, [&](double t, const S& s, const Dissipation& d) {
        traj.snapshots.push_back({t, s, d});
    });
    return traj;
}

template class Integrator<VelocityState>;
template class Integrator<BoussinesqState>;

VelocityState nse_rhs(const VelocityState& v, double nu) {
    SolverConfig c;
    c.grid = v.grid();
    VelocityState out = nonlinear(v, c, 0.0).tend;
    if (nu != 0.0)
        for (int i = 0; i < 3; ++i) out[i].axpy(nu, laplacian(v[i]));
    return out;
}

BoussinesqState boussinesq_rhs(const BoussinesqState& s, double nu, double epsilon) {
    SolverConfig c;
    c.grid = s.grid();
    BoussinesqState out = nonlinear(s, c, 0.0).tend;
    if (nu != 0.0)
        for (int i = 0; i < 3; ++i) out.vel[i].axpy(nu, laplacian(s.vel[i]));
    if (epsilon != 0.0) out.rho.axpy(epsilon, laplacian(s.rho));
    return out;
}

VelocityState exact_shear_solution(double t, double nu, const Grid& grid) {
    constexpr double pi = std::numbers::pi;
    VelocityState v(grid);
    v.u1.set_mode(0, 0, 1, std::exp(-nu * pi * pi * t));
    return v;
}

VelocityState step(const VelocityState& s, const SolverConfig& config) {
    Dissipation d;
    return Integrator<VelocityState>(config).step(s, 0.0, config.dt, d);
}

BoussinesqState step(const BoussinesqState& s, const SolverConfig& config) {
    Dissipation d;
    return Integrator<BoussinesqState>(config).step(s, 0.0, config.dt, d);
}

Trajectory<VelocityState> integrate(const VelocityState& initial, const SolverConfig& config) {
    return Integrator<VelocityState>(config).integrate(initial);
}

Trajectory<BoussinesqState> integrate(const BoussinesqState& initial, const SolverConfig& config) {
    return Integrator<BoussinesqState>(config).integrate(initial);
}

}  // namespace navslip
