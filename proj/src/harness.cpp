#include "navslip/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "navslip/errors.hpp"
#include "navslip/spectral.hpp"

namespace navslip {

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

struct HMode {
    int kx, ky;
    Complex c;
};

// Random coefficients on the half plane kx > 0 or (kx = 0, ky > 0), |k| <= band.
std::vector<HMode> horizontal_modes(std::mt19937_64& rng, int band) {
    auto unit = [&rng] { return 2.0 * std::generate_canonical<double, 53>(rng) - 1.0; };
    std::vector<HMode> out;
    for (int kx = 0; kx <= band; ++kx)
        for (int ky = -band; ky <= band; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            const double re = unit(), im = unit();
            out.push_back({kx, ky, Complex(re, im)});
        }
    return out;
}

// sin^power(pi z) as a z-only field of the given parity.
SpectralScalar profile(const Grid& g, int power, Parity p) {
    GridSamples s(g);
    for (int iz = 0; iz <= g.nz; ++iz) {
        const double v = std::pow(std::sin(pi * g.z(iz)), power);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) s(ix, iy, iz) = v;
    }
    return transform_forward(s, p, g);
}

// profile(z) * sum of the horizontal modes.
SpectralScalar separable(const SpectralScalar& column, const std::vector<HMode>& modes) {
    const Grid& g = column.grid();
    SpectralScalar out(g, column.parity());
    for (const HMode& m : modes)
        for (int kz = 0; kz <= g.nz; ++kz) {
            const double a = column.at(0, 0, kz).real();
            if (a != 0.0) out.set_mode(m.kx, m.ky, kz, a * m.c);
        }
    return out;
}

VelocityState dealiased(VelocityState v) {
    for (int c = 0; c < 3; ++c) dealias_in_place(v[c]);
    return v;
}

void require_blob_resolved(const Grid& g, int top) {
    if (!is_retained(g, kBlobBand, kBlobBand, top))
        throw std::invalid_argument("grid " + std::to_string(g.nx) + "x" + std::to_string(g.ny) +
                                    "x" + std::to_string(g.nz) +
                                    " too coarse for the blob profile");
}

// Unit-norm velocity curl(Q grad_h^perp phi) with Q = sin^(2m+1)(pi z). Its
// horizontal part is a gradient, so omega3 = 0 everywhere and the odd
// tangential components vanish on the walls.
VelocityState blob_velocity(const Grid& g, std::uint64_t seed) {
    require_blob_resolved(g, 2 * kBlobPower + 1);
    std::mt19937_64 rng(seed);
    const SpectralScalar psi =
        separable(profile(g, 2 * kBlobPower + 1, Parity::Odd), horizontal_modes(rng, kBlobBand));
    SpectralScalar a2 = derivative(psi, Axis::X);
    a2 *= -1.0;
    VorticityState a(derivative(psi, Axis::Y), std::move(a2), SpectralScalar(g, Parity::Even));
    VelocityState u = dealiased(leray_project(curl(a)));
    u *= 1.0 / l2_norm(u);
    return u;
}

// Unit-norm density sin^3(pi z) g(x, y): rho and grad rho vanish on the walls.
SpectralScalar blob_density(const Grid& g, std::uint64_t seed) {
    require_blob_resolved(g, 3);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SpectralScalar rho = separable(profile(g, 3, Parity::Odd), horizontal_modes(rng, kBlobBand));
    dealias_in_place(rho);
    rho *= 1.0 / l2_norm(rho);
    return rho;
}

template <class F>
void remove_component(F& w, const F& u) {
    const double uu = inner(u, u);
    if (uu > 0.0) w.axpy(-inner(w, u) / uu, u);
}

double wall_gradient_max(const SpectralScalar& rho) {
    double m = 0.0;
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        const GridSamples s = transform_inverse(derivative(rho, a));
        for (int iz : {0, rho.grid().nz})
            for (int iy = 0; iy < s.ny(); ++iy)
                for (int ix = 0; ix < s.nx(); ++ix) m = std::max(m, std::abs(s(ix, iy, iz)));
    }
    return m;
}

void check(bool ok, const std::string& invariant, double measured) {
    if (!ok) throw DataClassError(invariant, measured);
}

}  // namespace

std::string_view to_string(DataKind k) {
    switch (k) {
        case DataKind::Shear: return "Shear";
        case DataKind::InteriorBlob: return "InteriorBlob";
        case DataKind::GenericBoundaryVorticity: return "GenericBoundaryVorticity";
        case DataKind::BoussinesqBlob: return "BoussinesqBlob";
    }
    return "?";
}

DataKind parse_data_kind(std::string_view name) {
    for (DataKind k : {DataKind::Shear, DataKind::InteriorBlob,
                       DataKind::GenericBoundaryVorticity, DataKind::BoussinesqBlob})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown data class '" + std::string(name) + "'");
}

DataClassError::DataClassError(std::string invariant, double measured)
    : std::runtime_error("data class invariant '" + invariant + "' violated: measured " +
                         fmt(measured)),
      invariant_(std::move(invariant)),
      measured_(measured) {}

BoussinesqState InitialData::boussinesq_reference() const {
    return BoussinesqState(reference, rho_reference ? *rho_reference
                                                    : SpectralScalar(reference.grid(), Parity::Odd));
}

BoussinesqState InitialData::boussinesq_viscous() const {
    return BoussinesqState(viscous, rho_viscous ? *rho_viscous
                                                : SpectralScalar(viscous.grid(), Parity::Odd));
}

VelocityState perturbation_pattern(std::uint64_t pattern, const Grid& g) {
    std::mt19937_64 rng(pattern);
    auto unit = [&rng] { return 2.0 * std::generate_canonical<double, 53>(rng) - 1.0; };
    VelocityState w(g);
    for (int c = 0; c < 3; ++c)
        for (int kz = 0; kz <= 3; ++kz)
            for (int kx = 0; kx <= 2; ++kx)
                for (int ky = -2; ky <= 2; ++ky) {
                    if (kx == 0 && ky < 0) continue;
                    const double re = unit(), im = (kx == 0 && ky == 0) ? 0.0 : unit();
                    if (c == 2 && kz == 0) continue;
                    w[c].set_mode(kx, ky, kz, Complex(re, im));
                }
    w = dealiased(leray_project(w));
    w *= 1.0 / l2_norm(w);
    return w;
}

SpectralScalar density_pattern(std::uint64_t pattern, const Grid& g) {
    std::mt19937_64 rng(pattern ^ 0x5851f42d4c957f2dULL);
    auto unit = [&rng] { return 2.0 * std::generate_canonical<double, 53>(rng) - 1.0; };
    SpectralScalar s(g, Parity::Odd);
    for (int kz = 1; kz <= 3; ++kz)
        for (int kx = 0; kx <= 2; ++kx)
            for (int ky = -2; ky <= 2; ++ky) {
                if (kx == 0 && ky < 0) continue;
                const double re = unit(), im = (kx == 0 && ky == 0) ? 0.0 : unit();
                s.set_mode(kx, ky, kz, Complex(re, im));
            }
    dealias_in_place(s);
    s *= 1.0 / l2_norm(s);
    return s;
}

InitialData make_initial_data(const DataClass& cls, double nu, const Grid& g) {
    if (!(nu >= 0.0) || !std::isfinite(nu))
        throw std::invalid_argument("nu must be finite and >= 0");
    InitialData d;
    switch (cls.kind) {
        case DataKind::Shear:
            d.reference = exact_shear_solution(0.0, 0.0, g);
            break;
        case DataKind::InteriorBlob:
            d.reference = blob_velocity(g, cls.seed);
            break;
        case DataKind::GenericBoundaryVorticity:
            d.reference = blob_velocity(g, cls.seed);
            d.reference.u1.set_mode(0, 1, 0, 0.15);  // + 0.3 cos(y) e1
            break;
        case DataKind::BoussinesqBlob:
            d.reference = blob_velocity(g, cls.seed);
            d.rho_reference = blob_density(g, cls.seed);
            break;
    }
    d.viscous = d.reference;
    d.rho_viscous = d.rho_reference;

    if (cls.perturbation) {
        const Perturbation& p = *cls.perturbation;
        if (!(p.r >= 0.0)) throw std::invalid_argument("perturbation exponent must be >= 0");
        const double amp = std::pow(nu, p.r);
        VelocityState w = perturbation_pattern(p.pattern, g);
        remove_component(w, d.reference);
        w *= 1.0 / l2_norm(w);
        d.viscous.axpy(amp, w);
        if (d.rho_reference) {
            SpectralScalar s = density_pattern(p.pattern, g);
            remove_component(s, *d.rho_reference);
            s *= 1.0 / l2_norm(s);
            d.rho_viscous->axpy(amp, s);
        }
        const double diff = l2_norm(d.viscous - d.reference);
        check(std::abs(diff - amp) <= 1e-10 * std::max(amp, 1e-300),
              "||u0^nu - u0^E|| = nu^r", diff);
    }

    for (const VelocityState* v : {&d.reference, &d.viscous}) {
        const double div = max_divergence(*v);
        check(div <= 1e-10, "divergence-free", div);
    }
    const WallTrace trace = boundary_vorticity_trace(curl(d.reference));
    if (cls.kind == DataKind::GenericBoundaryVorticity) {
        const double l2 = trace.normal_l2(g);
        check(l2 >= 0.1, "||omega3 wall trace|| >= 0.1", l2);
    } else {
        const double m = std::max(trace.max_tangential(), trace.max_normal());
        check(m <= 1e-10, "omega0 = 0 on the walls", m);
    }
    if (d.rho_reference) {
        const double m = wall_gradient_max(*d.rho_reference);
        check(m <= 1e-10, "grad rho0 = 0 on the walls", m);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

template <class F>
void parallel_for(std::size_t n, int threads, const F& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1, threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    for (std::size_t i = 0; i < n; i += workers) fn(i);
    for (auto& t : pool) t.join();
}

const VelocityState& velocity(const VelocityState& s) { return s; }
const VelocityState& velocity(const BoussinesqState& s) { return s.vel; }
const SpectralScalar* density(const VelocityState&) { return nullptr; }
const SpectralScalar* density(const BoussinesqState& s) { return &s.rho; }

template <class S>
struct Lane {
    double nu = 0.0, epsilon = 0.0;
    std::optional<Integrator<S>> integrator;  // empty for a closed-form reference
    S state;
    Dissipation acc;
    std::exception_ptr error;
    ErrorSeries series;
};

struct SweepPlan {
    std::vector<double> values;  // nu or epsilon per run
    long steps = 0;
    std::vector<std::string> warnings;
};

long exact_steps(const SolverConfig& c, std::vector<std::string>& problems) {
    const double r = c.t_end / c.dt;
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
        problems.push_back("t_end must be a whole number of steps for sweeps");
        return 0;
    }
    if (n < 100) problems.push_back("sweeps need at least 100 steps (got " + fmt(n) + ")");
    return static_cast<long>(n);
}

SweepPlan plan_sweep(std::span<const double> values, std::size_t min_count, bool allow_zero,
                     const char* name, const SweepConfig& config) {
    std::vector<std::string> problems;
    try {
        config.solver.validate();
    } catch (const ValidationError& e) {
        problems = e.problems();
    }
    if (config.threads < 1) problems.push_back("threads must be >= 1");
    if (values.size() < min_count)
        problems.push_back(std::string("need at least ") + std::to_string(min_count) + " " +
                           name + " values");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
            problems.push_back(std::string(name) + " values must be " +
                               (allow_zero ? "finite and >= 0" : "finite and > 0"));
        if (i > 0 && !(v < values[i - 1]))
            problems.push_back(std::string(name) + " values must be strictly decreasing");
    }
    SweepPlan plan;
    if (problems.empty()) plan.steps = exact_steps(config.solver, problems);
    if (!problems.empty()) {
        std::sort(problems.begin(), problems.end());
        problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
        throw ValidationError(problems);
    }
    plan.values.assign(values.begin(), values.end());
    return plan;
}

void viscosity_warnings(SweepPlan& plan, const Grid& g) {
    plan.warnings = sweep_warnings(plan.values, g);
}

template <class S>
void record(Lane<S>& lane, const S& ref, double t) {
    const VelocityState e = velocity(lane.state) - velocity(ref);
    lane.series.times.push_back(t);
    lane.series.err2.push_back(inner(e, e));
    const double g = h1_seminorm(e);
    lane.series.grad_err2.push_back(g * g);
    if (const SpectralScalar* r = density(lane.state)) {
        const SpectralScalar d = *r - *density(ref);
        lane.series.rho_err2.push_back(inner(d, d));
    }
}

// Steps every lane (reference first) in lockstep and records the errors of
// lanes 1.. against lane 0 after each step.
template <class S>
SweepResult run_lanes(std::vector<Lane<S>>& lanes, const SweepPlan& plan,
                      const SweepConfig& config, bool weighted) {
    std::vector<std::string> warnings = plan.warnings;
    const double dt = config.solver.dt;
    for (std::size_t i = 1; i < lanes.size(); ++i) record(lanes[i], lanes[0].state, 0.0);

    for (long n = 0; n < plan.steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        parallel_for(lanes.size(), config.threads, [&](std::size_t i) {
            Lane<S>& lane = lanes[i];
            if (!lane.integrator || lane.error) return;
            try {
                lane.state = lane.integrator->step(lane.state, t, dt, lane.acc);
            } catch (...) {
                lane.error = std::current_exception();
            }
        });
        if (lanes[0].error) break;
        const double t_next = static_cast<double>(n + 1) * dt;
        parallel_for(lanes.size() - 1, config.threads, [&](std::size_t i) {
            Lane<S>& lane = lanes[i + 1];
            if (!lane.error) record(lane, lanes[0].state, t_next);
        });
    }

    std::vector<double> failed;
    std::string detail;
    auto describe = [&](const Lane<S>& lane, const char* who) {
        try {
            std::rethrow_exception(lane.error);
        } catch (const std::exception& e) {
            detail += std::string(detail.empty() ? "" : "; ") + who + ": " + e.what();
        }
    };
    if (lanes[0].error) {
        describe(lanes[0], "reference");
        for (std::size_t i = 1; i < lanes.size(); ++i) failed.push_back(lanes[i].nu);
    } else {
        for (std::size_t i = 1; i < lanes.size(); ++i)
            if (lanes[i].error) {
                failed.push_back(weighted ? lanes[i].epsilon : lanes[i].nu);
                describe(lanes[i], ("run " + fmt(failed.back())).c_str());
            }
    }
    if (!failed.empty()) throw SweepError("sweep failed: " + detail, failed);

    SweepResult out;
    out.solver = config.solver;
    out.solver.forcing = nullptr;
    out.solver.on_warning = nullptr;
    for (std::size_t i = 1; i < lanes.size(); ++i) {
        const Lane<S>& lane = lanes[i];
        SweepRow row;
        row.nu = lane.nu;
        row.epsilon = lane.epsilon;
        row.steps = plan.steps;
        row.sup_err2 = *std::max_element(lane.series.err2.begin(), lane.series.err2.end());
        row.grad_err2_int = cumulative_integral(lane.series.times, lane.series.grad_err2).back();
        if (!lane.series.rho_err2.empty())
            row.rho_err2 =
                *std::max_element(lane.series.rho_err2.begin(), lane.series.rho_err2.end());
        if (weighted) row.weighted_dissipation = lane.epsilon * lane.acc.rho_gradient;
        out.rows.push_back(row);
        out.series.push_back(lane.series);
    }
    std::sort(warnings.begin(), warnings.end());
    out.warnings = std::move(warnings);
    return out;
}

template <class S>
Lane<S> make_lane(const SweepConfig& config, double nu, double epsilon, S initial,
                  std::vector<std::string>* sink, std::mutex* m) {
    Lane<S> lane;
    lane.nu = nu;
    lane.epsilon = epsilon;
    SolverConfig c = config.solver;
    c.nu = nu;
    c.epsilon = epsilon;
    c.forcing = nullptr;
    const std::string tag = "nu=" + fmt(nu) + (epsilon > 0.0 ? " eps=" + fmt(epsilon) : "");
    c.on_warning = [sink, m, tag](const std::string& msg) {
        std::lock_guard lock(*m);
        sink->push_back(tag + ": " + msg);
    };
    lane.integrator.emplace(std::move(c));
    lane.state = std::move(initial);
    return lane;
}

template <class S>
SweepResult finish(std::vector<Lane<S>>& lanes, SweepPlan& plan, const SweepConfig& config,
                   std::vector<std::string>& run_warnings, bool weighted) {
    SweepResult r = run_lanes(lanes, plan, config, weighted);
    r.warnings.insert(r.warnings.end(), run_warnings.begin(), run_warnings.end());
    std::sort(r.warnings.begin(), r.warnings.end());
    return r;
}

}  // namespace

std::vector<std::string> sweep_warnings(std::span<const double> nus, const Grid& g) {
    std::vector<std::string> out;
    const double floor = std::pow(pi / g.nz, 2);
    for (double nu : nus)
        if (nu < floor)
            out.push_back("nu=" + fmt(nu) + " below (pi/nz)^2=" + fmt(floor) +
                          ": boundary scales may be under-resolved");
    if (nus.size() >= 2 && nus.back() > 0.0) {
        const double span = std::log10(nus.front() / nus.back());
        if (span < 2.0) out.push_back("viscosities span " + fmt(span) + " decades (fewer than 2)");
    }
    std::sort(out.begin(), out.end());
    return out;
}

SweepResult run_sweep(const std::function<InitialData(double)>& make,
                      std::span<const double> nus, const SweepConfig& config) {
    SweepPlan plan = plan_sweep(nus, 4, false, "nu", config);
    viscosity_warnings(plan, config.solver.grid);
    std::mutex m;
    std::vector<std::string> run_warnings;
    std::vector<Lane<VelocityState>> lanes;
    const InitialData first = make(plan.values.front());
    lanes.push_back(make_lane(config, 0.0, 0.0, first.reference, &run_warnings, &m));
    for (double nu : plan.values) {
        InitialData d = make(nu);
        lanes.push_back(make_lane(config, nu, 0.0, std::move(d.viscous), &run_warnings, &m));
    }
    return finish(lanes, plan, config, run_warnings, false);
}

SweepResult run_sweep(const DataClass& cls, std::span<const double> nus,
                      const SweepConfig& config) {
    if (cls.kind == DataKind::BoussinesqBlob)
        throw std::invalid_argument("BoussinesqBlob data needs boussinesq_sweep");
    const Grid g = config.solver.grid;
    if (cls.kind != DataKind::Shear) {
        SweepResult r = run_sweep([&](double nu) { return make_initial_data(cls, nu, g); }, nus,
                                  config);
        r.kind = cls.kind;
        return r;
    }
    // Shear: the Euler reference is the steady closed form u^E = (cos pi z, 0, 0).
    SweepPlan plan = plan_sweep(nus, 4, false, "nu", config);
    viscosity_warnings(plan, g);
    std::mutex m;
    std::vector<std::string> run_warnings;
    std::vector<Lane<VelocityState>> lanes(1);
    lanes[0].state = exact_shear_solution(0.0, 0.0, g);
    for (double nu : plan.values)
        lanes.push_back(make_lane(config, nu, 0.0, make_initial_data(cls, nu, g).viscous,
                                  &run_warnings, &m));
    SweepResult r = finish(lanes, plan, config, run_warnings, false);
    r.kind = cls.kind;
    return r;
}

SweepResult boussinesq_sweep(const std::function<InitialData(double)>& make,
                             std::span<const double> nus, const SweepConfig& config) {
    SweepPlan plan = plan_sweep(nus, 4, false, "nu", config);
    viscosity_warnings(plan, config.solver.grid);
    std::mutex m;
    std::vector<std::string> run_warnings;
    std::vector<Lane<BoussinesqState>> lanes;
    const InitialData first = make(plan.values.front());
    lanes.push_back(
        make_lane(config, 0.0, 0.0, first.boussinesq_reference(), &run_warnings, &m));
    for (double nu : plan.values)
        lanes.push_back(
            make_lane(config, nu, 0.0, make(nu).boussinesq_viscous(), &run_warnings, &m));
    SweepResult r = finish(lanes, plan, config, run_warnings, false);
    r.kind = DataKind::BoussinesqBlob;
    return r;
}

SweepResult boussinesq_sweep(const DataClass& cls, std::span<const double> nus,
                             const SweepConfig& config) {
    if (cls.kind != DataKind::BoussinesqBlob)
        throw std::invalid_argument("boussinesq_sweep needs BoussinesqBlob data");
    const Grid g = config.solver.grid;
    return boussinesq_sweep([&](double nu) { return make_initial_data(cls, nu, g); }, nus,
                            config);
}

EpsilonSweep epsilon_sweep(const DataClass& cls, double nu, std::span<const double> epsilons,
                           const SweepConfig& config) {
    if (cls.kind != DataKind::BoussinesqBlob)
        throw std::invalid_argument("epsilon_sweep needs BoussinesqBlob data");
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw ValidationError({"nu must be finite and > 0 for epsilon sweeps"});
    SweepPlan plan = plan_sweep(epsilons, 3, true, "epsilon", config);
    const InitialData d = make_initial_data(cls, nu, config.solver.grid);
    const BoussinesqState initial = d.boussinesq_viscous();

    std::mutex m;
    std::vector<std::string> run_warnings;
    std::vector<Lane<BoussinesqState>> lanes;
    lanes.push_back(make_lane(config, nu, 0.0, initial, &run_warnings, &m));
    for (double eps : plan.values)
        lanes.push_back(make_lane(config, nu, eps, initial, &run_warnings, &m));

    EpsilonSweep out;
    out.table = finish(lanes, plan, config, run_warnings, true);
    out.table.kind = cls.kind;
    out.nu = nu;
    out.initial_energy = 0.5 * (inner(initial.vel, initial.vel) + inner(initial.rho, initial.rho));
    out.errors_decreasing = true;
    out.dissipation_bounded = true;
    const auto& rows = out.table.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (*rows[i].weighted_dissipation > out.initial_energy) out.dissipation_bounded = false;
        if (i > 0 && !(rows[i].sup_err2 < rows[i - 1].sup_err2 &&
                       *rows[i].rho_err2 < *rows[i - 1].rho_err2))
            out.errors_decreasing = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rates

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_rate needs at least 4 points, got " +
                                    std::to_string(points.size()));
    std::vector<double> x, y;
    for (const auto& [nu, v] : points) {
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw std::invalid_argument("fit_rate: nu must be positive, got " + fmt(nu));
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("fit_rate: value " + fmt(v) + " at nu=" + fmt(nu) +
                                        " is not positive, rate undefined");
        x.push_back(std::log(nu));
        y.push_back(std::log(v));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: all nu values coincide");
    RateFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.count = static_cast<int>(x.size());
    return f;
}

SweepFits fit_sweep(const SweepResult& result) {
    SweepFits out;
    auto column = [&](const char* name, auto get) -> std::optional<RateFit> {
        std::vector<std::pair<double, double>> pts;
        for (const SweepRow& r : result.rows) {
            const std::optional<double> v = get(r);
            if (!v) return std::nullopt;
            pts.emplace_back(r.nu, *v);
        }
        if (pts.size() < 4) return std::nullopt;
        for (const auto& p : pts)
            if (p.second == 0.0) {
                out.notes.push_back(std::string(name) + ": exact coincidence (zero error)");
                return std::nullopt;
            }
        return fit_rate(pts);
    };
    out.sup = column("sup_err2", [](const SweepRow& r) { return std::optional(r.sup_err2); });
    out.grad =
        column("grad_err2_int", [](const SweepRow& r) { return std::optional(r.grad_err2_int); });
    out.rho = column("rho_err2", [](const SweepRow& r) { return r.rho_err2; });
    return out;
}

// ---------------------------------------------------------------------------
// Energy budget of the difference

namespace {

// (w . grad) u, evaluated on the grid and transformed back.
VelocityState directional_derivative(const VelocityState& w, const VelocityState& u) {
    const Grid& g = u.grid();
    const GridSamples ws[3] = {transform_inverse(w.u1), transform_inverse(w.u2),
                               transform_inverse(w.u3)};
    VelocityState out(g);
    for (int i = 0; i < 3; ++i) {
        GridSamples acc(g);
        auto o = acc.values();
        int j = 0;
        for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
            const GridSamples d = transform_inverse(derivative(u[i], a));
            const auto dv = d.values();
            const auto wv = ws[j++].values();
            for (std::size_t k = 0; k < o.size(); ++k) o[k] += wv[k] * dv[k];
        }
        out[i] = transform_forward(acc, u[i].parity(), g);
    }
    return out;
}

// nu int_walls (omega x n) . w dS with n the outward normal (0, 0, -+1).
double boundary_vorticity_term(const VorticityState& omega, const VelocityState& w, double nu) {
    const Grid& g = w.grid();
    const GridSamples o1 = transform_inverse(omega.w1), o2 = transform_inverse(omega.w2);
    const GridSamples v1 = transform_inverse(w.u1), v2 = transform_inverse(w.u2);
    const double ds = (g.lx / g.nx) * (g.ly / g.ny);
    double sum = 0.0;
    for (int iz : {0, g.nz}) {
        const double n3 = iz == 0 ? -1.0 : 1.0;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                sum += n3 * (o2(ix, iy, iz) * v1(ix, iy, iz) - o1(ix, iy, iz) * v2(ix, iy, iz));
    }
    return nu * sum * ds;
}

}  // namespace

BudgetTerms budget_terms(const VelocityState& viscous, const VelocityState& ue, double nu) {
    require_compatible(viscous.grid(), ue.grid());
    const VelocityState w = viscous - ue;
    double interior = 0.0;
    for (int c = 0; c < 3; ++c) interior += inner(laplacian(ue[c]), w[c]);
    BudgetTerms t;
    t.boundary = boundary_vorticity_term(curl(ue), w, nu);
    if (std::abs(t.boundary) > 1e-12)
        throw std::runtime_error("boundary vorticity term " + fmt(t.boundary) +
                                 " exceeds 1e-12 on flat walls");
    const double grad = h1_seminorm(w);
    t.energy = 0.5 * inner(w, w);
    t.nonlinear = inner(directional_derivative(w, ue), w);
    t.interior = nu * interior;
    t.curvature = 0.0;  // grad n = 0 on flat walls
    t.dissipation = nu * grad * grad;
    return t;
}

void append(GronwallBudget& b, double time, const BudgetTerms& t) {
    b.times.push_back(time);
    b.energy.push_back(t.energy);
    b.nonlinear.push_back(t.nonlinear);
    b.interior.push_back(t.interior);
    b.boundary.push_back(t.boundary);
    b.curvature.push_back(t.curvature);
    b.dissipation.push_back(t.dissipation);
}

void close_budget(GronwallBudget& b) {
    const std::size_t n = b.times.size();
    std::vector<double> source(n), rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        source[i] = -b.nonlinear[i] + b.interior[i] + b.boundary[i] + b.curvature[i];
        rate[i] = source[i] - b.dissipation[i];
    }
    const auto source_int = cumulative_integral(b.times, source);
    const auto rate_int = cumulative_integral(b.times, rate);
    const auto diss_int = cumulative_integral(b.times, b.dissipation);
    const double w0 = 2.0 * b.energy[0];
    b.closure = 0.0;
    b.inequality_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        b.closure = std::max(b.closure, std::abs(b.energy[i] - b.energy[0] - rate_int[i]));
        const double lhs = 2.0 * b.energy[i] + diss_int[i] - 2.0 * source_int[i];
        b.inequality_margin = std::min(b.inequality_margin, w0 - lhs);
    }
}

GronwallBudget gronwall_budget(const Trajectory<VelocityState>& viscous,
                               const Trajectory<VelocityState>& reference, double nu) {
    const auto& a = viscous.snapshots;
    const auto& b = reference.snapshots;
    if (a.size() != b.size())
        throw std::invalid_argument("gronwall_budget: trajectories have " +
                                    std::to_string(a.size()) + " and " +
                                    std::to_string(b.size()) + " snapshots");
    if (a.size() < 3) throw std::invalid_argument("gronwall_budget: need at least 3 snapshots");
    GronwallBudget out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].time - b[i].time) > 1e-12 * std::max(1.0, std::abs(a[i].time)))
            throw std::invalid_argument("gronwall_budget: snapshot times differ at index " +
                                        std::to_string(i));
        append(out, a[i].time, budget_terms(a[i].state, b[i].state, nu));
    }
    close_budget(out);
    return out;
}

}  // namespace navslip
