#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "navslip/errors.hpp"
#include "navslip/io.hpp"
#include "navslip/lagrangian.hpp"

namespace navslip {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string num(double v) { return format_double(v); }

std::string opt(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

double max_finite(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (!std::isnan(x)) m = std::max(m, x);
    return m;
}

bool has_values(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return !std::isnan(x); });
}

json fit_json(const std::optional<RateFit>& f) {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"intercept", f->intercept}, {"r_squared", f->r_squared},
            {"count", f->count}};
}

json checks_json(const std::vector<Check>& checks) {
    json a = json::array();
    for (const Check& c : checks)
        a.push_back({{"name", c.name},
                     {"value", c.value},
                     {"threshold", c.threshold},
                     {"passed", c.passed},
                     {"detail", c.detail}});
    return a;
}

// Collects artifact names and their checksums as they are written.
struct Artifacts {
    fs::path dir;
    std::map<std::string, std::string> sums;

    void csv(const std::string& name, const CsvTable& t) {
        fs::create_directories((dir / name).parent_path());
        write_csv(dir / name, t);
        sums[name] = sha256_file(dir / name);
    }
    void snapshot(const std::string& name, const FieldSnapshot& s) {
        write_snapshot(dir / name, s);
        sums[name] = sha256_file(dir / name);
    }
    void text(const std::string& name, const std::string& body) {
        fs::create_directories((dir / name).parent_path());
        std::ofstream out(dir / name, std::ios::trunc);
        out << body;
        out.close();
        sums[name] = sha256_file(dir / name);
    }
};

struct Outcome {
    json diagnostics = json::object();
    std::vector<std::string> warnings;
};

InitialData scaled_data(const ExperimentConfig& c, double nu) {
    InitialData d = make_initial_data(c.data(), nu, c.grid());
    if (c.amplitude != 1.0) {
        d.reference *= c.amplitude;
        d.viscous *= c.amplitude;
        if (d.rho_reference) *d.rho_reference *= c.amplitude;
        if (d.rho_viscous) *d.rho_viscous *= c.amplitude;
    }
    return d;
}

SolverConfig solver_with_warnings(const ExperimentConfig& c, std::vector<std::string>& sink) {
    SolverConfig s = c.solver();
    s.on_warning = [&sink](const std::string& m) { sink.push_back(m); };
    return s;
}

template <class S>
void single_run(const ExperimentConfig& c, const S& initial, Artifacts& art, Outcome& out) {
    CsvTable t{{"time", "energy", "enstrophy", "rho_gradient", "buoyancy", "max_divergence"}, {}};
    auto observe = [&](double time, const S& s, const Dissipation&) {
        const VelocityState* v;
        double energy, rho_grad = 0.0, buoyancy = 0.0;
        if constexpr (std::is_same_v<S, BoussinesqState>) {
            v = &s.vel;
            energy = 0.5 * (inner(s.vel, s.vel) + inner(s.rho, s.rho));
            rho_grad = gradient_norm_sq(s.rho);
            buoyancy = inner(s.rho, s.vel.u3);
        } else {
            v = &s;
            energy = 0.5 * inner(s, s);
        }
        const VorticityState w = curl(*v);
        t.rows.push_back({num(time), num(energy), num(inner(w, w)), num(rho_grad), num(buoyancy),
                          num(max_divergence(*v))});
    };
    art.snapshot("initial.nslp", make_snapshot(0.0, initial));
    Integrator<S> integrator(solver_with_warnings(c, out.warnings));
    S state = initial;
    Dissipation acc;
    const long steps = c.solver().steps();
    observe(0.0, state, acc);
    for (long n = 0; n < steps; ++n) {
        state = integrator.step(state, n * c.dt, c.dt, acc);
        if ((n + 1) % c.snapshot_interval == 0) observe((n + 1) * c.dt, state, acc);
    }
    art.csv("series.csv", t);
    art.snapshot("final.nslp", make_snapshot(steps * c.dt, state));
    out.diagnostics["steps"] = steps;
    out.diagnostics["final_time"] = steps * c.dt;
    out.diagnostics["enstrophy_integral"] = acc.enstrophy;
}

void write_sweep(const ExperimentConfig& c, const SweepResult& r, const std::string& id,
                 Artifacts& art, Outcome& out) {
    const bool closed_form = c.experiment == ExperimentKind::Sweep &&
                             c.data_class == DataKind::Shear && c.amplitude == 1.0;
    CsvTable t{{"nu", "sup_err2", "grad_err2_int", "rho_err2", "manifest_path"}, {}};
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const SweepRow& row = r.rows[i];
        const ErrorSeries& s = r.series[i];
        const std::string stem = "nu_" + std::to_string(i);
        CsvTable series{{"time", "err2", "grad_err2", "rho_err2"}, {}};
        for (std::size_t k = 0; k < s.times.size(); ++k)
            series.rows.push_back({num(s.times[k]), num(s.err2[k]), num(s.grad_err2[k]),
                                   s.rho_err2.empty() ? std::string() : num(s.rho_err2[k])});
        art.csv("series/" + stem + ".csv", series);
        const json m{{"run_id", id},
                     {"nu", row.nu},
                     {"epsilon", row.epsilon},
                     {"steps", row.steps},
                     {"dt", c.dt},
                     {"t_end", c.t_end},
                     {"data_class", to_string(c.data_class)},
                     {"seed", c.seed},
                     {"reference", closed_form ? "closed form" : "nu = 0 run"},
                     {"series", "series/" + stem + ".csv"},
                     {"series_sha256", art.sums["series/" + stem + ".csv"]}};
        art.text("runs/" + stem + ".json", m.dump(2) + "\n");
        t.rows.push_back({num(row.nu), num(row.sup_err2), num(row.grad_err2_int),
                          opt(row.rho_err2), "runs/" + stem + ".json"});
    }
    art.csv("sweep.csv", t);
    const SweepFits f = fit_sweep(r);
    const json fits{{"sup_err2", fit_json(f.sup)},
                    {"grad_err2_int", fit_json(f.grad)},
                    {"rho_err2", fit_json(f.rho)},
                    {"notes", f.notes}};
    art.text("fit.json", fits.dump(2) + "\n");
    out.diagnostics["fits"] = fits;
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
}

void epsilon_run(const ExperimentConfig& c, Artifacts& art, Outcome& out) {
    SweepConfig sc{c.solver(), c.threads};
    const EpsilonSweep e = epsilon_sweep(c.data(), c.nu, c.epsilons, sc);
    CsvTable t{{"epsilon", "sup_err2", "rho_err2", "weighted_dissipation", "initial_energy"}, {}};
    for (const SweepRow& row : e.table.rows)
        t.rows.push_back({num(row.epsilon), num(row.sup_err2), opt(row.rho_err2),
                          opt(row.weighted_dissipation), num(e.initial_energy)});
    art.csv("epsilon.csv", t);
    out.diagnostics["errors_decreasing"] = e.errors_decreasing;
    out.diagnostics["dissipation_bounded"] = e.dissipation_bounded;
    out.diagnostics["initial_energy"] = e.initial_energy;
    out.warnings.insert(out.warnings.end(), e.table.warnings.begin(), e.table.warnings.end());
}

template <class S>
void lagrangian_run(const ExperimentConfig& c, const S& initial, Artifacts& art, Outcome& out) {
    ParticleSet seeds = seed_particles(c.particles_interior, c.particles_per_wall, c.seed);
    CsvTable history{{"time", "max_det_deviation", "max_wall_drift"}, {}};
    history.rows.push_back({num(0.0), num(max_det_deviation(seeds)), num(max_wall_drift(seeds))});
    const auto run = run_lagrangian<S>(initial, solver_with_warnings(c, out.warnings), seeds,
                                       [&](const ParticleSet& p, const S&) {
                                           history.rows.push_back({num(p.time),
                                                                   num(max_det_deviation(p)),
                                                                   num(max_wall_drift(p))});
                                       });
    const ParticleSet& p = run.particles;
    VorticityState w_now, w0;
    std::vector<DensityResidual> dens;
    std::vector<double> cauchy;
    if constexpr (std::is_same_v<S, BoussinesqState>) {
        w_now = curl(run.final_state.vel);
        w0 = curl(initial.vel);
        cauchy = forced_cauchy_residual(p, w_now, w0);
        dens = density_gradient_residual(p, run.final_state.rho, initial.rho);
    } else {
        w_now = curl(run.final_state);
        w0 = curl(initial);
        cauchy = cauchy_residual(p, w_now, w0);
    }
    const std::vector<double> wmag = vorticity_magnitude(p, w_now);
    CsvTable t{{"particle_id", "alpha_x", "alpha_y", "alpha_z", "wall", "time", "x", "y", "z",
                "det_gradX", "cauchy_residual", "vorticity", "density_residual",
                "density_gradient_residual"},
               {}};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec3& a = p.alphas[i];
        const Vec3& x = p.positions[i];
        const bool wall = a.z() == 0.0 || a.z() == 1.0;
        t.rows.push_back({std::to_string(i), num(a.x()), num(a.y()), num(a.z()), wall ? "1" : "0",
                          num(p.time), num(x.x()), num(x.y()), num(x.z()),
                          num(p.grads[i].determinant()), num(cauchy[i]), num(wmag[i]),
                          dens.empty() ? std::string() : num(dens[i].value),
                          dens.empty() ? std::string() : num(dens[i].gradient)});
    }
    art.csv("particles.csv", t);
    art.csv("lagrangian_history.csv", history);
    out.diagnostics["particles"] = p.size();
    out.diagnostics["final_time"] = p.time;
}

void budget_run(const ExperimentConfig& c, const VelocityState& viscous,
                const VelocityState& reference, Artifacts& art, Outcome& out) {
    SolverConfig sv = solver_with_warnings(c, out.warnings);
    SolverConfig se = sv;
    se.nu = 0.0;
    Integrator<VelocityState> iv(sv), ie(se);
    VelocityState a = viscous, b = reference;
    Dissipation da, db;
    GronwallBudget g;
    const long steps = sv.steps();
    append(g, 0.0, budget_terms(a, b, c.nu));
    for (long n = 0; n < steps; ++n) {
        a = iv.step(a, n * c.dt, c.dt, da);
        b = ie.step(b, n * c.dt, c.dt, db);
        if ((n + 1) % c.snapshot_interval == 0) append(g, (n + 1) * c.dt, budget_terms(a, b, c.nu));
    }
    CsvTable t{{"time", "energy", "nonlinear", "interior", "boundary", "curvature", "dissipation"},
               {}};
    for (std::size_t i = 0; i < g.times.size(); ++i)
        t.rows.push_back({num(g.times[i]), num(g.energy[i]), num(g.nonlinear[i]),
                          num(g.interior[i]), num(g.boundary[i]), num(g.curvature[i]),
                          num(g.dissipation[i])});
    art.csv("budget.csv", t);
    close_budget(g);
    out.diagnostics["closure"] = g.closure;
    out.diagnostics["inequality_margin"] = g.inequality_margin;
}

void execute(const ExperimentConfig& c, const std::string& id, Artifacts& art, Outcome& out) {
    const bool density = c.data_class == DataKind::BoussinesqBlob;
    switch (c.experiment) {
        case ExperimentKind::SingleRun: {
            const InitialData d = scaled_data(c, c.nu);
            if (density) single_run(c, d.boussinesq_viscous(), art, out);
            else single_run(c, d.viscous, art, out);
            break;
        }
        case ExperimentKind::Sweep:
        case ExperimentKind::BoussinesqSweep: {
            SweepConfig sc{c.solver(), c.threads};
            auto make = [&](double nu) { return scaled_data(c, nu); };
            SweepResult r;
            if (c.amplitude == 1.0)
                r = density ? boussinesq_sweep(c.data(), c.nus, sc) : run_sweep(c.data(), c.nus, sc);
            else
                r = density ? boussinesq_sweep(make, c.nus, sc) : run_sweep(make, c.nus, sc);
            write_sweep(c, r, id, art, out);
            break;
        }
        case ExperimentKind::EpsilonSweep: epsilon_run(c, art, out); break;
        case ExperimentKind::LagrangianCheck: {
            const InitialData d = scaled_data(c, c.nu);
            if (density) lagrangian_run(c, d.boussinesq_viscous(), art, out);
            else lagrangian_run(c, d.viscous, art, out);
            break;
        }
        case ExperimentKind::Budget: {
            const InitialData d = scaled_data(c, c.nu);
            budget_run(c, d.viscous, d.reference, art, out);
            break;
        }
    }
}

fs::path choose_run_dir(const ExperimentConfig& c, const DispatchOptions& o, const std::string& id) {
    if (!o.output.empty()) return o.output;
    if (!c.output.empty()) return c.output;
    const fs::path base = o.output_root / id.substr(0, 12);
    fs::path dir = base;
    for (int k = 2; fs::exists(dir / "manifest.json"); ++k)
        dir = base.string() + "-" + std::to_string(k);
    return dir;
}

Check upper(const std::string& name, double value, double limit) {
    return {name, value, limit, value <= limit, ""};
}

Check lower(const std::string& name, double value, double limit) {
    return {name, value, limit, value >= limit, ""};
}

Check flag(const std::string& name, bool ok) {
    return {name, ok ? 1.0 : 0.0, 1.0, ok, ok ? "" : "property does not hold"};
}

}  // namespace

std::vector<Check> evaluate_checks(const ExperimentConfig& c, const fs::path& dir) {
    std::vector<Check> out;
    const auto& a = c.asserts;
    auto want = [&a](const char* k) { return a.count(k) ? std::optional(a.at(k)) : std::nullopt; };
    switch (c.experiment) {
        case ExperimentKind::SingleRun: {
            const CsvTable t = read_csv(dir / "series.csv");
            if (auto lim = want("max_divergence"))
                out.push_back(upper("max_divergence", max_finite(t.numbers("max_divergence")), *lim));
            if (auto lim = want("max_balance_residual")) {
                BalanceSeries s{t.numbers("time"), t.numbers("energy"), t.numbers("enstrophy"),
                                t.numbers("rho_gradient"), t.numbers("buoyancy")};
                const double r = c.data_class == DataKind::BoussinesqBlob
                                     ? boussinesq_balance_residual(s, c.nu, c.epsilon).residual
                                     : energy_balance_residual(s.times, s.energy, s.enstrophy, c.nu);
                out.push_back(upper("max_balance_residual", r, *lim));
            }
            break;
        }
        case ExperimentKind::Sweep:
        case ExperimentKind::BoussinesqSweep: {
            const CsvTable t = read_csv(dir / "sweep.csv");
            const auto nus = t.numbers("nu");
            auto fit = [&](const char* column) -> std::optional<RateFit> {
                const auto v = t.numbers(column);
                std::vector<std::pair<double, double>> pts;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (std::isnan(v[i]) || v[i] <= 0.0) return std::nullopt;
                    pts.emplace_back(nus[i], v[i]);
                }
                if (pts.size() < 4) return std::nullopt;
                return fit_rate(pts);
            };
            auto slope_check = [&](const char* key, const char* column, bool is_min) {
                auto lim = want(key);
                if (!lim) return;
                const auto f = fit(column);
                if (!f) {
                    out.push_back({key, std::numeric_limits<double>::quiet_NaN(), *lim, false,
                                   std::string(column) + " has zero or missing values; no rate"});
                    return;
                }
                out.push_back(is_min ? lower(key, f->slope, *lim) : upper(key, f->slope, *lim));
            };
            slope_check("min_sup_slope", "sup_err2", true);
            slope_check("max_sup_slope", "sup_err2", false);
            slope_check("min_grad_slope", "grad_err2_int", true);
            slope_check("min_rho_slope", "rho_err2", true);
            if (auto m = want("monotone"); m && *m != 0.0) {
                bool ok = true;
                for (const char* col : {"sup_err2", "grad_err2_int", "rho_err2"}) {
                    const auto v = t.numbers(col);
                    if (!has_values(v)) continue;
                    for (std::size_t i = 1; i < v.size(); ++i)
                        if (!(v[i] < v[i - 1])) ok = false;
                }
                out.push_back(flag("monotone", ok));
            }
            break;
        }
        case ExperimentKind::EpsilonSweep: {
            const CsvTable t = read_csv(dir / "epsilon.csv");
            if (auto m = want("errors_decreasing"); m && *m != 0.0) {
                const auto v = t.numbers("sup_err2"), r = t.numbers("rho_err2");
                bool ok = true;
                for (std::size_t i = 1; i < v.size(); ++i)
                    if (!(v[i] < v[i - 1]) || !(r[i] < r[i - 1])) ok = false;
                out.push_back(flag("errors_decreasing", ok));
            }
            if (auto m = want("dissipation_bounded"); m && *m != 0.0) {
                const auto w = t.numbers("weighted_dissipation"), e = t.numbers("initial_energy");
                double worst = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, w[i] - e[i]);
                Check ch = flag("dissipation_bounded", worst <= 0.0);
                ch.value = worst;
                ch.threshold = 0.0;
                ch.detail = "max of weighted dissipation minus initial energy";
                out.push_back(ch);
            }
            break;
        }
        case ExperimentKind::LagrangianCheck: {
            const CsvTable t = read_csv(dir / "particles.csv");
            const CsvTable h = read_csv(dir / "lagrangian_history.csv");
            if (auto lim = want("max_cauchy_residual"))
                out.push_back(upper("max_cauchy_residual", max_finite(t.numbers("cauchy_residual")), *lim));
            if (auto lim = want("max_wall_vorticity")) {
                const auto wall = t.numbers("wall"), w = t.numbers("vorticity");
                double m = 0.0;
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (wall[i] == 1.0) m = std::max(m, w[i]);
                out.push_back(upper("max_wall_vorticity", m, *lim));
            }
            if (auto lim = want("max_det_deviation"))
                out.push_back(upper("max_det_deviation", max_finite(h.numbers("max_det_deviation")), *lim));
            if (auto lim = want("max_wall_drift"))
                out.push_back(upper("max_wall_drift", max_finite(h.numbers("max_wall_drift")), *lim));
            if (auto lim = want("max_density_residual"))
                out.push_back(upper("max_density_residual", max_finite(t.numbers("density_residual")), *lim));
            if (auto lim = want("max_density_gradient_residual"))
                out.push_back(upper("max_density_gradient_residual",
                                    max_finite(t.numbers("density_gradient_residual")), *lim));
            break;
        }
        case ExperimentKind::Budget: {
            const CsvTable t = read_csv(dir / "budget.csv");
            GronwallBudget g;
            g.times = t.numbers("time");
            g.energy = t.numbers("energy");
            g.nonlinear = t.numbers("nonlinear");
            g.interior = t.numbers("interior");
            g.boundary = t.numbers("boundary");
            g.curvature = t.numbers("curvature");
            g.dissipation = t.numbers("dissipation");
            close_budget(g);
            if (auto lim = want("max_closure")) out.push_back(upper("max_closure", g.closure, *lim));
            if (auto lim = want("min_margin"))
                out.push_back(lower("min_margin", g.inequality_margin, *lim));
            if (auto lim = want("max_boundary")) {
                double m = 0.0;
                for (double b : g.boundary) m = std::max(m, std::abs(b));
                out.push_back(upper("max_boundary", m, *lim));
            }
            break;
        }
    }
    return out;
}

DispatchResult dispatch(ExperimentConfig c, const DispatchOptions& o, std::ostream& log) {
    DispatchResult res;
    auto refuse = [&](std::string msg) {
        res.exit_code = kExitValidation;
        res.error = std::move(msg);
        log << "error: " << res.error << "\n";
        return res;
    };
    if (o.seed) c.seed = *o.seed;
    if (o.threads) {
        if (*o.threads < 1) return refuse("threads: must be >= 1");
        c.threads = *o.threads;
    }
    if (o.strict) c.strict_cfl = true;
    const std::string id = run_id(c);

    if (o.strict && (c.experiment == ExperimentKind::Sweep ||
                     c.experiment == ExperimentKind::BoussinesqSweep)) {
        const auto w = sweep_warnings(c.nus, c.grid());
        if (!w.empty()) {
            res.warnings = w;
            return refuse("strict mode: " + w.front());
        }
    }

    res.run_dir = choose_run_dir(c, o, id);
    if (fs::exists(res.run_dir / "manifest.json"))
        return refuse("refusing to overwrite the manifest in " + res.run_dir.string());
    fs::create_directories(res.run_dir);

    json m;
    m["schema_version"] = kConfigSchemaVersion;
    m["run_id"] = id;
    m["tool_version"] = kToolVersion;
    m["config_text"] = canonical_text(c);
    json cfg = json::object();
    {
        std::istringstream lines(canonical_text(c));
        std::string line;
        while (std::getline(lines, line)) {
            const auto eq = line.find(" = ");
            cfg[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    m["config"] = cfg;
    m["inputs"] = {{"config", o.config_path}};
    m["seed"] = c.seed;
    m["threads"] = c.threads;
    m["strict"] = o.strict;
    m["started"] = utc_now();
    log << "run " << id.substr(0, 12) << " (" << to_string(c.experiment) << ", "
        << to_string(c.data_class) << ") -> " << res.run_dir.string() << "\n";

    Artifacts art{res.run_dir, {}};
    Outcome out;
    std::string status = "ok";
    try {
        execute(c, id, art, out);
    } catch (const BlowUpError& e) {
        res.exit_code = kExitRuntime;
        res.error = e.what();
        m["abort_time"] = e.time();
        status = "aborted";
    } catch (const SweepError& e) {
        res.exit_code = kExitRuntime;
        res.error = e.what();
        m["failed_nus"] = e.failed();
        status = "aborted";
    } catch (const ValidationError& e) {
        res.exit_code = kExitValidation;
        res.error = e.what();
        status = "invalid";
    } catch (const std::exception& e) {
        res.exit_code = kExitRuntime;
        res.error = e.what();
        status = "aborted";
    }
    res.warnings = out.warnings;
    if (res.exit_code == kExitOk) {
        res.checks = evaluate_checks(c, res.run_dir);
        const bool ok = std::all_of(res.checks.begin(), res.checks.end(),
                                    [](const Check& k) { return k.passed; });
        if (!ok) {
            res.exit_code = kExitAcceptance;
            status = "acceptance-failed";
        }
        if (o.strict && !res.warnings.empty() && res.exit_code == kExitOk) {
            res.exit_code = kExitValidation;
            res.error = "strict mode: " + res.warnings.front();
            status = "invalid";
        }
    }
    m["finished"] = utc_now();
    m["status"] = status;
    m["exit_code"] = res.exit_code;
    if (!res.error.empty()) m["error"] = res.error;
    m["outputs"] = art.sums;
    m["diagnostics"] = out.diagnostics;
    m["checks"] = checks_json(res.checks);
    m["warnings"] = res.warnings;
    std::ofstream(res.run_dir / "manifest.json") << m.dump(2) << "\n";

    for (const auto& w : res.warnings) log << "warning: " << w << "\n";
    for (const Check& k : res.checks)
        log << (k.passed ? "PASS " : "FAIL ") << k.name << " = " << num(k.value) << " (limit "
            << num(k.threshold) << ")" << (k.detail.empty() ? "" : " " + k.detail) << "\n";
    if (!res.error.empty()) log << "error: " << res.error << "\n";
    log << "status " << status << ", exit " << res.exit_code << "\n";
    return res;
}

VerifyReport verify_run(const fs::path& dir) {
    VerifyReport r;
    json m;
    {
        std::ifstream in(dir / "manifest.json");
        if (!in) {
            r.problems.push_back("manifest.json: missing");
            r.exit_code = kExitRuntime;
            return r;
        }
        try {
            in >> m;
        } catch (const json::exception& e) {
            r.problems.push_back(std::string("manifest.json: corrupt (") + e.what() + ")");
            r.exit_code = kExitRuntime;
            return r;
        }
    }
    const json outputs = m.value("outputs", json::object());
    for (const auto& [name, sum] : outputs.items()) {
        const fs::path p = dir / name;
        if (!fs::exists(p)) {
            r.problems.push_back(name + ": missing");
            continue;
        }
        if (sha256_file(p) != sum.get<std::string>())
            r.problems.push_back(name + ": checksum mismatch (corrupt or modified)");
    }
    const std::string status = m.value("status", "");
    if (status != "ok" && status != "acceptance-failed")
        r.problems.push_back("run did not complete (status " + status + ")");
    else {
        try {
            const ExperimentConfig c = parse_config_text(m.at("config_text").get<std::string>());
            r.checks = evaluate_checks(c, dir);
        } catch (const std::exception& e) {
            r.problems.push_back(std::string("re-evaluation failed: ") + e.what());
        }
    }
    const bool checks_ok = std::all_of(r.checks.begin(), r.checks.end(),
                                       [](const Check& k) { return k.passed; });
    r.exit_code = !r.problems.empty() ? kExitRuntime : (checks_ok ? kExitOk : kExitAcceptance);
    return r;
}

std::vector<ReportRow> report_sweeps(const std::vector<fs::path>& dirs) {
    std::vector<ReportRow> out;
    for (const fs::path& dir : dirs) {
        ReportRow row;
        row.run_dir = dir;
        std::ifstream in(dir / "manifest.json");
        if (!in) throw std::runtime_error(dir.string() + ": no manifest.json");
        json m;
        in >> m;
        const ExperimentConfig c = parse_config_text(m.at("config_text").get<std::string>());
        if (c.experiment != ExperimentKind::Sweep && c.experiment != ExperimentKind::BoussinesqSweep)
            throw std::runtime_error(dir.string() + ": not a viscosity sweep");
        row.experiment = std::string(to_string(c.experiment));
        row.data_class = std::string(to_string(c.data_class));
        row.perturbation_r = c.perturbation_r;
        const CsvTable t = read_csv(dir / "sweep.csv");
        row.rows = t.rows.size();
        const auto nus = t.numbers("nu");
        auto fit = [&](const char* column) -> std::optional<RateFit> {
            const auto v = t.numbers(column);
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (std::isnan(v[i])) return std::nullopt;
                if (v[i] <= 0.0) {
                    row.notes.push_back(std::string(column) + ": exact coincidence");
                    return std::nullopt;
                }
                pts.emplace_back(nus[i], v[i]);
            }
            if (pts.size() < 4) return std::nullopt;
            return fit_rate(pts);
        };
        row.sup = fit("sup_err2");
        row.grad = fit("grad_err2_int");
        row.rho = fit("rho_err2");
        // Wall vorticity in the data lowers the rate to nu^(3/2); the data
        // difference nu^r caps it at nu^(2r).
        row.expected_sup = c.data_class == DataKind::GenericBoundaryVorticity ? 1.5 : 2.0;
        if (c.perturbation_r) row.expected_sup = std::min(row.expected_sup, 2.0 * *c.perturbation_r);
        row.expected_grad = row.expected_sup - 1.0;
        out.push_back(std::move(row));
    }
    return out;
}

void print_report(const std::vector<ReportRow>& rows, std::ostream& out) {
    auto cell = [](const std::optional<RateFit>& f) {
        return f ? format_double(std::round(f->slope * 1000.0) / 1000.0) : std::string("-");
    };
    out << "run,experiment,data_class,r,rows,sup_slope,expected_sup,grad_slope,expected_grad,"
           "rho_slope,status\n";
    for (const ReportRow& r : rows) {
        const bool ok = (!r.sup || r.sup->slope >= r.expected_sup - 0.1) &&
                        (!r.grad || r.grad->slope >= r.expected_grad - 0.1) &&
                        (!r.rho || r.rho->slope >= r.expected_sup - 0.1);
        out << r.run_dir.filename().string() << "," << r.experiment << "," << r.data_class << ","
            << (r.perturbation_r ? format_double(*r.perturbation_r) : "-") << "," << r.rows << ","
            << cell(r.sup) << "," << format_double(r.expected_sup) << "," << cell(r.grad) << ","
            << format_double(r.expected_grad) << "," << cell(r.rho) << ","
            << (ok ? "at or above expected" : "below expected") << "\n";
    }
}

}  // namespace navslip
