#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "navslip/errors.hpp"
#include "navslip/io.hpp"

namespace navslip {

std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SingleRun: return "single-run";
        case ExperimentKind::Sweep: return "sweep";
        case ExperimentKind::BoussinesqSweep: return "boussinesq-sweep";
        case ExperimentKind::EpsilonSweep: return "epsilon-sweep";
        case ExperimentKind::LagrangianCheck: return "lagrangian-check";
        case ExperimentKind::Budget: return "budget";
    }
    return "?";
}

bool is_sweep(ExperimentKind k) {
    return k == ExperimentKind::Sweep || k == ExperimentKind::BoussinesqSweep ||
           k == ExperimentKind::EpsilonSweep;
}

DataClass ExperimentConfig::data() const {
    DataClass d;
    d.kind = data_class;
    d.seed = seed;
    if (perturbation_r) d.perturbation = Perturbation{*perturbation_r, perturbation_pattern};
    return d;
}

SolverConfig ExperimentConfig::solver() const {
    SolverConfig c;
    c.grid = grid();
    c.nu = nu;
    c.epsilon = epsilon;
    c.dt = dt;
    c.t_end = t_end;
    c.snapshot_interval = snapshot_interval;
    c.advection = advection;
    c.strict_cfl = strict_cfl;
    return c;
}

namespace {

const std::vector<double> kDefaultNus{1e-2, 5e-3, 2.5e-3, 1.25e-3};
const std::vector<double> kDefaultEpsilons{1e-2, 1e-3, 1e-4};

// Threshold names accepted per experiment.
const std::map<ExperimentKind, std::set<std::string>> kAsserts{
    {ExperimentKind::SingleRun, {"max_balance_residual", "max_divergence"}},
    {ExperimentKind::Sweep, {"min_sup_slope", "max_sup_slope", "min_grad_slope", "monotone"}},
    {ExperimentKind::BoussinesqSweep,
     {"min_sup_slope", "max_sup_slope", "min_grad_slope", "min_rho_slope", "monotone"}},
    {ExperimentKind::EpsilonSweep, {"errors_decreasing", "dissipation_bounded"}},
    {ExperimentKind::LagrangianCheck,
     {"max_cauchy_residual", "max_wall_vorticity", "max_det_deviation", "max_wall_drift",
      "max_density_residual", "max_density_gradient_residual"}},
    {ExperimentKind::Budget, {"max_closure", "min_margin", "max_boundary"}},
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

template <class I>
std::optional<I> to_integer(const std::string& s) {
    I v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<bool> to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    return std::nullopt;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = to_double(trim(item));
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::optional<ExperimentKind> to_experiment(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::SingleRun, ExperimentKind::Sweep,
                             ExperimentKind::BoussinesqSweep, ExperimentKind::EpsilonSweep,
                             ExperimentKind::LagrangianCheck, ExperimentKind::Budget})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

void check_list(const std::vector<double>& v, const char* key, std::size_t min_count,
                bool allow_zero, std::vector<std::string>& errors) {
    if (v.size() < min_count)
        errors.push_back(std::string(key) + ": need at least " + std::to_string(min_count) +
                         " values, got " + std::to_string(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0.0 || (!allow_zero && v[i] == 0.0)) {
            errors.push_back(std::string(key) + ": values must be " +
                             (allow_zero ? ">= 0" : "> 0"));
            break;
        }
    }
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) {
            errors.push_back(std::string(key) + ": values must be strictly decreasing");
            break;
        }
}

void validate(ExperimentConfig& c, const std::set<std::string>& given,
              std::vector<std::string>& errors) {
    try {
        (void)c.grid();
    } catch (const std::invalid_argument& e) {
        errors.push_back(std::string("grid: ") + e.what());
    }
    if (!(c.dt > 0.0)) errors.push_back("dt: must be > 0");
    if (!(c.t_end > 0.0)) errors.push_back("t_end: must be > 0");
    if (c.snapshot_interval < 1) errors.push_back("snapshot_interval: must be >= 1");
    if (c.nu < 0.0) errors.push_back("nu: must be >= 0");
    if (c.epsilon < 0.0) errors.push_back("epsilon: must be >= 0");
    if (c.perturbation_r && *c.perturbation_r < 0.0) errors.push_back("perturbation_r: must be >= 0");
    if (c.threads < 1) errors.push_back("threads: must be >= 1");
    if (c.particles_interior < 0) errors.push_back("particles_interior: must be >= 0");
    if (c.particles_per_wall < 0) errors.push_back("particles_per_wall: must be >= 0");

    const bool density = c.data_class == DataKind::BoussinesqBlob;
    switch (c.experiment) {
        case ExperimentKind::Sweep:
            if (density) errors.push_back("data_class: BoussinesqBlob needs experiment = boussinesq-sweep");
            break;
        case ExperimentKind::BoussinesqSweep:
        case ExperimentKind::EpsilonSweep:
            if (!density)
                errors.push_back("data_class: " + std::string(to_string(c.experiment)) +
                                 " needs BoussinesqBlob");
            break;
        case ExperimentKind::Budget:
            if (density) errors.push_back("data_class: budget runs take velocity-only classes");
            break;
        case ExperimentKind::LagrangianCheck:
            if (c.particles_interior + c.particles_per_wall == 0)
                errors.push_back("particles_interior: no particles to track");
            break;
        case ExperimentKind::SingleRun: break;
    }

    if (c.experiment == ExperimentKind::Sweep || c.experiment == ExperimentKind::BoussinesqSweep) {
        if (!given.count("nus")) c.nus = kDefaultNus;
        check_list(c.nus, "nus", 4, false, errors);
    } else if (given.count("nus")) {
        errors.push_back("nus: only used by sweep and boussinesq-sweep");
    }
    if (c.experiment == ExperimentKind::EpsilonSweep) {
        if (!given.count("epsilons")) c.epsilons = kDefaultEpsilons;
        check_list(c.epsilons, "epsilons", 3, true, errors);
        if (!(c.nu > 0.0)) errors.push_back("nu: epsilon sweeps need nu > 0");
    } else if (given.count("epsilons")) {
        errors.push_back("epsilons: only used by epsilon-sweep");
    }

    if (c.dt > 0.0 && c.t_end > 0.0) {
        const double r = c.t_end / c.dt;
        const double n = std::round(r);
        const bool whole = std::abs(r - n) <= 1e-9 * std::max(1.0, r);
        if (is_sweep(c.experiment)) {
            if (!whole) errors.push_back("t_end: must be a whole number of dt steps for sweeps");
            else if (n < 100) errors.push_back("t_end: sweeps need at least 100 steps");
        } else if (!whole) {
            errors.push_back("t_end: must be a whole number of dt steps");
        } else if (c.snapshot_interval >= 1) {
            const long steps = static_cast<long>(n);
            if (steps % c.snapshot_interval != 0)
                errors.push_back("snapshot_interval: must divide the step count " +
                                 std::to_string(steps));
            else if (c.experiment != ExperimentKind::LagrangianCheck &&
                     steps / c.snapshot_interval < 2)
                errors.push_back("snapshot_interval: need at least 3 snapshots");
        }
    }

    const auto& allowed = kAsserts.at(c.experiment);
    for (const auto& [name, value] : c.asserts) {
        if (!allowed.count(name)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            errors.push_back("assert." + name + ": not available for " +
                             std::string(to_string(c.experiment)) + " (allowed: " + list + ")");
        }
        (void)value;
    }
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
    ExperimentConfig c;
    std::vector<std::string> errors;
    std::set<std::string> given;
    std::optional<int> version;
    std::optional<int> n_all;
    bool have_experiment = false;

    using Setter = std::function<bool(const std::string&)>;
    auto dbl = [](double& field) -> Setter {
        return [&field](const std::string& v) {
            auto d = to_double(v);
            if (d) field = *d;
            return d.has_value();
        };
    };
    auto integer = [](int& field) -> Setter {
        return [&field](const std::string& v) {
            auto d = to_integer<int>(v);
            if (d) field = *d;
            return d.has_value();
        };
    };
    auto u64 = [](std::uint64_t& field) -> Setter {
        return [&field](const std::string& v) {
            auto d = to_integer<std::uint64_t>(v);
            if (d) field = *d;
            return d.has_value();
        };
    };
    auto boolean = [](bool& field) -> Setter {
        return [&field](const std::string& v) {
            auto d = to_bool(v);
            if (d) field = *d;
            return d.has_value();
        };
    };
    auto list = [](std::vector<double>& field) -> Setter {
        return [&field](const std::string& v) {
            auto d = to_list(v);
            if (d) field = *d;
            return d.has_value();
        };
    };

    const std::map<std::string, Setter> setters{
        {"schema_version",
         [&](const std::string& v) {
             auto d = to_integer<int>(v);
             if (d) version = *d;
             return d.has_value();
         }},
        {"experiment",
         [&](const std::string& v) {
             auto k = to_experiment(v);
             if (k) {
                 c.experiment = *k;
                 have_experiment = true;
             }
             return k.has_value();
         }},
        {"n",
         [&](const std::string& v) {
             auto d = to_integer<int>(v);
             if (d) n_all = *d;
             return d.has_value();
         }},
        {"nx", integer(c.nx)},
        {"ny", integer(c.ny)},
        {"nz", integer(c.nz)},
        {"dt", dbl(c.dt)},
        {"t_end", dbl(c.t_end)},
        {"snapshot_interval", integer(c.snapshot_interval)},
        {"nu", dbl(c.nu)},
        {"epsilon", dbl(c.epsilon)},
        {"nus", list(c.nus)},
        {"epsilons", list(c.epsilons)},
        {"data_class",
         [&](const std::string& v) {
             try {
                 c.data_class = parse_data_kind(v);
                 return true;
             } catch (const std::invalid_argument&) {
                 return false;
             }
         }},
        {"perturbation_r",
         [&](const std::string& v) {
             auto d = to_double(v);
             if (d) c.perturbation_r = *d;
             return d.has_value();
         }},
        {"perturbation_pattern", u64(c.perturbation_pattern)},
        {"seed", u64(c.seed)},
        {"amplitude", dbl(c.amplitude)},
        {"advection", boolean(c.advection)},
        {"strict_cfl", boolean(c.strict_cfl)},
        {"particles_interior", integer(c.particles_interior)},
        {"particles_per_wall", integer(c.particles_per_wall)},
        {"threads", integer(c.threads)},
        {"output",
         [&](const std::string& v) {
             c.output = v;
             return true;
         }},
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no);
        if (eq == std::string::npos) {
            errors.push_back(where + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!given.insert(key).second) {
            errors.push_back(key + ": given more than once (" + where + ")");
            continue;
        }
        if (key.rfind("assert.", 0) == 0) {
            const std::string name = key.substr(7);
            if (auto b = to_bool(value); b && (value == "true" || value == "false"))
                c.asserts[name] = *b ? 1.0 : 0.0;
            else if (auto d = to_double(value))
                c.asserts[name] = *d;
            else
                errors.push_back(key + ": expected a number or true/false, got '" + value + "'");
            continue;
        }
        const auto it = setters.find(key);
        if (it == setters.end()) {
            errors.push_back(key + ": unknown key (" + where + ")");
            continue;
        }
        if (!it->second(value)) errors.push_back(key + ": invalid value '" + value + "'");
    }

    if (!version) {
        errors.push_back("schema_version: missing (this tool reads schema_version = " +
                         std::to_string(kConfigSchemaVersion) + ")");
    } else if (*version != kConfigSchemaVersion) {
        errors.push_back("schema_version: " + std::to_string(*version) +
                         " is not supported; this tool reads version " +
                         std::to_string(kConfigSchemaVersion) +
                         ". Migration: check the key list in docs/config_format.md, rename or "
                         "drop keys it does not list, then set schema_version = " +
                         std::to_string(kConfigSchemaVersion));
    }
    if (!have_experiment && !given.count("experiment"))
        errors.push_back("experiment: missing (one of single-run, sweep, boussinesq-sweep, "
                         "epsilon-sweep, lagrangian-check, budget)");
    if (n_all) {
        if (!given.count("nx")) c.nx = *n_all;
        if (!given.count("ny")) c.ny = *n_all;
        if (!given.count("nz")) c.nz = *n_all;
    }
    validate(c, given, errors);
    if (!errors.empty()) throw ValidationError(errors);
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"config: cannot read " + path.string()});
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config_text(s.str());
}

std::string canonical_text(const ExperimentConfig& c) {
    std::map<std::string, std::string> kv{
        {"schema_version", std::to_string(kConfigSchemaVersion)},
        {"experiment", std::string(to_string(c.experiment))},
        {"nx", std::to_string(c.nx)},
        {"ny", std::to_string(c.ny)},
        {"nz", std::to_string(c.nz)},
        {"dt", format_double(c.dt)},
        {"t_end", format_double(c.t_end)},
        {"snapshot_interval", std::to_string(c.snapshot_interval)},
        {"nu", format_double(c.nu)},
        {"epsilon", format_double(c.epsilon)},
        {"data_class", std::string(to_string(c.data_class))},
        {"perturbation_pattern", std::to_string(c.perturbation_pattern)},
        {"seed", std::to_string(c.seed)},
        {"amplitude", format_double(c.amplitude)},
        {"advection", c.advection ? "true" : "false"},
        {"strict_cfl", c.strict_cfl ? "true" : "false"},
        {"particles_interior", std::to_string(c.particles_interior)},
        {"particles_per_wall", std::to_string(c.particles_per_wall)},
    };
    if (!c.nus.empty()) kv["nus"] = join(c.nus);
    if (!c.epsilons.empty()) kv["epsilons"] = join(c.epsilons);
    if (c.perturbation_r) kv["perturbation_r"] = format_double(*c.perturbation_r);
    for (const auto& [name, value] : c.asserts) kv["assert." + name] = format_double(value);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string run_id(const ExperimentConfig& c) { return sha256_hex(canonical_text(c)); }

}  // namespace navslip
