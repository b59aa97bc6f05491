#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "navslip/dynamics.hpp"
#include "navslip/fields.hpp"
#include "navslip/state.hpp"

namespace navslip {

enum class DataKind { Shear, InteriorBlob, GenericBoundaryVorticity, BoussinesqBlob };

std::string_view to_string(DataKind k);
/// Accepts the enumerator names; throws std::invalid_argument otherwise.
DataKind parse_data_kind(std::string_view name);

/// u0^nu = u0^E + nu^r w with w a unit-norm divergence-free pattern
/// orthogonal to u0^E (and likewise for the density of BoussinesqBlob).
struct Perturbation {
    double r = 1.0;
    std::uint64_t pattern = 1;
};

struct DataClass {
    DataKind kind = DataKind::Shear;
    std::optional<Perturbation> perturbation;
    std::uint64_t seed = 1;  // horizontal structure of the blob classes
};

/// A class invariant failed after construction.
class DataClassError : public std::runtime_error {
public:
    DataClassError(std::string invariant, double measured);
    const std::string& invariant() const noexcept { return invariant_; }
    double measured() const noexcept { return measured_; }

private:
    std::string invariant_;
    double measured_;
};

struct InitialData {
    VelocityState reference, viscous;
    std::optional<SpectralScalar> rho_reference, rho_viscous;

    bool has_density() const { return rho_reference.has_value(); }
    BoussinesqState boussinesq_reference() const;
    BoussinesqState boussinesq_viscous() const;
};

/// Blob velocity curl(Q grad_h^perp phi) with Q = sin^(2m+1)(pi z) and phi a
/// random horizontal field of wavenumbers up to kBlobBand. omega3 vanishes
/// identically and omega1, omega2 are odd, so omega0 = 0 on the walls.
inline constexpr int kBlobPower = 0;
inline constexpr int kBlobBand = 1;

/// Builds the reference (Euler) and viscous data of a class and checks its
/// invariants. Throws DataClassError naming the failed invariant.
InitialData make_initial_data(const DataClass& cls, double nu, const Grid& grid);

/// Unit-norm divergence-free low-mode pattern for the given id.
VelocityState perturbation_pattern(std::uint64_t pattern, const Grid& grid);
/// Unit-norm Odd scalar pattern for the density.
SpectralScalar density_pattern(std::uint64_t pattern, const Grid& grid);

struct SweepConfig {
    /// Grid, dt and t_end are shared by all runs; nu and epsilon are set per run.
    SolverConfig solver;
    /// Worker threads stepping the runs of a sweep concurrently.
    int threads = 1;
};

/// Per-run time series sampled after every step.
struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> err2;       // ||u^nu - u^E||^2
    std::vector<double> grad_err2;  // ||grad(u^nu - u^E)||^2
    std::vector<double> rho_err2;   // ||rho^nu - rho^E||^2, density runs only
};

struct SweepRow {
    double nu = 0.0;
    double epsilon = 0.0;
    double sup_err2 = 0.0;
    double grad_err2_int = 0.0;
    std::optional<double> rho_err2;
    /// epsilon * int ||grad rho||^2, epsilon sweeps only
    std::optional<double> weighted_dissipation;
    long steps = 0;
};

struct SweepResult {
    DataKind kind = DataKind::Shear;
    SolverConfig solver;  // shared settings; nu and epsilon are per row
    std::vector<SweepRow> rows;
    std::vector<ErrorSeries> series;  // parallel to rows
    std::vector<std::string> warnings;
};

/// Any run blew up; lists the offending viscosities.
class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& what, std::vector<double> failed)
        : std::runtime_error(what), failed_(std::move(failed)) {}
    const std::vector<double>& failed() const noexcept { return failed_; }

private:
    std::vector<double> failed_;
};

/// Advisories for a viscosity list: nu below (pi/nz)^2 and a span of fewer
/// than two decades. Sweeps attach them to their result.
std::vector<std::string> sweep_warnings(std::span<const double> nus, const Grid& grid);

/// Vanishing-viscosity sweep. One Euler reference (closed form for Shear)
/// is stepped in lockstep with the viscous runs, and the error norms are
/// recorded after every step. Requires >= 4 strictly decreasing positive
/// viscosities and t_end = k dt with k >= 100.
SweepResult run_sweep(const DataClass& cls, std::span<const double> nus,
                      const SweepConfig& config);
/// Same for arbitrary data: make(nu) returns the reference and viscous states.
SweepResult run_sweep(const std::function<InitialData(double)>& make,
                      std::span<const double> nus, const SweepConfig& config);

/// Boussinesq sweep against the nu = epsilon = 0 reference; the viscous runs
/// transport the density without diffusion.
SweepResult boussinesq_sweep(const DataClass& cls, std::span<const double> nus,
                             const SweepConfig& config);
SweepResult boussinesq_sweep(const std::function<InitialData(double)>& make,
                             std::span<const double> nus, const SweepConfig& config);

struct EpsilonSweep {
    SweepResult table;  // rows keyed by epsilon; sup_err2 is the velocity error
    double nu = 0.0;
    double initial_energy = 0.0;  // 1/2(||v0||^2 + ||rho0||^2)
    bool errors_decreasing = false;
    bool dissipation_bounded = false;
};

/// Runs with diffusivities epsilon compared with the epsilon = 0 run at the
/// same nu. Requires >= 3 strictly decreasing nonnegative epsilons.
EpsilonSweep epsilon_sweep(const DataClass& cls, double nu, std::span<const double> epsilons,
                           const SweepConfig& config);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int count = 0;
};

/// Least squares of log(value) against log(nu). Needs >= 4 points and
/// positive values; throws std::invalid_argument otherwise.
RateFit fit_rate(std::span<const std::pair<double, double>> points);

/// Fits of the sweep columns. A column with a zero entry is not fitted and
/// reported as an exact coincidence instead.
struct SweepFits {
    std::optional<RateFit> sup, grad, rho;
    std::vector<std::string> notes;
};
SweepFits fit_sweep(const SweepResult& result);

/// Terms of the energy budget of w = u^nu - u^E,
///   d/dt 1/2||w||^2 = -N + I + B + C - D,
/// N = int (w.grad)u^E . w, I = nu int lap(u^E) . w,
/// B = nu int_walls (omega^E x n) . w, C the curvature term (zero on flat
/// walls), D = nu ||grad w||^2.
struct GronwallBudget {
    std::vector<double> times, energy, nonlinear, interior, boundary, curvature, dissipation;
    /// max_t |1/2||w(t)||^2 - 1/2||w(0)||^2 - int_0^t (-N + I + B + C - D)|
    double closure = 0.0;
    /// min_t of ||w0||^2 - (||w||^2 + nu int ||grad w||^2 - 2 int (-N + I + B + C));
    /// nonnegative when the energy inequality holds.
    double inequality_margin = 0.0;
};

/// Budget terms at one instant.
struct BudgetTerms {
    double energy = 0.0, nonlinear = 0.0, interior = 0.0, boundary = 0.0, curvature = 0.0,
           dissipation = 0.0;
};
/// Throws GridMismatchError on different grids and std::runtime_error when a
/// boundary term exceeds 1e-12.
BudgetTerms budget_terms(const VelocityState& viscous, const VelocityState& reference, double nu);
/// Appends one instant to the series.
void append(GronwallBudget& b, double time, const BudgetTerms& terms);
/// Fills closure and inequality_margin from the series (>= 3 uniform times).
void close_budget(GronwallBudget& b);

/// Throws std::invalid_argument on mismatched snapshot times or grids, and
/// std::runtime_error when a boundary term exceeds 1e-12.
GronwallBudget gronwall_budget(const Trajectory<VelocityState>& viscous,
                               const Trajectory<VelocityState>& reference, double nu);

}  // namespace navslip
