#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "navslip/fields.hpp"
#include "navslip/spectral.hpp"
#include "navslip/state.hpp"

namespace navslip {

/// Raised in strict mode when the advective CFL advisory is violated.
class CflError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    Grid grid = Grid::cube(32);
    double nu = 0.0;
    double epsilon = 0.0;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_interval = 1;
    /// Optional body force f(t); projected onto divergence-free fields at every stage.
    std::function<VelocityState(double)> forcing;
    /// When false the advective terms are dropped (diffusion, buoyancy and forcing remain).
    bool advection = true;
    /// Turns the CFL advisory into a CflError.
    bool strict_cfl = false;
    /// Receives warnings; stderr when empty.
    std::function<void(const std::string&)> on_warning;

    /// Collects every problem and throws ValidationError.
    void validate() const;
    /// Number of steps to reach t_end; the last step is shortened when
    /// t_end is not a multiple of dt.
    long steps() const;
};

/// Running time integrals carried alongside the state.
struct Dissipation {
    double enstrophy = 0.0;     // int ||curl v||^2
    double rho_gradient = 0.0;  // int ||grad rho||^2
    double buoyancy = 0.0;      // int (int rho v3 dx)
    double forcing_work = 0.0;  // int (int f . v dx)
};

template <class S>
struct Snapshot {
    double time;
    S state;
    Dissipation integrals;
};

template <class S>
struct Trajectory {
    SolverConfig config;
    std::vector<Snapshot<S>> snapshots;
};

/// P[u x omega] + nu laplacian(u), products dealiased.
VelocityState nse_rhs(const VelocityState& v, double nu);
/// Momentum: nse_rhs + P[-rho e3]. Density: -1/2(v.grad rho + div(v rho)) + eps laplacian(rho).
BoussinesqState boussinesq_rhs(const BoussinesqState& s, double nu, double epsilon);

/// (exp(-nu pi^2 t) cos(pi z), 0, 0)
VelocityState exact_shear_solution(double t, double nu, const Grid& grid);

/// Integrating-factor RK4: the diffusion terms are integrated exactly per
/// mode and the remaining terms by classical RK4.
template <class S>
class Integrator {
public:
    explicit Integrator(SolverConfig config);

    const SolverConfig& config() const { return config_; }

    /// Advances s from t by h, adding the stage-weighted integrals to acc.
    /// Throws BlowUpError on non-finite coefficients and CflError in strict mode.
    S step(const S& s, double t, double h, Dissipation& acc);

    /// Snapshots every snapshot_interval steps, including t = 0 and t_end.
    Trajectory<S> integrate(const S& initial);
    /// Streams snapshots to the observer instead of storing them.
    void integrate(const S& initial,
                   const std::function<void(double, const S&, const Dissipation&)>& observer);

private:
    struct Factors {
        double h = -1.0;
        std::vector<double> nu_full, nu_half, eps_full, eps_half;
    };
    void prepare(double h);
    void warn(const std::string& msg) const;

    SolverConfig config_;
    Factors f_;
    bool cfl_warned_ = false;
};

extern template class Integrator<VelocityState>;
extern template class Integrator<BoussinesqState>;

/// Convenience wrappers.
VelocityState step(const VelocityState& s, const SolverConfig& config);
BoussinesqState step(const BoussinesqState& s, const SolverConfig& config);
Trajectory<VelocityState> integrate(const VelocityState& initial, const SolverConfig& config);
Trajectory<BoussinesqState> integrate(const BoussinesqState& initial, const SolverConfig& config);

}  // namespace navslip
