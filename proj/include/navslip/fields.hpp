#pragma once

#include <span>
#include <vector>

#include "navslip/spectral.hpp"
#include "navslip/state.hpp"

namespace navslip {

/// Vorticity of a velocity field, parities (Odd, Odd, Even).
VorticityState curl(const VelocityState& v);
/// Curl of a vorticity-parity field back to velocity parities.
VelocityState curl(const VorticityState& w);

/// L2 inner product over the channel, computed from coefficients (Parseval).
double inner(const SpectralScalar& a, const SpectralScalar& b);
double inner(const VelocityState& a, const VelocityState& b);
double inner(const VorticityState& a, const VorticityState& b);

double l2_norm(const SpectralScalar& f);
double l2_norm(const VelocityState& v);
double l2_norm(const VorticityState& w);
/// sqrt(||v||^2 + ||rho||^2)
double l2_norm(const BoussinesqState& s);

/// ||grad f||^2 of a scalar using the derivative() conventions.
double gradient_norm_sq(const SpectralScalar& f);
/// L2 norm of the full velocity gradient tensor.
double h1_seminorm(const VelocityState& v);

/// int grad u : grad phi - int curl u . curl phi. Vanishes for
/// divergence-free fields obeying the slip conditions on the flat channel.
double ibp_residual(const VelocityState& u, const VelocityState& phi);

/// Samples of a vorticity field on the two wall planes (nx*ny each, ix fastest).
struct WallTrace {
    std::vector<double> w1_bottom, w2_bottom, w1_top, w2_top;  // tangential
    std::vector<double> w3_bottom, w3_top;                       // normal
    /// max |w1|, |w2| over both walls
    double max_tangential() const;
    double max_normal() const;
    /// sqrt of the sum over both walls of int |w3|^2 dS
    double normal_l2(const Grid& g) const;
};

WallTrace boundary_vorticity_trace(const VorticityState& w);

/// Fourth-order cumulative integral on uniformly spaced samples: composite
/// Simpson at even indices, Simpson plus a closing 3/8 panel at odd indices,
/// and the cubic through the first four samples for the first interval.
/// Throws std::invalid_argument for fewer than 3 samples or non-uniform times.
std::vector<double> cumulative_integral(std::span<const double> times,
                                        std::span<const double> values);

struct TimedVelocity {
    double time;
    VelocityState state;
};
struct TimedBoussinesq {
    double time;
    BoussinesqState state;
};

/// max_t |1/2||u(t)||^2 + nu int_0^t ||curl u||^2 - 1/2||u(0)||^2|.
double energy_balance_residual(std::span<const TimedVelocity> trajectory, double nu);
/// Same balance on precomputed series: energy(t) = 1/2||u||^2, enstrophy(t) = ||curl u||^2.
double energy_balance_residual(std::span<const double> times, std::span<const double> energy,
                               std::span<const double> enstrophy, double nu);

struct BoussinesqBalance {
    /// max_t of |E(t) - E(0) + int_0^t (nu||curl v||^2 + eps||grad rho||^2 + int rho v3)|
    /// with E = 1/2(||v||^2 + ||rho||^2).
    double residual = 0.0;
    /// max_t |int_0^t int rho v3 dx dtau|, reported separately.
    double buoyancy_work = 0.0;
};

BoussinesqBalance boussinesq_balance_residual(std::span<const TimedBoussinesq> trajectory,
                                              double nu, double epsilon);

/// Per-snapshot scalars used by the balance diagnostics.
struct BalanceSeries {
    std::vector<double> times, energy, enstrophy, rho_gradient, buoyancy;
};
BoussinesqBalance boussinesq_balance_residual(const BalanceSeries& series, double nu,
                                              double epsilon);

}  // namespace navslip
