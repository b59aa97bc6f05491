#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "navslip/dynamics.hpp"
#include "navslip/state.hpp"

namespace navslip {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// sin(pi a) and cos(pi a), exact zeros at integer and half-integer arguments.
double sinpi(double a);
double cospi(double a);

/// Value and gradient of a scalar field at a point.
struct ScalarJet {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

/// Largest |kx|, |ky| and kz carrying a nonzero coefficient.
struct Band {
    int kx = -1, ky = -1, kz = -1;
};
Band band_of(const SpectralScalar& f);

/// Trigonometric tables for one point, reusable across fields on the same grid.
class PointBasis {
public:
    /// Throws std::domain_error when z lies outside [0, 1] by more than 1e-12.
    PointBasis(const Grid& g, const Vec3& p);

private:
    friend ScalarJet eval_jet(const SpectralScalar& f, const PointBasis& b, const Band& band);
    int nx_, ny_, nz_;
    std::vector<std::complex<double>> ex_;  // column weight * exp(i kx x), kx = 0..nx/2
    std::vector<std::complex<double>> ey_;  // exp(i ky y) in row order
    std::vector<double> cz_, sz_;           // cos(k pi z), sin(k pi z), k = 0..nz
};

/// Direct trigonometric summation over the nonzero band.
ScalarJet eval_jet(const SpectralScalar& f, const PointBasis& b, const Band& band);
ScalarJet eval_jet(const SpectralScalar& f, const PointBasis& b);
double eval_at(const SpectralScalar& f, const Vec3& p);

std::vector<Vec3> eval_velocity_at(const VelocityState& v, std::span<const Vec3> points);
Vec3 eval_vorticity_at(const VorticityState& w, const Vec3& p);

/// Velocity, its gradient (grad_u(i, j) = du_i/dx_j) and the curl of the body force.
struct FlowSample {
    Vec3 u = Vec3::Zero();
    Mat3 grad_u = Mat3::Zero();
    Vec3 force_curl = Vec3::Zero();
};

/// One time level of the Eulerian fields seen by particles.
struct FlowFrame {
    double time = 0.0;
    VelocityState vel;
    std::optional<VorticityState> force_curl;
};

/// curl(-rho e3) = (-d rho/dy, d rho/dx, 0)
VorticityState buoyancy_force_curl(const SpectralScalar& rho);

class FlowSampler {
public:
    virtual ~FlowSampler() = default;
    virtual double t_min() const = 0;
    virtual double t_max() const = 0;
    virtual void sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) = 0;
};

/// Time-independent field.
class SteadySampler : public FlowSampler {
public:
    explicit SteadySampler(VelocityState v, std::optional<VorticityState> force_curl = {});
    double t_min() const override;
    double t_max() const override;
    void sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) override;

private:
    FlowFrame frame_;
};

/// Cubic Lagrange interpolation in time through the (up to) four stored
/// frames nearest to the requested time. Frames are pushed in time order and
/// the oldest is dropped beyond `capacity`.
class SnapshotSampler : public FlowSampler {
public:
    explicit SnapshotSampler(std::size_t capacity = 4) : capacity_(capacity) {}
    void push(FlowFrame frame);
    std::size_t size() const { return frames_.size(); }
    const FlowFrame& frame(std::size_t i) const { return frames_[i]; }

    double t_min() const override;
    double t_max() const override;
    void sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) override;
    /// The interpolated frame at time t.
    FlowFrame interpolate(double t) const;

private:
    std::size_t capacity_;
    std::deque<FlowFrame> frames_;
    std::optional<FlowFrame> cache_;
};

/// u_r(t) = -u(t_end - t), for integrating path-lines backwards.
class ReversedSampler : public FlowSampler {
public:
    ReversedSampler(FlowSampler& inner, double t_end) : inner_(inner), t_end_(t_end) {}
    double t_min() const override { return t_end_ - inner_.t_max(); }
    double t_max() const override { return t_end_ - inner_.t_min(); }
    void sample(double t, std::span<const Vec3> points, std::span<FlowSample> out) override;

private:
    FlowSampler& inner_;
    double t_end_;
};

struct ParticleSet {
    std::vector<Vec3> alphas;
    std::vector<Vec3> positions;
    std::vector<Mat3> grads;          // d X / d alpha
    std::vector<Vec3> force_integral;  // int_0^t curl f(X(alpha, s), s) ds
    double time = 0.0;

    ParticleSet() = default;
    explicit ParticleSet(std::vector<Vec3> seeds, double t0 = 0.0);
    std::size_t size() const { return alphas.size(); }
};

/// Seeds: an interior lattice plus points on both walls, deterministic in seed.
ParticleSet seed_particles(int interior, int per_wall, unsigned long long seed);

/// One RK4 step of dX/dt = u, dG/dt = grad u G, dF/dt = curl f.
/// Throws std::out_of_range when [t, t + dt] leaves the sampler's range.
void advect(ParticleSet& particles, FlowSampler& sampler, double dt);

std::vector<double> cauchy_residual(const ParticleSet& particles, const VorticityState& w_now,
                                    const VorticityState& w0);
/// Residual of w(X, t) = G w0(alpha) + int_0^t curl f(X, s) ds.
std::vector<double> forced_cauchy_residual(const ParticleSet& particles,
                                           const VorticityState& w_now, const VorticityState& w0);
/// |w(X(alpha, t), t)| per particle.
std::vector<double> vorticity_magnitude(const ParticleSet& particles, const VorticityState& w_now);

struct DensityResidual {
    double value = 0.0;     // |rho(X, t) - rho0(alpha)|
    double gradient = 0.0;  // |grad rho(X, t)^T G - grad rho0(alpha)^T|
    bool degenerate = false;  // det G <= 1e-8
};
std::vector<DensityResidual> density_gradient_residual(const ParticleSet& particles,
                                                       const SpectralScalar& rho_now,
                                                       const SpectralScalar& rho0);

/// max |det G - 1| over the set.
double max_det_deviation(const ParticleSet& particles);
/// max distance to the nearest wall over particles whose alpha_z is 0 or 1.
double max_wall_drift(const ParticleSet& particles);

/// Eulerian integration with particles advanced in lockstep through a
/// four-frame window, so no trajectory is stored. The observer sees the
/// particles after every particle step together with the state at that time.
template <class S>
struct LagrangianRun {
    S final_state;
    ParticleSet particles;
};

template <class S>
LagrangianRun<S> run_lagrangian(
    const S& initial, const SolverConfig& config, ParticleSet particles,
    const std::function<void(const ParticleSet&, const S&)>& observer = {});

FlowFrame make_frame(double t, const VelocityState& v, const SolverConfig& config);
FlowFrame make_frame(double t, const BoussinesqState& s, const SolverConfig& config);

}  // namespace navslip
