#pragma once

#include "navslip/spectral_scalar.hpp"

namespace navslip {

/// Velocity with parities (Even, Even, Odd): u3 = 0 and the tangential
/// vorticity vanish on both walls by construction.
struct VelocityState {
    SpectralScalar u1, u2, u3;

    VelocityState() = default;
    explicit VelocityState(const Grid& g)
        : u1(g, Parity::Even), u2(g, Parity::Even), u3(g, Parity::Odd) {}
    /// Throws ParityError / GridMismatchError on inconsistent components.
    VelocityState(SpectralScalar a, SpectralScalar b, SpectralScalar c);

    const Grid& grid() const { return u1.grid(); }
    SpectralScalar& operator[](int i) { return i == 0 ? u1 : (i == 1 ? u2 : u3); }
    const SpectralScalar& operator[](int i) const { return i == 0 ? u1 : (i == 1 ? u2 : u3); }

    bool all_finite() const { return u1.all_finite() && u2.all_finite() && u3.all_finite(); }

    VelocityState& operator+=(const VelocityState& o);
    VelocityState& operator-=(const VelocityState& o);
    VelocityState& operator*=(double s);
    VelocityState& axpy(double a, const VelocityState& x);
    friend VelocityState operator+(VelocityState a, const VelocityState& b) { return a += b; }
    friend VelocityState operator-(VelocityState a, const VelocityState& b) { return a -= b; }
    friend VelocityState operator*(double s, VelocityState a) { return a *= s; }
};

/// Vorticity with parities (Odd, Odd, Even).
struct VorticityState {
    SpectralScalar w1, w2, w3;

    VorticityState() = default;
    explicit VorticityState(const Grid& g)
        : w1(g, Parity::Odd), w2(g, Parity::Odd), w3(g, Parity::Even) {}
    VorticityState(SpectralScalar a, SpectralScalar b, SpectralScalar c);

    const Grid& grid() const { return w1.grid(); }
    SpectralScalar& operator[](int i) { return i == 0 ? w1 : (i == 1 ? w2 : w3); }
    const SpectralScalar& operator[](int i) const { return i == 0 ? w1 : (i == 1 ? w2 : w3); }
};

/// Velocity plus an Odd density perturbation (rho = 0 on the walls).
struct BoussinesqState {
    VelocityState vel;
    SpectralScalar rho;

    BoussinesqState() = default;
    explicit BoussinesqState(const Grid& g) : vel(g), rho(g, Parity::Odd) {}
    BoussinesqState(VelocityState v, SpectralScalar r);

    const Grid& grid() const { return vel.grid(); }
    bool all_finite() const { return vel.all_finite() && rho.all_finite(); }

    BoussinesqState& operator+=(const BoussinesqState& o);
    BoussinesqState& operator-=(const BoussinesqState& o);
    BoussinesqState& operator*=(double s);
    BoussinesqState& axpy(double a, const BoussinesqState& x);
    friend BoussinesqState operator+(BoussinesqState a, const BoussinesqState& b) { return a += b; }
    friend BoussinesqState operator-(BoussinesqState a, const BoussinesqState& b) { return a -= b; }
};

}  // namespace navslip
