#include "navslip/state.hpp"

#include <string>

#include "navslip/errors.hpp"

namespace navslip {

namespace {
void expect(const SpectralScalar& f, Parity p, const char* name) {
    if (f.parity() != p)
        throw ParityError(std::string(name) + " must have " + std::string(to_string(p)) +
                          " parity");
}
}  // namespace

VelocityState::VelocityState(SpectralScalar a, SpectralScalar b, SpectralScalar c)
    : u1(std::move(a)), u2(std::move(b)), u3(std::move(c)) {
    expect(u1, Parity::Even, "u1");
    expect(u2, Parity::Even, "u2");
    expect(u3, Parity::Odd, "u3");
    require_compatible(u1.grid(), u2.grid());
    require_compatible(u1.grid(), u3.grid());
}

VelocityState& VelocityState::operator+=(const VelocityState& o) {
    u1 += o.u1;
    u2 += o.u2;
    u3 += o.u3;
    return *this;
}

VelocityState& VelocityState::operator-=(const VelocityState& o) {
    u1 -= o.u1;
    u2 -= o.u2;
    u3 -= o.u3;
    return *this;
}

VelocityState& VelocityState::operator*=(double s) {
    u1 *= s;
    u2 *= s;
    u3 *= s;
    return *this;
}

VelocityState& VelocityState::axpy(double a, const VelocityState& x) {
    u1.axpy(a, x.u1);
    u2.axpy(a, x.u2);
    u3.axpy(a, x.u3);
    return *this;
}

VorticityState::VorticityState(SpectralScalar a, SpectralScalar b, SpectralScalar c)
    : w1(std::move(a)), w2(std::move(b)), w3(std::move(c)) {
    expect(w1, Parity::Odd, "w1");
    expect(w2, Parity::Odd, "w2");
    expect(w3, Parity::Even, "w3");
    require_compatible(w1.grid(), w2.grid());
    require_compatible(w1.grid(), w3.grid());
}

BoussinesqState::BoussinesqState(VelocityState v, SpectralScalar r)
    : vel(std::move(v)), rho(std::move(r)) {
    expect(rho, Parity::Odd, "rho");
    require_compatible(vel.grid(), rho.grid());
}

BoussinesqState& BoussinesqState::operator+=(const BoussinesqState& o) {
    vel += o.vel;
    rho += o.rho;
    return *this;
}

BoussinesqState& BoussinesqState::operator-=(const BoussinesqState& o) {
    vel -= o.vel;
    rho -= o.rho;
    return *this;
}

BoussinesqState& BoussinesqState::operator*=(double s) {
    vel *= s;
    rho *= s;
    return *this;
}

BoussinesqState& BoussinesqState::axpy(double a, const BoussinesqState& x) {
    vel.axpy(a, x.vel);
    rho.axpy(a, x.rho);
    return *this;
}

}  // namespace navslip
