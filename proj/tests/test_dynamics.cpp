#include <cmath>
#include <limits>

#include "doctest.h"
#include "navslip/dynamics.hpp"
#include "navslip/errors.hpp"
#include "test_support.hpp"

using namespace navslip;
using navslip::test::pi;

namespace {

double distance(const VelocityState& a, const VelocityState& b) { return l2_norm(a - b); }

double distance(const BoussinesqState& a, const BoussinesqState& b) { return l2_norm(a - b); }

VelocityState generic(const Grid& g, unsigned seed, double target = 0.5) {
    auto v = test::random_divfree(g, seed);
    double umax = 0.0;
    for (int c = 0; c < 3; ++c)
        for (double x : transform_inverse(v[c]).values()) umax = std::max(umax, std::abs(x));
    v *= target / umax;
    return v;
}

BoussinesqState generic_b(const Grid& g, unsigned seed) {
    BoussinesqState s(generic(g, seed), test::random_field(g, Parity::Odd, seed + 9));
    s.rho *= 0.3 / s.rho.max_abs();
    return s;
}

SolverConfig config(const Grid& g, double nu, double dt, double t_end) {
    SolverConfig c;
    c.grid = g;
    c.nu = nu;
    c.dt = dt;
    c.t_end = t_end;
    c.on_warning = [](const std::string&) {};
    return c;
}

}  // namespace

TEST_CASE("exact shear solution") {
    const Grid g(8, 8, 8);
    CHECK(exact_shear_solution(0.0, 0.3, g).u1.coeff(0, 0, 1).real() == 1.0);
    CHECK(exact_shear_solution(5.0, 0.0, g).u1.coeff(0, 0, 1).real() == 1.0);
    const double a = exact_shear_solution(1.0, 0.01, g).u1.coeff(0, 0, 1).real();
    CHECK(a == doctest::Approx(0.9060180557889229).epsilon(1e-15));
    auto s = transform_inverse(exact_shear_solution(0.0, 0.0, g).u1);
    CHECK(std::abs(s(3, 1, 2) - std::cos(pi * g.z(2))) < 1e-15);
}

TEST_CASE("navier-stokes right-hand side") {
    const Grid g(16, 16, 16);

    SUBCASE("shear flow: advection projects away") {
        const double nu = 0.07;
        auto r = nse_rhs(exact_shear_solution(0.0, 0.0, g), nu);
        CHECK(std::abs(r.u1.coeff(0, 0, 1) - Complex(-nu * pi * pi, 0.0)) < 1e-14);
        VelocityState rest = r;
        rest.u1.set_mode(0, 0, 1, 0.0);
        for (int c = 0; c < 3; ++c) CHECK(rest[c].max_abs() < 1e-14);
    }

    SUBCASE("layered flows skip advection without changing the result") {
        VelocityState v(g);
        for (int k = 0; k <= 8; ++k) {
            v.u1.set_mode(0, 0, k, 0.3 * std::cos(1.0 + k) / (1.0 + k));
            v.u2.set_mode(0, 0, k, 0.2 * std::sin(2.0 + k) / (1.0 + k));
        }
        // The full rotational evaluation, written out.
        const VorticityState w = curl(v);
        const GridSamples u1 = transform_inverse(v.u1), u2 = transform_inverse(v.u2),
                          u3 = transform_inverse(v.u3);
        const GridSamples w1 = transform_inverse(w.w1), w2 = transform_inverse(w.w2),
                          w3 = transform_inverse(w.w3);
        GridSamples c1(g), c2(g), c3(g);
        for (std::size_t i = 0; i < c1.values().size(); ++i) {
            c1.values()[i] = u2.values()[i] * w3.values()[i] - u3.values()[i] * w2.values()[i];
            c2.values()[i] = u3.values()[i] * w1.values()[i] - u1.values()[i] * w3.values()[i];
            c3.values()[i] = u1.values()[i] * w2.values()[i] - u2.values()[i] * w1.values()[i];
        }
        const VelocityState full =
            leray_project(dealias(transform_forward(c1, Parity::Even, g)),
                          dealias(transform_forward(c2, Parity::Even, g)),
                          dealias(transform_forward(c3, Parity::Odd, g)));
        const VelocityState r = nse_rhs(v, 0.0);
        for (int c = 0; c < 3; ++c) {
            CHECK(r[c].max_abs() == 0.0);
            CHECK(full[c].max_abs() <= 1e-15);
        }
    }

    SUBCASE("zero state") {
        auto r = nse_rhs(VelocityState(g), 0.1);
        for (int c = 0; c < 3; ++c) CHECK(r[c].max_abs() == 0.0);
    }

    SUBCASE("advection is energy neutral") {
        for (unsigned seed : {3u, 9u, 15u}) {
            auto v = test::random_divfree(g, seed);
            auto r = nse_rhs(v, 0.0);
            CHECK(std::abs(inner(r, v)) <= 1e-10);
            CHECK(max_divergence(r) <= 1e-11);
            CHECK(r.u1.parity() == Parity::Even);
            CHECK(r.u3.parity() == Parity::Odd);
        }
    }
}

TEST_CASE("boussinesq right-hand side") {
    const Grid g(12, 12, 12);

    SUBCASE("no density reduces to navier-stokes") {
        auto v = test::random_divfree(g, 30);
        auto r = boussinesq_rhs(BoussinesqState(v, SpectralScalar(g, Parity::Odd)), 0.02, 0.01);
        auto n = nse_rhs(v, 0.02);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < n[c].coeffs().size(); ++i)
                CHECK(r.vel[c].coeffs()[i] == n[c].coeffs()[i]);
        CHECK(r.rho.max_abs() == 0.0);
    }

    SUBCASE("still fluid: only buoyancy acts") {
        BoussinesqState s(g);
        s.rho = test::random_field(g, Parity::Odd, 31);
        auto r = boussinesq_rhs(s, 0.0, 0.0);
        CHECK(r.rho.max_abs() == 0.0);
        SpectralScalar minus_rho = s.rho;
        minus_rho *= -1.0;
        auto expect = leray_project(SpectralScalar(g, Parity::Even), SpectralScalar(g, Parity::Even),
                                    minus_rho);
        CHECK(distance(r.vel, expect) == 0.0);
    }

    SUBCASE("skew transport conserves density variance") {
        for (unsigned seed : {32u, 40u}) {
            BoussinesqState s(test::random_divfree(g, seed), test::random_field(g, Parity::Odd, seed + 5));
            auto r = boussinesq_rhs(s, 0.0, 0.0);
            CHECK(std::abs(inner(r.rho, s.rho)) <= 1e-10);
            // total energy changes only through the buoyancy exchange
            CHECK(std::abs(inner(r.vel, s.vel) + inner(s.rho, s.vel.u3)) <= 1e-10);
            CHECK(max_divergence(r.vel) <= 1e-11);
            CHECK(r.rho.parity() == Parity::Odd);
        }
    }
}

TEST_CASE("single step") {
    const Grid g(12, 12, 12);

    SUBCASE("pure diffusion decays each mode exactly") {
        const double nu = 0.03, dt = 0.05;
        VelocityState v(g);
        v.u1.set_mode(1, -2, 3, Complex(0.2, 0.1));
        v.u2.set_mode(0, 3, 1, Complex(0.0, 0.4));
        v.u3.set_mode(2, 1, 2, Complex(-0.3, 0.05));
        auto c = config(g, nu, dt, 1.0);
        c.advection = false;
        auto out = step(v, c);
        auto expect = [&](int kx, int ky, int kz, Complex z) {
            return z * std::exp(-nu * (kx * kx + ky * ky + kz * kz * pi * pi) * dt);
        };
        CHECK(std::abs(out.u1.coeff(1, -2, 3) - expect(1, -2, 3, Complex(0.2, 0.1))) < 1e-14);
        CHECK(std::abs(out.u2.coeff(0, 3, 1) - expect(0, 3, 1, Complex(0.0, 0.4))) < 1e-14);
        CHECK(std::abs(out.u3.coeff(2, 1, 2) - expect(2, 1, 2, Complex(-0.3, 0.05))) < 1e-14);
    }

    SUBCASE("steady euler shear") {
        auto v = exact_shear_solution(0.0, 0.0, g);
        auto out = step(v, config(g, 0.0, 0.01, 1.0));
        CHECK(distance(out, v) < 1e-14);
    }

    SUBCASE("one-step error scales as dt^5") {
        const auto v = generic(g, 77);
        auto err = [&](double dt) {
            auto coarse = step(v, config(g, 1e-2, dt, 1.0));
            Integrator<VelocityState> fine(config(g, 1e-2, dt / 16, 1.0));
            Dissipation d;
            VelocityState s = v;
            for (int i = 0; i < 16; ++i) s = fine.step(s, i * dt / 16, dt / 16, d);
            return distance(coarse, s);
        };
        const double e1 = err(0.08), e2 = err(0.04);
        const double order = std::log2(e1 / e2);
        MESSAGE("one-step order " << order);
        CHECK(order == doctest::Approx(5.0).epsilon(0.1));
    }

    SUBCASE("blow-up is reported with its time") {
        auto c = config(g, 0.0, 0.1, 1.0);
        c.forcing = [g](double) {
            VelocityState f(g);
            f.u1.set_mode(1, 1, 1, std::numeric_limits<double>::quiet_NaN());
            return f;
        };
        Integrator<VelocityState> it(c);
        Dissipation d;
        try {
            (void)it.step(exact_shear_solution(0.0, 0.0, g), 0.3, 0.1, d);
            CHECK(false);
        } catch (const BlowUpError& e) {
            CHECK(e.time() == doctest::Approx(0.4));
        }
    }

    SUBCASE("CFL advisory") {
        auto v = generic(g, 5, 2.0);
        auto c = config(g, 0.0, 0.2, 1.0);
        int warnings = 0;
        c.on_warning = [&](const std::string&) { ++warnings; };
        Integrator<VelocityState> it(c);
        Dissipation d;
        (void)it.step(v, 0.0, 0.2, d);
        (void)it.step(v, 0.2, 0.2, d);
        CHECK(warnings == 1);
        c.strict_cfl = true;
        CHECK_THROWS_AS(step(v, c), CflError);
        c.dt = 1e-3;
        CHECK_NOTHROW(step(v, c));
    }
}

TEST_CASE("solver configuration") {
    SolverConfig c;
    c.nu = -1;
    c.dt = 2.0;
    c.t_end = 1.0;
    c.snapshot_interval = 0;
    try {
        c.validate();
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(e.problems().size() == 3);
    }
    SolverConfig d;
    d.dt = 1e-3;
    d.t_end = 1.0;
    CHECK(d.steps() == 1000);
    d.dt = 0.3;
    CHECK(d.steps() == 4);
}

TEST_CASE("integrate") {
    const Grid g(12, 12, 12);

    SUBCASE("decaying shear matches the closed form") {
        const double nu = 1e-2;
        auto c = config(g, nu, 1e-2, 1.0);
        c.snapshot_interval = 10;
        auto tr = integrate(exact_shear_solution(0.0, nu, g), c);
        REQUIRE(tr.snapshots.size() == 11);
        CHECK(tr.snapshots.back().time == 1.0);
        CHECK(distance(tr.snapshots.back().state, exact_shear_solution(1.0, nu, g)) <= 1e-10);
        // int_0^1 ||curl u||^2 = 2 pi^4 (1 - e^{-2 nu pi^2}) / (2 nu pi^2)
        const double lam = 2 * nu * pi * pi;
        const double expect = 2 * std::pow(pi, 4) * (1 - std::exp(-lam)) / lam;
        CHECK(tr.snapshots.back().integrals.enstrophy == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("zero data stays zero") {
        auto c = config(g, 0.1, 0.1, 0.5);
        auto tr = integrate(VelocityState(g), c);
        REQUIRE(tr.snapshots.size() == 6);
        for (const auto& s : tr.snapshots) CHECK(l2_norm(s.state) == 0.0);
    }

    SUBCASE("snapshots: first equals initial, times increase, divergence-free") {
        auto v = generic(g, 12);
        auto c = config(g, 1e-2, 0.01, 0.1);
        c.snapshot_interval = 3;
        auto tr = integrate(v, c);
        REQUIRE(tr.snapshots.size() == 5);  // 0, 0.03, 0.06, 0.09, 0.1
        CHECK(distance(tr.snapshots.front().state, v) == 0.0);
        CHECK(tr.snapshots[3].time == doctest::Approx(0.09).epsilon(1e-14));
        CHECK(tr.snapshots.back().time == 0.1);
        for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
            CHECK(tr.snapshots[i].time > tr.snapshots[i - 1].time);
            CHECK(max_divergence(tr.snapshots[i].state) <= 1e-11);
        }
    }

    SUBCASE("global order four") {
        const auto v = generic(g, 21);
        const double nu = 1e-2, T = 0.64;
        auto final_state = [&](double dt) { return integrate(v, config(g, nu, dt, T)).snapshots.back().state; };
        const auto ref = final_state(0.01);
        const double e1 = distance(final_state(0.16), ref);
        const double e2 = distance(final_state(0.08), ref);
        const double e3 = distance(final_state(0.04), ref);
        const double slope = std::log2(e1 / e3) / 2.0;
        MESSAGE("global order " << slope << " (" << std::log2(e1 / e2) << ", " << std::log2(e2 / e3) << ")");
        CHECK(slope == doctest::Approx(4.0).epsilon(0.3 / 4.0));
    }

    SUBCASE("energy balance to integrator order") {
        const auto v = generic(g, 44);
        const double nu = 5e-3;
        auto residual = [&](double dt) {
            auto tr = integrate(v, config(g, nu, dt, 0.5));
            const auto& last = tr.snapshots.back();
            const double e0 = 0.5 * std::pow(l2_norm(v), 2);
            const double e1 = 0.5 * std::pow(l2_norm(last.state), 2);
            return std::abs(e1 + nu * last.integrals.enstrophy - e0) / e0;
        };
        const double r1 = residual(0.05), r2 = residual(0.025);
        MESSAGE("energy residuals " << r1 << " " << r2);
        CHECK(r2 < 1e-7);
        CHECK(std::log2(r1 / r2) > 3.5);
    }

    SUBCASE("constant forcing drives the shear mode") {
        const double nu = 1e-2, F = 0.3, lam = nu * pi * pi;
        auto c = config(g, nu, 0.01, 1.0);
        c.forcing = [g, F](double) {
            VelocityState f(g);
            f.u1.set_mode(0, 0, 1, F);
            f.u1.set_mode(1, 0, 0, 0.5);  // gradient part, removed by projection
            return f;
        };
        auto tr = integrate(exact_shear_solution(0.0, 0.0, g), c);
        const double a = std::exp(-lam) + F / lam * (1 - std::exp(-lam));
        CHECK(tr.snapshots.back().state.u1.coeff(0, 0, 1).real() == doctest::Approx(a).epsilon(1e-12));
        CHECK(std::abs(tr.snapshots.back().state.u1.coeff(1, 0, 0)) < 1e-15);
    }
}

TEST_CASE("boussinesq integration") {
    const Grid g(12, 12, 12);
    const auto s0 = generic_b(g, 55);
    auto energy = [](const BoussinesqState& s) { return 0.5 * std::pow(l2_norm(s), 2); };

    SUBCASE("inviscid energy plus buoyancy work is conserved to O(dt^4)") {
        auto drift = [&](double dt) {
            auto tr = integrate(s0, config(g, 0.0, dt, 0.5));
            double worst = 0.0;
            for (const auto& snap : tr.snapshots)
                worst = std::max(worst, std::abs(energy(snap.state) + snap.integrals.buoyancy - energy(s0)));
            return worst / energy(s0);
        };
        const double d1 = drift(0.05), d2 = drift(0.025);
        MESSAGE("boussinesq drift " << d1 << " " << d2);
        CHECK(d2 < 1e-7);
        CHECK(std::log2(d1 / d2) > 3.5);
    }

    SUBCASE("diffusive balance converges at fourth order") {
        auto run = [&](double dt) {
            auto c = config(g, 1e-2, dt, 0.4);
            c.epsilon = 2e-2;
            return integrate(s0, c);
        };
        auto balance = [&](const Trajectory<BoussinesqState>& tr) {
            const auto& last = tr.snapshots.back();
            const auto& c = tr.config;
            return std::abs(energy(last.state) + c.nu * last.integrals.enstrophy +
                            c.epsilon * last.integrals.rho_gradient + last.integrals.buoyancy -
                            energy(s0)) /
                   energy(s0);
        };
        const auto coarse = run(0.02), fine = run(0.01);
        const double b1 = balance(coarse), b2 = balance(fine);
        MESSAGE("diffusive balance " << b1 << " " << b2);
        CHECK(std::log2(b1 / b2) > 3.5);
        CHECK(b2 < 1e-6);
        const auto& last = fine.snapshots.back();
        CHECK(last.state.rho.parity() == Parity::Odd);
        CHECK(max_divergence(last.state.vel) <= 1e-11);
    }

    SUBCASE("pure density diffusion") {
        BoussinesqState s(g);
        s.rho.set_mode(1, 0, 2, 0.25);
        auto c = config(g, 0.0, 0.1, 1.0);
        c.epsilon = 0.05;
        c.advection = false;
        // buoyancy feeds the velocity, but rho itself only diffuses
        auto out = step(s, c);
        const double k2 = 1 + 4 * pi * pi;
        CHECK(std::abs(out.rho.coeff(1, 0, 2) - 0.25 * std::exp(-0.05 * k2 * 0.1)) < 1e-14);
        CHECK(distance(step(BoussinesqState(g), c), BoussinesqState(g)) == 0.0);
    }
}
