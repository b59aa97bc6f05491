#include <cmath>
#include <vector>

#include "doctest.h"
#include "navslip/errors.hpp"
#include "navslip/fields.hpp"
#include "test_support.hpp"

using namespace navslip;
using navslip::test::pi;

namespace {

double max_diff(const SpectralScalar& a, const SpectralScalar& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return m;
}

VelocityState shear(const Grid& g, double amp = 1.0) {
    VelocityState v(g);
    v.u1.set_mode(0, 0, 1, amp);
    return v;
}

}  // namespace

TEST_CASE("curl of simple fields") {
    const Grid g(16, 16, 16);

    SUBCASE("(cos pi z, 0, 0) -> (0, -pi sin pi z, 0)") {
        auto w = curl(shear(g));
        CHECK(w.w1.max_abs() == 0.0);
        CHECK(w.w3.max_abs() == 0.0);
        CHECK(std::abs(w.w2.coeff(0, 0, 1) - Complex(-pi, 0.0)) < 1e-15);
        CHECK(w.w1.parity() == Parity::Odd);
        CHECK(w.w3.parity() == Parity::Even);
    }

    SUBCASE("(sin y, 0, 0) -> (0, 0, -cos y)") {
        VelocityState v(g);
        v.u1.set_mode(0, 1, 0, Complex(0.0, -0.5));
        auto s = transform_inverse(v.u1);
        CHECK(std::abs(s(0, 4, 3) - std::sin(g.y(4))) < 1e-15);
        auto w = curl(v);
        CHECK(std::abs(w.w3.coeff(0, 1, 0) - Complex(-0.5, 0.0)) < 1e-15);
        CHECK(std::abs(w.w3.coeff(0, -1, 0) - Complex(-0.5, 0.0)) < 1e-15);
    }

    SUBCASE("curl curl u = -laplacian u for divergence-free u") {
        auto u = test::random_divfree(g, 40);
        auto cc = curl(curl(u));
        for (int c = 0; c < 3; ++c) {
            auto lap = laplacian(u[c]);
            CHECK(max_diff(cc[c], -1.0 * lap) <= 1e-11 * lap.max_abs());
        }
    }

    SUBCASE("curl of a gradient vanishes") {
        auto phi = test::random_field(g, Parity::Even, 41);
        VelocityState grad(derivative(phi, Axis::X), derivative(phi, Axis::Y),
                           derivative(phi, Axis::Z));
        auto w = curl(grad);
        for (int c = 0; c < 3; ++c) CHECK(w[c].max_abs() <= 1e-12 * phi.max_abs());
    }
}

TEST_CASE("L2 norms") {
    const Grid g(12, 12, 12);
    SpectralScalar one(g, Parity::Even);
    one.set_mode(0, 0, 0, 1.0);
    CHECK(l2_norm(one) == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(l2_norm(shear(g)) == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(l2_norm(VelocityState(g)) == 0.0);

    BoussinesqState b(g);
    b.vel = shear(g);
    b.rho.set_mode(0, 0, 1, 1.0);
    CHECK(l2_norm(b) == doctest::Approx(2 * pi).epsilon(1e-15));

    SpectralScalar e(g, Parity::Even), o(g, Parity::Odd);
    CHECK_THROWS_AS(inner(e, o), ParityError);
}

TEST_CASE("Parseval agrees with physical-space quadrature") {
    for (const Grid g : {Grid(8, 8, 8), Grid(16, 12, 10), Grid(24, 24, 24)}) {
        for (Parity p : {Parity::Even, Parity::Odd}) {
            auto a = test::random_field(g, p, 50);
            auto b = test::random_field(g, p, 51);
            const double quad = test::quad_product(g, transform_inverse(a), transform_inverse(b));
            const double parseval = inner(a, b);
            const double scale = l2_norm(a) * l2_norm(b);
            CHECK(std::abs(quad - parseval) <= 1e-10 * scale);
            const double qaa = test::quad_product(g, transform_inverse(a), transform_inverse(a));
            CHECK(std::abs(qaa - inner(a, a)) <= 1e-10 * inner(a, a));
        }
    }
}

TEST_CASE("gradient norms") {
    const Grid g(16, 16, 16);
    CHECK(h1_seminorm(shear(g)) == doctest::Approx(pi * pi * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(gradient_norm_sq(shear(g).u1) == doctest::Approx(2 * std::pow(pi, 4)).epsilon(1e-14));

    SUBCASE("matches the norm of explicit derivatives") {
        for (Parity p : {Parity::Even, Parity::Odd}) {
            auto f = test::random_field(g, p, 60);
            double direct = 0.0;
            for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
                auto d = derivative(f, a);
                direct += inner(d, d);
            }
            CHECK(std::abs(gradient_norm_sq(f) - direct) <= 1e-12 * direct);
        }
    }

    SUBCASE("||grad u|| = ||curl u|| for divergence-free slip fields") {
        for (unsigned seed : {61u, 64u, 67u}) {
            auto u = test::random_divfree(g, seed);
            const double h1 = h1_seminorm(u);
            CHECK(std::abs(h1 * h1 - std::pow(l2_norm(curl(u)), 2)) <= 1e-11 * h1 * h1);
        }
    }
}

TEST_CASE("integration by parts identity") {
    const Grid g(12, 12, 12);
    double worst = 0.0;
    for (unsigned k = 0; k < 100; ++k) {
        auto u = test::random_divfree(g, 1000 + 6 * k);
        auto phi = test::random_divfree(g, 1003 + 6 * k);
        const double r = ibp_residual(u, phi);
        worst = std::max(worst, std::abs(r) / (h1_seminorm(u) * h1_seminorm(phi)));
    }
    CHECK(worst <= 1e-10);

    SUBCASE("bilinear and symmetric") {
        auto u = test::random_divfree(g, 7);
        auto v = test::random_divfree(g, 10);
        auto w = test::random_divfree(g, 13);
        const double lhs = ibp_residual(2.0 * u + v, w);
        const double rhs = 2.0 * ibp_residual(u, w) + ibp_residual(v, w);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * h1_seminorm(u) * h1_seminorm(w) * 3);
        CHECK(std::abs(ibp_residual(u, v) - ibp_residual(v, u)) <=
              1e-10 * h1_seminorm(u) * h1_seminorm(v));
    }

    SUBCASE("a non-solenoidal field breaks the identity") {
        VelocityState grad(g);
        grad.u1.set_mode(1, 0, 1, 0.5);  // cos x cos pi z alone has divergence
        CHECK(std::abs(ibp_residual(grad, grad)) > 1.0);
    }
}

TEST_CASE("wall traces of vorticity") {
    const Grid g(16, 16, 16);
    auto u = test::random_divfree(g, 70);
    auto tr = boundary_vorticity_trace(curl(u));
    CHECK(tr.max_tangential() == 0.0);
    CHECK(tr.w1_bottom.size() == static_cast<std::size_t>(g.nx * g.ny));

    VelocityState v(g);
    v.u1.set_mode(0, 1, 0, Complex(0.0, -0.15));  // 0.3 sin y
    auto t2 = boundary_vorticity_trace(curl(v));
    CHECK(t2.max_normal() == doctest::Approx(0.3).epsilon(1e-14));
    // sqrt(2 * int 0.09 sin^2 y dS) over both walls
    CHECK(t2.normal_l2(g) == doctest::Approx(0.3 * 2 * pi).epsilon(1e-14));
}

TEST_CASE("cumulative integral") {
    SUBCASE("exact for cubics") {
        for (int n : {4, 5, 6, 11, 12}) {
            std::vector<double> t(n), f(n);
            for (int i = 0; i < n; ++i) {
                t[i] = 0.5 + 0.1 * i;
                f[i] = t[i] * t[i] * t[i] - 2 * t[i] + 1;
            }
            auto out = cumulative_integral(t, f);
            auto F = [](double s) { return s * s * s * s / 4 - s * s + s; };
            for (int i = 0; i < n; ++i) CHECK(std::abs(out[i] - (F(t[i]) - F(t[0]))) < 1e-14);
        }
    }

    SUBCASE("three samples integrate quadratics") {
        std::vector<double> t{0.0, 1.0, 2.0}, f{0.0, 1.0, 4.0};
        auto out = cumulative_integral(t, f);
        CHECK(out[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(out[2] == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    }

    SUBCASE("fourth-order convergence") {
        auto err = [](int n) {
            std::vector<double> t(n), f(n);
            for (int i = 0; i < n; ++i) {
                t[i] = 2.0 * i / (n - 1);
                f[i] = std::exp(std::sin(3 * t[i]));
            }
            auto a = cumulative_integral(t, f);
            // reference with 64x refinement
            const int m = 64 * (n - 1) + 1;
            std::vector<double> tr(m), fr(m);
            for (int i = 0; i < m; ++i) {
                tr[i] = 2.0 * i / (m - 1);
                fr[i] = std::exp(std::sin(3 * tr[i]));
            }
            auto ref = cumulative_integral(tr, fr);
            double e = 0.0;
            for (int i = 0; i < n; ++i) e = std::max(e, std::abs(a[i] - ref[64 * i]));
            return e;
        };
        const double rate = std::log2(err(41) / err(81));
        CHECK(rate > 3.7);
    }

    SUBCASE("rejects bad input") {
        std::vector<double> t2{0.0, 1.0}, f2{0.0, 0.0};
        CHECK_THROWS_AS(cumulative_integral(t2, f2), std::invalid_argument);
        std::vector<double> t{0.0, 1.0, 3.0}, f{0.0, 0.0, 0.0};
        CHECK_THROWS_AS(cumulative_integral(t, f), std::invalid_argument);
        std::vector<double> t3{0.0, 1.0, 2.0};
        CHECK_THROWS_AS(cumulative_integral(t3, f2), std::invalid_argument);
    }
}

TEST_CASE("energy balance residuals") {
    const Grid g(8, 8, 8);

    SUBCASE("decaying shear closes the balance") {
        const double nu = 1e-2;
        std::vector<TimedVelocity> traj;
        for (int i = 0; i <= 100; ++i) {
            const double t = 0.01 * i;
            traj.push_back({t, shear(g, std::exp(-nu * pi * pi * t))});
        }
        CHECK(energy_balance_residual(traj, nu) <= 1e-10);
        // A wrong viscosity leaves an O(1) imbalance.
        CHECK(energy_balance_residual(traj, 2 * nu) > 1e-2);
    }

    SUBCASE("zero state") {
        std::vector<TimedVelocity> traj;
        for (int i = 0; i < 5; ++i) traj.push_back({0.1 * i, VelocityState(g)});
        CHECK(energy_balance_residual(traj, 1e-3) == 0.0);
        std::vector<TimedBoussinesq> bt;
        for (int i = 0; i < 5; ++i) bt.push_back({0.1 * i, BoussinesqState(g)});
        auto r = boussinesq_balance_residual(bt, 1e-3, 1e-3);
        CHECK(r.residual == 0.0);
        CHECK(r.buoyancy_work == 0.0);
    }

    SUBCASE("too few snapshots") {
        std::vector<TimedVelocity> traj{{0.0, VelocityState(g)}, {0.1, VelocityState(g)}};
        CHECK_THROWS_AS(energy_balance_residual(traj, 1e-3), std::invalid_argument);
    }

    SUBCASE("boussinesq series with buoyancy exchange") {
        // E(t) = 1 - a t - b t^2 / 2 with sink a + b t; buoyancy part alone is c t.
        const double nu = 1e-3, eps = 2e-3;
        BalanceSeries s;
        for (int i = 0; i <= 20; ++i) {
            const double t = 0.05 * i;
            s.times.push_back(t);
            s.enstrophy.push_back(1.0 + t);
            s.rho_gradient.push_back(2.0);
            s.buoyancy.push_back(0.5 * t);
            const double acc = nu * (t + 0.5 * t * t) + eps * 2.0 * t + 0.25 * t * t;
            s.energy.push_back(1.0 - acc);
        }
        auto r = boussinesq_balance_residual(s, nu, eps);
        CHECK(r.residual < 1e-14);
        CHECK(r.buoyancy_work == doctest::Approx(0.25).epsilon(1e-14));
    }
}
