#include <cmath>
#include <vector>

#include "doctest.h"
#include "navslip/errors.hpp"
#include "navslip/harness.hpp"
#include "test_support.hpp"

using namespace navslip;
using navslip::test::pi;

namespace {

const std::vector<double> kNus{1e-2, 5e-3, 2.5e-3, 1.25e-3};

SweepConfig sweep_config(const Grid& g, double dt, double t_end) {
    SweepConfig c;
    c.solver.grid = g;
    c.solver.dt = dt;
    c.solver.t_end = t_end;
    return c;
}

double shear_closed_form(double nu, double t) {
    const double a = 1.0 - std::exp(-nu * pi * pi * t);
    return 2.0 * pi * pi * a * a;
}

double wall_max(const SpectralScalar& f) {
    const GridSamples s = transform_inverse(f);
    double m = 0.0;
    for (int iz : {0, f.grid().nz})
        for (int iy = 0; iy < s.ny(); ++iy)
            for (int ix = 0; ix < s.nx(); ++ix) m = std::max(m, std::abs(s(ix, iy, iz)));
    return m;
}

bool identical(const VelocityState& a, const VelocityState& b) {
    for (int c = 0; c < 3; ++c) {
        const auto x = a[c].coeffs(), y = b[c].coeffs();
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] != y[i]) return false;
    }
    return true;
}

bool contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

Trajectory<VelocityState> run(const VelocityState& u0, const Grid& g, double nu, double dt,
                              double t_end) {
    SolverConfig c;
    c.grid = g;
    c.nu = nu;
    c.dt = dt;
    c.t_end = t_end;
    c.on_warning = [](const std::string&) {};
    return integrate(u0, c);
}

}  // namespace

TEST_CASE("data kind names") {
    for (DataKind k : {DataKind::Shear, DataKind::InteriorBlob,
                       DataKind::GenericBoundaryVorticity, DataKind::BoussinesqBlob})
        CHECK(parse_data_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_data_kind("Blob"), std::invalid_argument);
}

TEST_CASE("initial data classes") {
    const Grid g(16, 16, 16);

    SUBCASE("shear without perturbation") {
        const InitialData d = make_initial_data({DataKind::Shear}, 1e-2, g);
        CHECK(identical(d.reference, exact_shear_solution(0.0, 0.0, g)));
        CHECK(l2_norm(d.viscous - d.reference) == 0.0);
        CHECK_FALSE(d.has_density());
    }

    SUBCASE("interior blob vanishes in vorticity on the walls") {
        const InitialData d = make_initial_data({DataKind::InteriorBlob}, 1e-2, g);
        const VorticityState w = curl(d.reference);
        for (int c = 0; c < 3; ++c) CHECK(wall_max(w[c]) <= 1e-10);
        CHECK(max_divergence(d.reference) <= 1e-10);
        CHECK(l2_norm(d.reference) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(h1_seminorm(d.reference) > 0.0);
        CHECK(l2_norm(curl(d.reference)) > 0.1);
    }

    SUBCASE("generic class carries wall-normal vorticity") {
        const InitialData d = make_initial_data({DataKind::GenericBoundaryVorticity}, 1e-2, g);
        CHECK(boundary_vorticity_trace(curl(d.reference)).normal_l2(g) >= 0.1);
        CHECK(max_divergence(d.reference) <= 1e-10);
    }

    SUBCASE("boussinesq blob density is flat on the walls") {
        const InitialData d = make_initial_data({DataKind::BoussinesqBlob}, 1e-2, g);
        REQUIRE(d.has_density());
        const SpectralScalar& rho = *d.rho_reference;
        CHECK(wall_max(rho) <= 1e-12);
        for (Axis a : {Axis::X, Axis::Y, Axis::Z}) CHECK(wall_max(derivative(rho, a)) <= 1e-10);
        CHECK(l2_norm(rho) == doctest::Approx(1.0).epsilon(1e-14));
        const VorticityState w = curl(d.reference);
        for (int c = 0; c < 3; ++c) CHECK(wall_max(w[c]) <= 1e-10);
    }

    SUBCASE("seeds select the blob") {
        const auto a = make_initial_data({DataKind::InteriorBlob, std::nullopt, 7}, 1e-2, g);
        const auto b = make_initial_data({DataKind::InteriorBlob, std::nullopt, 7}, 1e-2, g);
        const auto c = make_initial_data({DataKind::InteriorBlob, std::nullopt, 8}, 1e-2, g);
        CHECK(identical(a.reference, b.reference));
        CHECK(l2_norm(a.reference - c.reference) > 0.1);
    }

    SUBCASE("grid too coarse for the density profile") {
        CHECK_THROWS_AS(make_initial_data({DataKind::BoussinesqBlob}, 1e-2, Grid(8, 8, 4)),
                        std::invalid_argument);
    }

    SUBCASE("negative viscosity") {
        CHECK_THROWS_AS(make_initial_data({DataKind::Shear}, -1.0, g), std::invalid_argument);
    }
}

TEST_CASE("perturbed data") {
    const Grid g(16, 16, 16);
    const double nu = 1e-2;

    SUBCASE("norm of the difference is nu^r") {
        for (DataKind k : {DataKind::Shear, DataKind::InteriorBlob,
                           DataKind::GenericBoundaryVorticity}) {
            const InitialData d = make_initial_data({k, Perturbation{1.5, 3}}, nu, g);
            const VelocityState w = d.viscous - d.reference;
            CHECK(l2_norm(w) / std::pow(nu, 1.5) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(std::abs(inner(w, d.reference)) <= 1e-12 * l2_norm(w));
            CHECK(max_divergence(d.viscous) <= 1e-10);
        }
    }

    SUBCASE("density is perturbed at the same rate") {
        const InitialData d = make_initial_data({DataKind::BoussinesqBlob, Perturbation{1.0, 2}},
                                                nu, g);
        const SpectralScalar s = *d.rho_viscous - *d.rho_reference;
        CHECK(l2_norm(s) / nu == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(l2_norm(d.viscous - d.reference) / nu == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(inner(s, *d.rho_reference)) <= 1e-12 * l2_norm(s));
    }

    SUBCASE("r = 0 gives a unit difference") {
        const InitialData d = make_initial_data({DataKind::Shear, Perturbation{0.0, 1}}, nu, g);
        CHECK(l2_norm(d.viscous - d.reference) == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("patterns are unit, solenoidal and reproducible") {
        const VelocityState p = perturbation_pattern(5, g);
        CHECK(l2_norm(p) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(max_divergence(p) <= 1e-10);
        CHECK(identical(p, perturbation_pattern(5, g)));
        CHECK(l2_norm(p - perturbation_pattern(6, g)) > 0.1);
        const SpectralScalar s = density_pattern(5, g);
        CHECK(s.parity() == Parity::Odd);
        CHECK(l2_norm(s) == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("negative exponent") {
        CHECK_THROWS_AS(make_initial_data({DataKind::Shear, Perturbation{-1.0, 1}}, nu, g),
                        std::invalid_argument);
    }
}

TEST_CASE("data class error reports the invariant") {
    const DataClassError e("omega0 = 0 on the walls", 0.25);
    CHECK(e.invariant() == "omega0 = 0 on the walls");
    CHECK(e.measured() == 0.25);
    CHECK(std::string(e.what()).find("omega0 = 0 on the walls") != std::string::npos);
    CHECK(std::string(e.what()).find("0.25") != std::string::npos);
}

TEST_CASE("shear sweep matches the closed form") {
    const Grid g(16, 16, 16);
    const SweepResult r = run_sweep({DataKind::Shear}, kNus, sweep_config(g, 1e-2, 1.0));
    REQUIRE(r.rows.size() == 4);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const SweepRow& row = r.rows[i];
        CHECK(row.nu == kNus[i]);
        CHECK(row.steps == 100);
        CHECK(row.sup_err2 == doctest::Approx(shear_closed_form(row.nu, 1.0)).epsilon(1e-8));
        CHECK_FALSE(row.rho_err2.has_value());
        // int_0^T ||grad w||^2 = 2 pi^4 int (1 - e^{-nu pi^2 t})^2 dt
        const double a = row.nu * pi * pi;
        const double exact =
            2.0 * pi * pi * pi * pi *
            (1.0 - 2.0 * (1.0 - std::exp(-a)) / a + (1.0 - std::exp(-2.0 * a)) / (2.0 * a));
        CHECK(row.grad_err2_int == doctest::Approx(exact).epsilon(1e-7));
        REQUIRE(r.series[i].times.size() == 101);
        CHECK(r.series[i].err2.front() == 0.0);
    }
    CHECK(r.kind == DataKind::Shear);
    CHECK(contains(r.warnings, "decades"));
    CHECK(contains(r.warnings, "nu=0.00125 below"));
}

TEST_CASE("shear sweep rate") {
    const Grid g(16, 16, 16);
    const SweepResult r = run_sweep({DataKind::Shear}, kNus, sweep_config(g, 2.5e-3, 0.25));
    const SweepFits f = fit_sweep(r);
    REQUIRE(f.sup);
    CHECK(f.sup->slope == doctest::Approx(2.0).epsilon(0.01));
    CHECK(f.sup->r_squared > 0.9999);
    REQUIRE(f.grad);
    CHECK(f.grad->slope >= 0.9);
    CHECK_FALSE(f.rho);
}

TEST_CASE("zero data gives zero errors") {
    const Grid g(16, 16, 16);
    auto zero = [&](double) {
        InitialData d;
        d.reference = VelocityState(g);
        d.viscous = VelocityState(g);
        return d;
    };
    const SweepResult r = run_sweep(zero, kNus, sweep_config(g, 1e-2, 1.0));
    for (const SweepRow& row : r.rows) {
        CHECK(row.sup_err2 == 0.0);
        CHECK(row.grad_err2_int == 0.0);
    }
    const SweepFits f = fit_sweep(r);
    CHECK_FALSE(f.sup);
    CHECK_FALSE(f.grad);
    CHECK(contains(f.notes, "exact coincidence"));
}

TEST_CASE("interior blob sweep") {
    const Grid g(16, 16, 16);
    SweepConfig c = sweep_config(g, 5e-3, 0.5);
    const SweepResult r = run_sweep({DataKind::InteriorBlob}, kNus, c);
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].sup_err2 < r.rows[i - 1].sup_err2);
        CHECK(r.rows[i].grad_err2_int < r.rows[i - 1].grad_err2_int);
    }
    const SweepFits f = fit_sweep(r);
    REQUIRE(f.sup);
    CHECK(f.sup->slope >= 1.9);
    CHECK(f.sup->slope <= 2.3);

    SUBCASE("threads do not change the values") {
        c.threads = 3;
        const SweepResult t = run_sweep({DataKind::InteriorBlob}, kNus, c);
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            CHECK(t.rows[i].sup_err2 == r.rows[i].sup_err2);
            CHECK(t.rows[i].grad_err2_int == r.rows[i].grad_err2_int);
            CHECK(t.series[i].err2 == r.series[i].err2);
        }
        CHECK(t.warnings == r.warnings);
    }
}

TEST_CASE("sweep validation") {
    const Grid g(16, 16, 16);
    const DataClass shear{DataKind::Shear};

    SUBCASE("too few viscosities") {
        const std::vector<double> nus{1e-2, 5e-3, 2.5e-3};
        CHECK_THROWS_AS(run_sweep(shear, nus, sweep_config(g, 1e-2, 1.0)), ValidationError);
    }
    SUBCASE("not decreasing and not positive, all reported") {
        const std::vector<double> nus{1e-2, 2e-2, 0.0, 1e-3};
        try {
            run_sweep(shear, nus, sweep_config(g, 1e-2, 1.0));
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(contains(e.problems(), "strictly decreasing"));
            CHECK(contains(e.problems(), "> 0"));
        }
    }
    SUBCASE("t_end not a whole number of steps") {
        CHECK_THROWS_AS(run_sweep(shear, kNus, sweep_config(g, 3e-3, 1.0)), ValidationError);
    }
    SUBCASE("fewer than 100 steps") {
        CHECK_THROWS_AS(run_sweep(shear, kNus, sweep_config(g, 2e-2, 1.0)), ValidationError);
    }
    SUBCASE("density class needs the boussinesq sweep") {
        CHECK_THROWS_AS(run_sweep({DataKind::BoussinesqBlob}, kNus, sweep_config(g, 1e-2, 1.0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(boussinesq_sweep(shear, kNus, sweep_config(g, 1e-2, 1.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("sweep reports runs that blow up") {
    const Grid g(16, 16, 16);
    const InitialData blob = make_initial_data({DataKind::InteriorBlob}, 0.0, g);
    auto make = [&](double nu) {
        InitialData d = blob;
        if (nu < 3e-3) d.viscous *= 1e6;
        return d;
    };
    try {
        run_sweep(make, kNus, sweep_config(g, 0.1, 10.0));
        FAIL("expected SweepError");
    } catch (const SweepError& e) {
        CHECK(e.failed() == std::vector<double>{2.5e-3, 1.25e-3});
        CHECK(std::string(e.what()).find("run 0.0025") != std::string::npos);
    }
}

TEST_CASE("boussinesq sweep") {
    const Grid g(16, 16, 16);
    const SweepConfig c = sweep_config(g, 5e-3, 0.5);

    SUBCASE("zero density reduces to the velocity sweep") {
        auto make = [&](double nu) {
            InitialData d = make_initial_data({DataKind::InteriorBlob}, nu, g);
            d.rho_reference = SpectralScalar(g, Parity::Odd);
            d.rho_viscous = SpectralScalar(g, Parity::Odd);
            return d;
        };
        const SweepResult b = boussinesq_sweep(make, kNus, c);
        const SweepResult v = run_sweep({DataKind::InteriorBlob}, kNus, c);
        for (std::size_t i = 0; i < b.rows.size(); ++i) {
            CHECK(b.rows[i].sup_err2 == doctest::Approx(v.rows[i].sup_err2).epsilon(1e-12));
            CHECK(b.rows[i].grad_err2_int ==
                  doctest::Approx(v.rows[i].grad_err2_int).epsilon(1e-12));
            CHECK(b.rows[i].rho_err2 == 0.0);
        }
    }

    SUBCASE("perturbed blob: density errors decrease with nu") {
        const SweepResult r =
            boussinesq_sweep({DataKind::BoussinesqBlob, Perturbation{1.0, 1}}, kNus, c);
        for (std::size_t i = 1; i < r.rows.size(); ++i) {
            CHECK(*r.rows[i].rho_err2 < *r.rows[i - 1].rho_err2);
            CHECK(r.rows[i].sup_err2 < r.rows[i - 1].sup_err2);
        }
        const SweepFits f = fit_sweep(r);
        REQUIRE(f.rho);
        CHECK(f.rho->slope >= 1.9);
        CHECK(f.sup->slope >= 1.9);
        CHECK(r.kind == DataKind::BoussinesqBlob);
    }
}

TEST_CASE("epsilon sweep") {
    const Grid g(16, 16, 16);
    const SweepConfig c = sweep_config(g, 5e-3, 0.5);
    const DataClass cls{DataKind::BoussinesqBlob};

    SUBCASE("errors decrease and dissipation stays bounded") {
        const std::vector<double> eps{1e-2, 1e-3, 1e-4};
        const EpsilonSweep e = epsilon_sweep(cls, 1e-2, eps, c);
        CHECK(e.errors_decreasing);
        CHECK(e.dissipation_bounded);
        CHECK(e.initial_energy == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(e.table.rows.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(e.table.rows[i].epsilon == eps[i]);
            CHECK(e.table.rows[i].nu == 1e-2);
            REQUIRE(e.table.rows[i].weighted_dissipation);
            CHECK(*e.table.rows[i].weighted_dissipation > 0.0);
            CHECK(*e.table.rows[i].weighted_dissipation <= e.initial_energy);
        }
    }
    SUBCASE("epsilon = 0 row has zero error") {
        const std::vector<double> eps{1e-2, 1e-3, 0.0};
        const EpsilonSweep e = epsilon_sweep(cls, 1e-2, eps, c);
        CHECK(e.table.rows[2].sup_err2 == 0.0);
        CHECK(*e.table.rows[2].rho_err2 == 0.0);
        CHECK(*e.table.rows[2].weighted_dissipation == 0.0);
    }
    SUBCASE("validation") {
        const std::vector<double> two{1e-2, 1e-3};
        CHECK_THROWS_AS(epsilon_sweep(cls, 1e-2, two, c), ValidationError);
        const std::vector<double> up{1e-3, 1e-2, 1e-4};
        CHECK_THROWS_AS(epsilon_sweep(cls, 1e-2, up, c), ValidationError);
        const std::vector<double> ok{1e-2, 1e-3, 1e-4};
        CHECK_THROWS_AS(epsilon_sweep(cls, 0.0, ok, c), ValidationError);
        CHECK_THROWS_AS(epsilon_sweep({DataKind::Shear}, 1e-2, ok, c), std::invalid_argument);
    }
}

TEST_CASE("rate fits") {
    SUBCASE("exact power laws") {
        std::vector<std::pair<double, double>> sq, p15;
        for (double nu : kNus) {
            sq.emplace_back(nu, nu * nu);
            p15.emplace_back(nu, 3.0 * std::pow(nu, 1.5));
        }
        const RateFit a = fit_rate(sq);
        CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.count == 4);
        const RateFit b = fit_rate(p15);
        CHECK(b.slope == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(b.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-13));
    }
    SUBCASE("rescaling the values only shifts the intercept") {
        std::vector<std::pair<double, double>> p, q;
        const std::vector<double> v{3.1, 0.7, 0.22, 0.04, 0.013};
        for (std::size_t i = 0; i < v.size(); ++i) {
            p.emplace_back(std::pow(0.5, i), v[i]);
            q.emplace_back(std::pow(0.5, i), 17.0 * v[i]);
        }
        const RateFit a = fit_rate(p), b = fit_rate(q);
        CHECK(std::abs(a.slope - b.slope) <= 1e-12);
        CHECK(std::abs(b.intercept - a.intercept - std::log(17.0)) <= 1e-12);
        CHECK(std::abs(a.r_squared - b.r_squared) <= 1e-12);
        CHECK(a.r_squared < 1.0);
    }
    SUBCASE("invalid input") {
        const std::vector<std::pair<double, double>> three{{1e-2, 1.0}, {5e-3, 0.5}, {1e-3, 0.1}};
        CHECK_THROWS_AS(fit_rate(three), std::invalid_argument);
        const std::vector<std::pair<double, double>> neg{
            {1e-2, 1.0}, {5e-3, 0.5}, {1e-3, -0.1}, {1e-4, 0.01}};
        CHECK_THROWS_AS(fit_rate(neg), std::invalid_argument);
        const std::vector<std::pair<double, double>> zero{
            {1e-2, 1.0}, {5e-3, 0.0}, {1e-3, 0.1}, {1e-4, 0.01}};
        CHECK_THROWS_AS(fit_rate(zero), std::invalid_argument);
    }
}

TEST_CASE("energy budget of the difference") {
    const Grid g(16, 16, 16);

    SUBCASE("shear flow against the closed form") {
        const double nu = 1e-2;
        const auto visc = run(exact_shear_solution(0.0, 0.0, g), g, nu, 1e-2, 1.0);
        Trajectory<VelocityState> ref = visc;
        for (auto& s : ref.snapshots) s.state = exact_shear_solution(0.0, 0.0, g);
        const GronwallBudget b = gronwall_budget(visc, ref, nu);
        REQUIRE(b.times.size() == 101);
        for (std::size_t i = 0; i < b.times.size(); ++i) {
            const double t = b.times[i];
            const double d = std::exp(-nu * pi * pi * t) - 1.0;
            CHECK(std::abs(b.nonlinear[i]) <= 1e-14);
            CHECK(b.interior[i] ==
                  doctest::Approx(-nu * pi * pi * 2.0 * pi * pi * d).epsilon(1e-10));
            CHECK(b.boundary[i] == 0.0);
            CHECK(b.curvature[i] == 0.0);
            CHECK(b.energy[i] == doctest::Approx(pi * pi * d * d).epsilon(1e-10));
        }
        CHECK(b.closure <= 1e-10);
        CHECK(b.inequality_margin >= -1e-12);
    }

    SUBCASE("identical runs") {
        const auto u = make_initial_data({DataKind::InteriorBlob}, 0.0, g).reference;
        const auto t = run(u, g, 1e-2, 1e-2, 0.2);
        const GronwallBudget b = gronwall_budget(t, t, 1e-2);
        for (std::size_t i = 0; i < b.times.size(); ++i) {
            CHECK(b.energy[i] == 0.0);
            CHECK(b.nonlinear[i] == 0.0);
            CHECK(b.interior[i] == 0.0);
            CHECK(b.boundary[i] == 0.0);
            CHECK(b.dissipation[i] == 0.0);
        }
        CHECK(b.closure == 0.0);
        CHECK(b.inequality_margin == 0.0);
    }

    SUBCASE("closure is fourth order in dt") {
        const double nu = 1e-2;
        const auto u = make_initial_data({DataKind::InteriorBlob}, 0.0, g).reference;
        double closure[2];
        for (int k = 0; k < 2; ++k) {
            const double dt = 2e-2 / (1 << k);
            const GronwallBudget b =
                gronwall_budget(run(u, g, nu, dt, 0.5), run(u, g, 0.0, dt, 0.5), nu);
            for (double x : b.boundary) CHECK(std::abs(x) <= 1e-12);
            CHECK(b.inequality_margin >= -1e-10);
            closure[k] = b.closure;
        }
        MESSAGE("closure ", closure[0], " -> ", closure[1]);
        CHECK(closure[1] < 1e-9);
        CHECK(std::log2(closure[0] / closure[1]) >= 3.7);
    }

    SUBCASE("mismatched trajectories") {
        const auto u = exact_shear_solution(0.0, 0.0, g);
        const auto a = run(u, g, 1e-2, 1e-2, 0.1);
        const auto b = run(u, g, 1e-2, 1e-2, 0.2);
        CHECK_THROWS_AS(gronwall_budget(a, b, 1e-2), std::invalid_argument);
        auto c = a;
        c.snapshots[3].time += 1e-3;
        CHECK_THROWS_AS(gronwall_budget(a, c, 1e-2), std::invalid_argument);
        const Grid h(16, 16, 8);
        const auto d = run(exact_shear_solution(0.0, 0.0, h), h, 1e-2, 1e-2, 0.1);
        CHECK_THROWS_AS(gronwall_budget(a, d, 1e-2), GridMismatchError);
    }
}
