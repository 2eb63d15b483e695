#include <doctest.h>

#include "helpers.hpp"
#include "torusma/ma_solver.hpp"

using namespace torusma;
using testutil::kTau;

namespace {

DiscreteMeasure cosine_mu0(int G) {
    return DiscreteMeasure::normalized_density(
        GridField::from_function(1, G, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(kTau * x[0]); }));
}

double sup(const GridField& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace

TEST_CASE("gamma density") {
    const int G = 64;
    const auto g = gamma_density(1, G);
    double total = 0.0;
    const GridField gm = g.masses();
    for (double v : gm.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    const GridField d = g.density();
    // periodized unit Gaussian, nearly flat on a unit period
    CHECK(d[0] / d[32] == doctest::Approx(testutil::lattice_sum_1d(1, 0.0) / testutil::lattice_sum_1d(1, 0.5)).epsilon(1e-14));
    CHECK(std::fabs(d[0] / d[32] - 1.0) < 1e-7);
    const auto g2 = gamma_density(2, 8);
    CHECK(g2.density()[0] == doctest::Approx(d[0] * d[0]).epsilon(1e-7));
}

TEST_CASE("I and F functionals") {
    const auto u = DiscreteMeasure::uniform(1, 64);
    CHECK(I_functional(GridField(1, 64, 0.0), u) == 0.0);
    CHECK(I_functional(GridField(1, 64, 0.37), u) == doctest::Approx(0.37).epsilon(1e-15));
    const auto phi = testutil::random_field(1, 64, 1, 1.0);
    double direct = 0.0;
    const auto mu0 = cosine_mu0(64);
    for (std::size_t i = 0; i < phi.size(); ++i) direct += std::exp(phi[i]) * mu0.masses()[i];
    CHECK(I_functional(phi, mu0) == doctest::Approx(std::log(direct)).epsilon(1e-14));
    CHECK(F_functional(GridField(1, 64, 0.0), 1.0, u) == 0.0);
    CHECK(F_functional(GridField(1, 64, 0.0), 1.0, u, XiRule::semidiscrete) ==
          doctest::Approx(-1.0 / (24.0 * 64 * 64)).epsilon(1e-12));
    CHECK_THROWS_AS(F_functional(phi, 0.0, u), Error);
    // F is invariant under constants
    GridField shifted = phi;
    for (double& v : shifted.values()) v += 0.5;
    CHECK(F_functional(shifted, 2.0, mu0) == doctest::Approx(F_functional(phi, 2.0, mu0)).epsilon(1e-13));
}

TEST_CASE("solver fixed point and validation") {
    const auto res = minimize_F(1.0, DiscreteMeasure::uniform(1, 256), 256, 1e-9);
    CHECK(res.converged);
    CHECK(sup(res.phi) <= 1e-6);
    CHECK(res.residual <= 1e-6);
    CHECK_THROWS_AS(minimize_F(0.0, DiscreteMeasure::uniform(1, 64), 64), Error);
    CHECK_THROWS_AS(minimize_F(1.0, DiscreteMeasure::uniform(1, 32), 64), Error);
    CHECK_THROWS_AS(minimize_F(1.0, DiscreteMeasure::uniform(1, 64), 64, -1.0), Error);
}

TEST_CASE("solver against the ODE oracle") {
    const int G = 256;
    const auto f = GridField::from_function(1, G, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(kTau * x[0]); });
    for (double beta : {0.5, 1.0, 2.0, -0.5}) {
        const auto res = minimize_F(beta, DiscreteMeasure::normalized_density(f), G, 1e-10);
        REQUIRE(res.converged);
        const GridField ode = ode_oracle_1d(beta, f, G);
        double err = 0.0;
        for (std::size_t i = 0; i < ode.size(); ++i) err = std::max(err, std::fabs(ode[i] - res.phi[i]));
        CHECK(err <= 1e-3);
        CHECK(ode_residual(beta, f, ode) <= 1e-10);
        double mean = 0.0;
        for (double v : res.phi.values()) mean += v / G;
        CHECK(std::fabs(mean) <= 1e-14);
        for (std::size_t i = 1; i < res.F_history.size(); ++i) CHECK(res.F_history[i] <= res.F_history[i - 1] + 1e-13);
    }
    const auto flat = ode_oracle_1d(1.7, GridField(1, 64, 1.0), 64);
    CHECK(sup(flat) <= 1e-13);
}

TEST_CASE("solution satisfies the equation in measure form") {
    const int G = 128;
    const auto mu0 = cosine_mu0(G);
    const auto res = minimize_F(1.0, mu0, G, 1e-10);
    const GridField ma = sd::masses(res.phi), target = target_masses(res.phi, 1.0, mu0);
    CHECK(testutil::max_abs_diff(ma.values(), target.values()) * G <= 1e-8);
}

TEST_CASE("two-dimensional solve") {
    const int G = 24;
    const auto mu0 = DiscreteMeasure::normalized_density(GridField::from_function(
        2, G, [](std::span<const double> x) { return 1.0 + 0.3 * std::cos(kTau * x[0]) * std::cos(kTau * x[1]); }));
    const auto res = minimize_F(1.0, mu0, G, 1e-6, 500);
    CHECK(res.F_history.back() <= res.F_history.front());
    const auto u = minimize_F(1.0, DiscreteMeasure::uniform(2, 16), 16, 1e-9);
    CHECK(u.converged);
    CHECK(sup(u.phi) <= 1e-12);
}

TEST_CASE("c-geodesics") {
    const int G = 64;
    // random_cconvex is c-convex for the semidiscrete transform in 1-D
    const GridField p0 = random_cconvex(1, G, 3, 0.1), p1 = random_cconvex(1, G, 4, 0.1);
    CHECK(testutil::max_abs_diff(geodesic(p0, p1, 0.0, XiRule::semidiscrete).values(), p0.values()) <= 1e-14);
    CHECK(testutil::max_abs_diff(geodesic(p0, p1, 1.0, XiRule::semidiscrete).values(), p1.values()) <= 1e-14);
    const GridField q0 = project_cconvex(p0), q1 = project_cconvex(p1);
    CHECK(testutil::max_abs_diff(geodesic(q0, q1, 0.0).values(), q0.values()) <= 1e-14);
    CHECK(testutil::max_abs_diff(geodesic(q0, q1, 1.0).values(), q1.values()) <= 1e-14);
    const GridField zero(1, G, 0.0), a(1, G, 0.4);
    const GridField g1 = geodesic(zero, a, 0.25), g2 = geodesic(zero, a, 0.25, XiRule::semidiscrete);
    for (double v : g1.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
    for (double v : g2.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("uniqueness probes") {
    const auto r1 = uniqueness_probe(1.0, DiscreteMeasure::uniform(1, 128), 128, 5, 7);
    CHECK(r1.converged_count == 5);
    CHECK(r1.sup_spread <= 1e-6);
    const auto r2 = uniqueness_probe(-1.0, gamma_density(1, 128), 128, 4, 8);
    CHECK(r2.converged_count == 4);
    CHECK(r2.sup_spread <= 1e-3);
}
