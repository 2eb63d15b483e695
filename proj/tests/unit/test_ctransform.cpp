#include <doctest.h>

#include "helpers.hpp"
#include "torusma/ctransform.hpp"
#include "torusma/transport.hpp"

using namespace torusma;
using testutil::kTau;

namespace {

// phi^c(y) = max over nodes x of -c(x,y) - phi(x), by exhaustive search
GridField brute_c_transform(const GridField& phi) {
    GridField out(phi.dim(), phi.resolution());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        double best = -1e300;
        for (std::size_t i = 0; i < phi.size(); ++i)
            best = std::max(best, -cost(phi.node(i), phi.node(j)) - phi[i]);
        out[j] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("c-transform of constants") {
    const GridField zero(1, 32, 0.0);
    const GridField z = c_transform(zero);
    for (double v : z.values()) CHECK(v == 0.0);
    const GridField a(2, 8, 0.7);
    const GridField ac = c_transform(a);
    for (double v : ac.values()) CHECK(v == doctest::Approx(-0.7).epsilon(1e-15));
}

TEST_CASE("c-transform matches exhaustive maximization") {
    const auto phi = GridField::from_function(1, 256, [](std::span<const double> x) { return 0.1 * std::cos(kTau * x[0]); });
    const GridField fast = c_transform(phi), slow = brute_c_transform(phi);
    CHECK(testutil::max_abs_diff(fast.values(), slow.values()) <= 1e-15);
    for (int s = 0; s < 3; ++s) {
        const GridField r = testutil::random_field(s == 2 ? 2 : 1, s == 2 ? 12 : 64, s, 0.5);
        CHECK(testutil::max_abs_diff(c_transform(r).values(), brute_c_transform(r).values()) <= 1e-15);
    }
}

TEST_CASE("projection") {
    const GridField zero(1, 64, 0.0);
    const GridField pz = project_cconvex(zero);
    for (double v : pz.values()) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
    GridField spike(1, 64, 0.0);
    spike[10] = 1.0;
    const GridField p = project_cconvex(spike);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] <= spike[i] + 1e-15);
    CHECK(p[10] < 0.5);
    // the double transform is idempotent
    const GridField r = testutil::random_field(1, 48, 5, 0.4);
    const GridField p1 = project_cconvex(r), p2 = project_cconvex(p1);
    CHECK(testutil::max_abs_diff(p1.values(), p2.values()) <= 1e-15);
}

TEST_CASE("c-gradient and Monge-Ampere measure") {
    const GridField zero(1, 64, 0.0);
    const CGradientField g = c_gradient(zero);
    for (std::size_t i = 0; i < zero.size(); ++i) {
        CHECK(g.defined_mask[i]);
        CHECK(g.map[i][0] == doctest::Approx(zero.node(i)[0]));
    }
    const auto smooth = project_cconvex(
        GridField::from_function(1, 128, [](std::span<const double> x) { return 0.1 * std::cos(kTau * x[0]); }));
    CHECK(c_gradient(smooth).defined_fraction() == 1.0);
    // a convex kink of the lift at 1/2 makes the map multivalued there
    const auto kinked = GridField::from_function(1, 128, [](std::span<const double> x) { return 0.1 * std::fabs(x[0] - 0.5); });
    const CGradientField gk = c_gradient(kinked);
    CHECK_FALSE(gk.defined_mask[64]);
    CHECK(gk.defined_mask[32]);

    const GridField m0 = ma_measure(zero).masses();
    for (double v : m0.values()) CHECK(v == doctest::Approx(1.0 / 64));
    const GridField shifted(1, 64, 3.0);
    CHECK(testutil::max_abs_diff(ma_measure(shifted).masses().values(), ma_measure(zero).masses().values()) == 0.0);

    const int G = 256;
    const auto phi = project_cconvex(
        GridField::from_function(1, G, [](std::span<const double> x) { return 0.2 / (4 * std::numbers::pi * std::numbers::pi) * std::cos(kTau * x[0]); }));
    const auto h = ma_hessian(phi);
    CHECK_FALSE(h.negative_determinant);
    CHECK(wasserstein_cost(ma_measure(phi), DiscreteMeasure::normalized_density(h.density), 1) <= 2.0 / G);

    // not quasi-convex before projection: the projection has flat pieces with zero density
    const auto flat = project_cconvex(
        GridField::from_function(1, G, [](std::span<const double> x) { return 0.2 * std::cos(kTau * x[0]); }));
    const auto hf = ma_hessian(flat);
    double lowest = 1.0;
    for (double v : hf.density.values()) lowest = std::min(lowest, v);
    CHECK(lowest > -1e-9);
    CHECK(wasserstein_cost(ma_measure(flat), DiscreteMeasure::normalized_density(hf.density), 1) <= 2.0 / G);
}

TEST_CASE("finite-difference Hessian") {
    const GridField zero(1, 32, 0.0);
    const GridField hz = ma_hessian(zero).density;
    for (double v : hz.values()) CHECK(v == 1.0);
    const int G = 512;
    const double a = 0.02;
    const auto phi = GridField::from_function(1, G, [&](std::span<const double> x) { return a * std::cos(kTau * x[0]); });
    const auto h = ma_hessian(phi);
    double err = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        err = std::max(err, std::fabs(h.density[i] - (1.0 - kTau * kTau * a * std::cos(kTau * phi.node(i)[0]))));
    CHECK(err <= 1e-3);
    const auto steep = GridField::from_function(1, 64, [](std::span<const double> x) { return std::cos(kTau * x[0]); });
    CHECK(ma_hessian(steep).negative_determinant);
}

TEST_CASE("xi functional") {
    const GridField zero(1, 256, 0.0);
    CHECK(xi(zero) == 0.0);
    const auto phi = GridField::from_function(1, 256, [](std::span<const double> x) { return 0.1 * std::cos(kTau * x[0]); });
    GridField shifted = phi;
    for (double& v : shifted.values()) v += 0.3;
    CHECK(xi(shifted) == doctest::Approx(xi(phi) - 0.3).epsilon(1e-14));
    CHECK(xi(phi) == doctest::Approx(quadrature(brute_c_transform(phi))).epsilon(1e-14));
    // semidiscrete: distance to the nearest node, integrated exactly
    CHECK(xi(zero, XiRule::semidiscrete) == doctest::Approx(-1.0 / (24.0 * 256 * 256)).epsilon(1e-12));
}

TEST_CASE("semidiscrete Laguerre cells match a fine argmax partition") {
    auto rng = CounterRng::stream(11, 0);
    for (int s = 0; s < 5; ++s) {
        std::vector<double> x(6), psi(6);
        for (int i = 0; i < 6; ++i) {
            x[static_cast<std::size_t>(i)] = (i + 0.8 * rng.uniform()) / 6.0;
            psi[static_cast<std::size_t>(i)] = 0.01 * (2.0 * rng.uniform() - 1.0);
        }
        const sd::Laguerre L = sd::laguerre(x, psi);
        const int M = 200000;
        std::vector<double> count(6, 0.0);
        double xi_est = 0.0;
        for (int t = 0; t < M; ++t) {
            const double y = (t + 0.5) / M;
            int best = 0;
            double bv = -1e300;
            for (int i = 0; i < 6; ++i) {
                const double d = periodic_offset(x[static_cast<std::size_t>(i)], y);
                const double v = -0.5 * d * d - psi[static_cast<std::size_t>(i)];
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            count[static_cast<std::size_t>(best)] += 1.0 / M;
            xi_est += bv / M;
        }
        for (int i = 0; i < 6; ++i) CHECK(L.mass[static_cast<std::size_t>(i)] == doctest::Approx(count[static_cast<std::size_t>(i)]).epsilon(1e-4));
        CHECK(L.xi == doctest::Approx(xi_est).epsilon(1e-8));
        double total = 0.0;
        for (double m : L.mass) total += m;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("semidiscrete masses equal h(1 + D2 phi) for c-convex fields") {
    const int G = 128;
    const auto phi = GridField::from_function(1, G, [](std::span<const double> x) { return 0.01 * std::sin(kTau * x[0]); });
    const GridField m = sd::masses(phi);
    const auto h = ma_hessian(phi);
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(m[i] == doctest::Approx(h.density[i] / G).epsilon(1e-10));
}
