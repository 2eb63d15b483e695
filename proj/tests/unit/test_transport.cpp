#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "torusma/ma_solver.hpp"
#include "torusma/sampler.hpp"
#include "torusma/transport.hpp"

using namespace torusma;
using testutil::kTau;

namespace {

Configuration random_config(int N, int n, CounterRng& rng) {
    Configuration c;
    for (int i = 0; i < N; ++i) {
        std::vector<double> p(static_cast<std::size_t>(n));
        for (double& t : p) t = rng.uniform();
        c.points.emplace_back(std::move(p));
    }
    return c;
}

DiscreteMeasure atoms1d(std::initializer_list<double> xs) {
    std::vector<Atom> a;
    for (double x : xs) a.push_back({TorusPoint{x}, 1.0 / static_cast<double>(xs.size())});
    return DiscreteMeasure::from_atoms(a);
}

}  // namespace

TEST_CASE("configuration distance") {
    Configuration x, y;
    x.points = {TorusPoint{0.0}, TorusPoint{0.5}};
    y.points = {TorusPoint{0.5}, TorusPoint{0.0}};
    CHECK(config_distance(x, y) == 0.0);
    Configuration a, b;
    a.points = {TorusPoint{0.1}};
    b.points = {TorusPoint{0.3}};
    CHECK(config_distance(a, b) == doctest::Approx(0.2).epsilon(1e-14));
    auto rng = CounterRng::stream(1, 2);
    for (int s = 0; s < 10; ++s) {
        const auto p = random_config(6, 2, rng), q = random_config(6, 2, rng);
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e9;
        do {
            double t = 0.0;
            for (std::size_t i = 0; i < 6; ++i) t += torus_distance(p.points[i], q.points[static_cast<std::size_t>(perm[i])]);
            best = std::min(best, t / 6.0);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(config_distance(p, q) == doctest::Approx(best).epsilon(1e-13));
    }
}

TEST_CASE("Wasserstein costs") {
    const auto mu = atoms1d({0.1, 0.4, 0.8});
    CHECK(wasserstein_cost(mu, mu, 2) == 0.0);
    CHECK(wasserstein_cost(atoms1d({0.0, 0.5}), atoms1d({0.25, 0.75}), 2) == doctest::Approx(0.03125).epsilon(1e-14));
    CHECK(wasserstein_cost(atoms1d({0.0, 0.5}), atoms1d({0.25, 0.75}), 2, TransportRoute::assignment) ==
          doctest::Approx(0.03125).epsilon(1e-14));

    std::vector<Atom> delta(1024, Atom{TorusPoint{0.0}, 1.0 / 1024});
    const auto d0 = DiscreteMeasure::from_atoms(delta);
    CHECK(wasserstein_cost(d0, DiscreteMeasure::uniform(1, 1024), 2) == doctest::Approx(1.0 / 24).epsilon(1e-3));
    CHECK(wasserstein_to_uniform(d0, 2) == doctest::Approx(1.0 / 24).epsilon(1e-14));
    CHECK(wasserstein_to_uniform(d0, 1) == doctest::Approx(0.25).epsilon(1e-14));

    // circle formula against assignment on random equal-weight instances
    auto rng = CounterRng::stream(2, 2);
    for (int s = 0; s < 20; ++s) {
        std::vector<Atom> a, b;
        for (int i = 0; i < 7; ++i) {
            a.push_back({TorusPoint{rng.uniform()}, 1.0 / 7});
            b.push_back({TorusPoint{rng.uniform()}, 1.0 / 7});
        }
        const auto ma = DiscreteMeasure::from_atoms(a), mb = DiscreteMeasure::from_atoms(b);
        for (int p : {1, 2})
            CHECK(wasserstein_cost(ma, mb, p) ==
                  doctest::Approx(wasserstein_cost(ma, mb, p, TransportRoute::assignment)).epsilon(1e-10));
    }
}

TEST_CASE("atomization") {
    const auto g = DiscreteMeasure::from_masses(GridField(1, 4, std::vector<double>{0.25, 0.5, 0.0, 0.25}));
    CHECK(common_denominator(g) == 4);
    const auto pts = atomize(g, 4);
    REQUIRE(pts.size() == 4u);
    CHECK(pts[1][0] == pts[2][0]);
}

TEST_CASE("relative entropy") {
    const auto u = DiscreteMeasure::uniform(1, 64);
    CHECK(relative_entropy(u, u) == 0.0);
    GridField half(1, 64, 0.0);
    for (int i = 0; i < 32; ++i) half[static_cast<std::size_t>(i)] = 1.0;
    const auto h = DiscreteMeasure::normalized_density(half);
    CHECK(relative_entropy(h, u) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(std::isinf(relative_entropy(u, h)));
    CHECK_THROWS_AS(relative_entropy(u, DiscreteMeasure::uniform(1, 32)), Error);
}

TEST_CASE("rate function and dual objective") {
    const auto u = DiscreteMeasure::uniform(1, 128);
    const auto r = rate_function(u, 1.0, u, u);
    CHECK(r.G_value == 0.0);
    // W^2 of the uniform grid measure to continuous dx is 1/(24 G^2)
    CHECK(r.w2 == doctest::Approx(1.0 / (24.0 * 128 * 128)).epsilon(1e-12));
    CHECK(r.entropy == 0.0);
    CHECK(r.constant_C == doctest::Approx(-1.0 / (24.0 * 128 * 128)).epsilon(1e-12));
    CHECK(kantorovich_dual(GridField(1, 128, 0.0), u) == 0.0);
    // weak duality for random potentials, semidiscrete dual against continuous dx
    const auto mu = DiscreteMeasure::normalized_density(
        GridField::from_function(1, 128, [](std::span<const double> x) { return 1.0 + 0.8 * std::sin(kTau * x[0]); }));
    const double primal = wasserstein_to_uniform(mu, 2);
    for (int s = 0; s < 20; ++s) {
        const GridField phi = testutil::random_field(1, 128, 100 + static_cast<std::uint64_t>(s), 0.05);
        CHECK(kantorovich_dual(phi, mu, XiRule::semidiscrete) <= primal + 1e-12);
    }
}

TEST_CASE("duality gap") {
    const auto u = DiscreteMeasure::uniform(1, 64);
    const auto r0 = duality_gap(u, 10);
    CHECK(std::fabs(r0.gap) <= 1e-12);
    CHECK(std::fabs(r0.gap_history.front()) <= 1e-12);

    auto rng = CounterRng::stream(4, 2);
    for (int s = 0; s < 5; ++s) {
        std::vector<Atom> a;
        for (int i = 0; i < 8; ++i) a.push_back({TorusPoint{rng.uniform()}, 1.0 / 8});
        const auto mu = DiscreteMeasure::from_atoms(a);
        const auto res = duality_gap(mu, 500);
        CHECK(res.gap <= 1e-6);
        CHECK(res.weak_duality_held);
        CHECK(res.primal == doctest::Approx(wasserstein_to_uniform(mu, 2)).epsilon(1e-14));
        // the primal against a fine uniform grid via assignment agrees to O(h^2)
        CHECK(wasserstein_cost(mu, DiscreteMeasure::uniform(1, 1024), 2, TransportRoute::assignment) ==
              doctest::Approx(res.primal).epsilon(1e-5));
        for (std::size_t i = 1; i < res.gap_history.size(); ++i) CHECK(res.gap_history[i] <= res.gap_history[i - 1]);
    }
}

TEST_CASE("empirical isometry") {
    auto rng = CounterRng::stream(5, 2);
    for (int s = 0; s < 30; ++s) {
        const int N = 1 + s % 6;
        const auto x = random_config(N, 1, rng), y = random_config(N, 1, rng);
        CHECK(wasserstein_cost(empirical_measure(x), empirical_measure(y), 1) ==
              doctest::Approx(config_distance(x, y)).epsilon(1e-12));
    }
}
