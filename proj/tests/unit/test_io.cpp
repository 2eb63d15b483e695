#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "torusma/io.hpp"
#include "torusma/parallel.hpp"

using namespace torusma;

TEST_CASE("grid CSV round trip is exact") {
    for (int dim : {1, 2}) {
        const GridField f = testutil::random_field(dim, 16, 3, 1e3);
        std::stringstream ss;
        io::write_grid_csv(ss, f);
        const GridField g = io::read_grid_csv(ss);
        REQUIRE(g.same_grid(f));
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
    }
    std::stringstream bad("# 1,3\n1\n2\n");
    CHECK_THROWS_AS(io::read_grid_csv(bad), Error);
    std::stringstream junk("# 1,2\n1\nfoo\n");
    CHECK_THROWS_AS(io::read_grid_csv(junk), Error);
}

TEST_CASE("number formatting round-trips") {
    auto rng = CounterRng::stream(4, 4);
    for (int s = 0; s < 1000; ++s) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, 20.0 * rng.uniform() - 10.0);
        CHECK(std::stod(io::fmt(v)) == v);
    }
}

TEST_CASE("ensemble JSON") {
    const auto dir = std::filesystem::temp_directory_path() / "torusma_io_test";
    std::filesystem::create_directories(dir);
    io::write_grid_csv(dir / "mu0.csv", GridField(1, 8, 2.0));
    const nlohmann::json j = {{"n", 1}, {"k", 3}, {"beta", 0.5}, {"mu0", {{"grid_csv", "mu0.csv"}}}};
    const EnsembleSpec spec = io::ensemble_from_json(j, dir);
    CHECK(spec.N() == 3);
    CHECK(spec.beta == 0.5);
    REQUIRE(spec.mu0.has_value());
    CHECK(spec.mu0->masses()[0] == doctest::Approx(1.0 / 8));
    const auto back = io::ensemble_to_json(spec, "mu0.csv");
    const EnsembleSpec again = io::ensemble_from_json(back, dir);
    CHECK(again.points.size() == 3u);
    CHECK(again.points[2][0] == spec.points[2][0]);
    CHECK_THROWS_AS(io::ensemble_from_json(nlohmann::json{{"n", 1}}), Error);
    CHECK_THROWS_AS(io::ensemble_from_json(nlohmann::json{{"k", 2}, {"beta", 1}, {"mu0", "cosine"}}), Error);
}

TEST_CASE("parallel_for writes by index and rethrows") {
    std::vector<int> out(100, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
    CHECK_THROWS(parallel_for(10, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));
}

TEST_CASE("counter RNG streams") {
    auto a = CounterRng::stream(9, 0), b = CounterRng::stream(9, 0), c = CounterRng::stream(9, 1);
    for (int i = 0; i < 10; ++i) {
        const auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
    auto r = CounterRng::stream(1, 1);
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        m += z / n;
        v += z * z / n;
    }
    CHECK(std::fabs(m) < 0.01);
    CHECK(std::fabs(v - 1.0) < 0.02);
}
