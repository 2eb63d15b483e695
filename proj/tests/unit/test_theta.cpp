#include <doctest.h>

#include "helpers.hpp"
#include "torusma/theta.hpp"

using namespace torusma;

TEST_CASE("theta at the origin is a lattice sum") {
    const ThetaSpec spec{1, TorusPoint{0.0}, 0.0};
    double direct = 0.0;
    for (int m = -60; m <= 60; ++m) direct += std::exp(-m * m / 4.0);
    CHECK(theta_eval(spec, cplx(0.0, 0.0)).real() == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct == doctest::Approx(3.5449077018110318).epsilon(1e-14));
    CHECK_THROWS_AS(theta_eval(spec, cplx(0.0, 5.0)), Error);
}

TEST_CASE("theta series against direct summation at complex points") {
    auto rng = CounterRng::stream(1, 3);
    for (int k : {1, 2, 3}) {
        for (int s = 0; s < 10; ++s) {
            const double p = rng.uniform();
            const cplx z(10.0 * rng.uniform(), 4.0 * rng.uniform() - 2.0);
            cplx direct = 0.0;
            for (int m = -80; m <= 80; ++m) {
                const double mp = m + p;
                direct += std::exp(cplx(-k * mp * mp / 4.0, 0.0) + cplx(0.0, 0.5 * k * mp) * z);
            }
            const cplx t = theta_eval(ThetaSpec{k, TorusPoint{p}, 0.0}, z);
            CHECK(std::abs(t - direct) <= 1e-12 * std::abs(direct) + 1e-13);
        }
    }
}

TEST_CASE("det-perm identity") {
    const std::vector<cplx> c{cplx(0.3, -1.2)};
    const auto r1 = verify_detperm(c, 1, 8);
    CHECK(r1.lhs == doctest::Approx(2.0 * std::numbers::pi * std::norm(c[0])).epsilon(1e-14));
    CHECK(r1.rel_error <= 1e-14);
    CHECK(verify_detperm(2, 10, 42).rel_error <= 1e-10);
    CHECK(verify_detperm(3, 14, 43).rel_error <= 1e-9);
}

TEST_CASE("Fourier permanent") {
    CHECK(fourier_permanent(std::vector<double>{1, 2, 3, 4}, 2, 8) == doctest::Approx(10.0).epsilon(1e-13));
    CHECK(fourier_permanent(std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1}, 3, 10) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fourier_permanent(std::vector<double>(9, 1.0), 3, 10) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK_THROWS_AS(fourier_permanent(std::vector<double>{1, -2, 3, 4}, 2, 8), Error);
}

TEST_CASE("Gram identity") {
    // f_k = e^{ikx}/sqrt(2 pi): orthonormal, both sides 1
    std::vector<std::vector<cplx>> coef(2, std::vector<cplx>(5, 0.0));
    coef[0][2 + 0] = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    coef[1][2 + 1] = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto r = gram_identity(coef, 12);
    CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gram_identity(2, 9, 10).rel_error <= 1e-10);
    CHECK(gram_identity(3, 9, 14, true).rel_error <= 1e-10);
}

TEST_CASE("theta pushforward") {
    Configuration y;
    y.points.push_back(TorusPoint{0.0});
    const auto r = theta_pushforward_check(1, y, 64);
    CHECK(r.lhs / (4.0 * std::numbers::pi) == doctest::Approx(testutil::lattice_sum_1d(1, 0.0)).epsilon(1e-8));
    CHECK(r.fitted_constant == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-8));
    auto rng = CounterRng::stream(2, 3);
    Configuration y2;
    y2.points = {TorusPoint{rng.uniform()}, TorusPoint{rng.uniform()}};
    const auto r2 = theta_pushforward_check(2, y2, 64);
    CHECK(r2.fitted_constant == doctest::Approx(16.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-6));
    CHECK(theta_gamma_density_check(64, 64) <= 1e-8);
}
