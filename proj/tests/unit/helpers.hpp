#pragma once
// Small independent oracles shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "torusma/rng.hpp"
#include "torusma/torus.hpp"

namespace testutil {

inline constexpr double kTau = 2.0 * std::numbers::pi;

// Direct lattice sum over |m| <= 40, no truncation logic shared with the library.
inline double lattice_sum_1d(double k, double x) {
    double s = 0.0;
    for (int m = -40; m <= 40; ++m) s += std::exp(-k * (x - m) * (x - m) / 2.0);
    return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::fabs(a[i] - b[i]));
    return s;
}

inline torusma::GridField random_field(int dim, int G, std::uint64_t seed, double amp) {
    auto rng = torusma::CounterRng::stream(seed, 99);
    torusma::GridField f(dim, G);
    for (double& v : f.values()) v = amp * (2.0 * rng.uniform() - 1.0);
    return f;
}

}  // namespace testutil
