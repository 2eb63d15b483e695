#pragma once
// Transport costs on the torus, relative entropy, the rate function and
// Kantorovich duality.

#include <vector>

#include "torusma/ctransform.hpp"
#include "torusma/ensemble.hpp"

namespace torusma {

inline constexpr int kAtomCap = 4096;

// (1/N) min over permutations of sum d(x_i, y_sigma(i)).
double config_distance(const Configuration& x, const Configuration& y);

enum class TransportRoute {
    automatic,   // exact circle formula in 1-D, atomized assignment otherwise
    assignment,  // always equal-weight atoms + optimal assignment
};

// Optimal transport cost with cost d (exponent 1) or d^2/2 (exponent 2).
double wasserstein_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int exponent,
                        TransportRoute route = TransportRoute::automatic);

// Cost to the continuous uniform measure dx (1-D, exact).
double wasserstein_to_uniform(const DiscreteMeasure& mu, int exponent);

// Equal-weight atoms for an assignment solve: exact when all weights share a
// denominator <= cap, otherwise weights are rounded to multiples of 1/cap.
std::vector<TorusPoint> atomize(const DiscreteMeasure& mu, int denominator);
int common_denominator(const DiscreteMeasure& mu, int cap = kAtomCap);

double relative_entropy(const DiscreteMeasure& mu, const DiscreteMeasure& mu0);

struct RateFunctionReport {
    double w2 = 0.0;
    double entropy = 0.0;
    double constant_C = 0.0;
    double G_value = 0.0;
};

// W^2(., dx) is taken against continuous dx in 1-D and against the uniform
// grid measure of the same resolution in 2-D.
double w2_to_lebesgue(const DiscreteMeasure& mu);

RateFunctionReport rate_function(const DiscreteMeasure& mu, double beta, const DiscreteMeasure& mu0,
                                 const DiscreteMeasure& mu_star);

// J(phi) = -int phi dmu - xi(phi)
double kantorovich_dual(const GridField& phi, const DiscreteMeasure& mu, XiRule rule = XiRule::grid);

struct DualityGapResult {
    double primal = 0.0;
    double best_dual = 0.0;
    double gap = 0.0;
    std::vector<double> gap_history;  // best gap after each iteration, starting at phi = 0
    std::vector<double> sites;        // merged atom positions
    std::vector<double> potential;    // dual potential on the sites
    bool weak_duality_held = true;
};

// Dual ascent for W^2(mu, dx), mu atomic or grid, n = 1.
DualityGapResult duality_gap(const DiscreteMeasure& mu, int iterations);

}  // namespace torusma
