#pragma once
// Variational solver for MA(phi) = e^{beta phi} mu0 / int e^{beta phi} dmu0.
//
// 1-D problems use the semidiscrete Monge-Ampere masses (Laguerre cells),
// 2-D problems the grid push-forward. The discretization is chosen by
// solver_rule(dim) and used consistently for F, the residual and the descent.

#include <cstdint>
#include <optional>
#include <vector>

#include "torusma/ctransform.hpp"

namespace torusma {

// Normalized sum_m exp(-|x - m|^2 / 2) on a G-grid, n in {1,2}.
DiscreteMeasure gamma_density(int n, int G);

// log int e^phi dmu0
double I_functional(const GridField& phi, const DiscreteMeasure& mu0);

// xi(phi) + (1/beta) I(beta phi)
double F_functional(const GridField& phi, double beta, const DiscreteMeasure& mu0, XiRule rule = XiRule::grid);

XiRule solver_rule(int dim);

// Target cell masses e^{beta phi} mu0 / int e^{beta phi} dmu0.
GridField target_masses(const GridField& phi, double beta, const DiscreteMeasure& mu0);

struct SolveResult {
    GridField phi;  // zero mean
    double F_value = 0.0;
    double residual = 0.0;  // sup over cells of |MA - target| * G^n
    int iterations = 0;
    bool converged = false;
    std::vector<double> F_history;  // F after each accepted step, starting at the initial iterate
};

inline constexpr double kDefaultSolveTol = 1e-4;

// Projected preconditioned descent on F over c-convex grid functions.
// Never throws on non-convergence; check `converged`.
SolveResult minimize_F(double beta, const DiscreteMeasure& mu0, int G, double tol = kDefaultSolveTol,
                       int max_iter = 500, const std::optional<GridField>& init = std::nullopt);

// Newton solve of the periodic finite-difference equation
// D2 phi + 1 = rho e^{beta phi} f with zero-mean phi and unknown rho.
GridField ode_oracle_1d(double beta, const GridField& f, int G);

// Max over nodes of |D2 phi + 1 - rho e^{beta phi} f| at the optimal rho.
double ode_residual(double beta, const GridField& f, const GridField& phi);

// (t phi1^c + (1-t) phi0^c)^c with the grid transform.
GridField geodesic(const GridField& phi0, const GridField& phi1, double t);
GridField geodesic(const GridField& phi0, const GridField& phi1, double t, XiRule rule);

// Random smooth potential of modest amplitude, made c-convex.
GridField random_cconvex(int dim, int G, std::uint64_t seed, double amplitude = 0.05);

struct UniquenessReport {
    double sup_spread = 0.0;  // max pairwise sup distance of zero-mean minimizers
    double F_spread = 0.0;
    int converged_count = 0;
    std::vector<SolveResult> runs;
};

UniquenessReport uniqueness_probe(double beta, const DiscreteMeasure& mu0, int G, int n_starts, std::uint64_t seed,
                                  double tol = 1e-9, int max_iter = 500);

}  // namespace torusma
