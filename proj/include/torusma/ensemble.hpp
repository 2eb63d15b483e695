#pragma once
// Periodized Gaussian wave functions, their potentials, log-permanents and
// the N-particle Hamiltonian.

#include <optional>
#include <span>
#include <vector>

#include "torusma/torus.hpp"

namespace torusma {

inline constexpr int kMaxPermanentSize = 22;

struct EnsembleSpec {
    int n = 1;
    int k = 1;
    double beta = 0.0;
    std::vector<TorusPoint> points;
    std::optional<DiscreteMeasure> mu0;  // grid density; empty means Lebesgue

    static EnsembleSpec lattice(int n, int k, double beta, std::optional<DiscreteMeasure> mu0 = std::nullopt);

    int N() const { return static_cast<int>(points.size()); }
    // log of the background density at x (0 for Lebesgue)
    double log_mu0(std::span<const double> x) const;
    void validate() const;
};

struct Configuration {
    std::vector<TorusPoint> points;
};

// Points sorted lexicographically; functions of the unordered configuration
// evaluate on this copy so relabeling cannot change a single bit.
Configuration canonical(const Configuration& cfg);

std::vector<TorusPoint> lattice_points(int n, int k);

// Sum over m in Z of exp(-k (t - m)^2 / 2), in log form.
double log_wave_1d(int k, double t);
double log_wave_function(int k, const TorusPoint& p, const TorusPoint& x);
double wave_function(int k, const TorusPoint& p, const TorusPoint& x);
double c_potential(int k, const TorusPoint& p, const TorusPoint& x);
// Lattice terms kept per axis so the dropped tail is below 1e-17 of the leading term.
double truncation_radius(int k);

// log perm(exp(L)) for a row-major N x N matrix of log-entries.
double log_permanent(std::span<const double> L, int N);
double log_permanent(const std::vector<std::vector<double>>& L);
// Exhaustive sum over permutations; reference for small N.
double permanent_naive(std::span<const double> A, int N);

// L_ij = log Psi_{p_i}(x_j)
std::vector<double> log_wave_matrix(const Configuration& cfg, const EnsembleSpec& spec);
double hamiltonian(const Configuration& cfg, const EnsembleSpec& spec);

}  // namespace torusma
