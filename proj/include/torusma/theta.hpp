#pragma once
// Level-k theta functions and the determinant/permanent identities they
// satisfy, checked by exact periodic trapezoid quadrature.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "torusma/ensemble.hpp"

namespace torusma {

using cplx = std::complex<double>;

inline constexpr double kThetaWindow = 4.0;  // max |Im z| per axis

struct ThetaSpec {
    int k = 1;
    TorusPoint p{0.0};
    double truncation_radius = 0.0;  // 0 selects sqrt(4 ln(1e17) / k)

    double radius() const;
};

// sum over m in Z^n + p of exp(-k m^2/4 + i k <z, m>/2)
cplx theta_eval(const ThetaSpec& spec, std::span<const cplx> z);
cplx theta_eval(const ThetaSpec& spec, cplx z);

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_error = 0.0;
    double fitted_constant = 0.0;  // lhs / rhs where a constant is being measured
};

// perm(int |F_jk|^2) vs int |det F_jk(x_j)|^2 for F_jk = c_jk e^{ikx} on [0, 2pi].
IdentityReport verify_detperm(int N, int quad_nodes, std::uint64_t seed);
IdentityReport verify_detperm(const std::vector<cplx>& c, int N, int quad_nodes);

// (2pi)^-N int |det(sqrt(a_jk) e^{ikx_j})|^2 dx, a row-major N x N, a >= 0.
double fourier_permanent(std::span<const double> a, int N, int quad_nodes);

// det(int f_j conj f_k) vs (1/N!) int |det f_k(x_j)|^2 for random trigonometric
// polynomials of degree <= N. With `recombine`, the f_k are first mixed by a
// random determinant-one matrix.
IdentityReport gram_identity(int N, std::uint64_t seed, int quad_nodes, bool recombine = false);
// Coefficients: f_k(x) = sum_{m=-D..D} coef[k][m + D] e^{imx}.
IdentityReport gram_identity(const std::vector<std::vector<cplx>>& coef, int quad_nodes);

// Fiber integral over x in [0, 4pi)^N of |det(theta_{p_l}(x_j + i y_j) e^{-k y_j^2/4})|^2
// for the k-lattice (n = 1, N = k), against perm(Psi_{p_l}(y_j)).
// fitted_constant = fiber / perm, rel_error = |fitted / (4pi)^N - 1|.
IdentityReport theta_pushforward_check(int k, const Configuration& y, int quad_nodes);

// Least-squares constant over several configurations.
IdentityReport theta_pushforward_fit(int k, const std::vector<Configuration>& ys, int quad_nodes);

// N = k = 1: fiber integral / 4pi against sum_m exp(-(y - m)^2/2) on `nodes`
// equally spaced y; returns the max relative deviation.
double theta_gamma_density_check(int nodes, int quad_nodes);

}  // namespace torusma
