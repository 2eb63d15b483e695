#include "torusma/theta.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "torusma/rng.hpp"

namespace torusma {

namespace {

constexpr double kPi = std::numbers::pi;

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// table[(j * N + l) * Q + q] = F_jl(x_q) with x_q = q * period / Q.
// Returns the trapezoid value of int |det F_jl(x_j)|^2 over the product torus.
double det_square_quadrature(const std::vector<cplx>& table, int N, int Q, double period) {
    std::vector<int> idx(static_cast<std::size_t>(N), 0);
    Eigen::MatrixXcd M(N, N);
    long double sum = 0.0L;
    for (;;) {
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l)
                M(j, l) = table[static_cast<std::size_t>((j * N + l) * Q + idx[static_cast<std::size_t>(j)])];
        sum += std::norm(M.determinant());
        int a = 0;
        while (a < N && ++idx[static_cast<std::size_t>(a)] == Q) idx[static_cast<std::size_t>(a++)] = 0;
        if (a == N) break;
    }
    return static_cast<double>(sum) * std::pow(period / Q, N);
}

void check_quadrature(int N, int Q, int max_N) {
    if (N < 1 || N > max_N) throw Error(Errc::UnsupportedSize, "identity checks are limited to small N");
    if (Q < 1) throw Error(Errc::InvalidInput, "quadrature needs at least one node");
}

cplx random_normal_complex(CounterRng& rng) { return {rng.normal(), rng.normal()}; }

}  // namespace

double ThetaSpec::radius() const {
    return truncation_radius > 0.0 ? truncation_radius : std::sqrt(4.0 * std::log(1e17) / k);
}

cplx theta_eval(const ThetaSpec& spec, std::span<const cplx> z) {
    if (spec.k < 1) throw Error(Errc::InvalidInput, "k must be >= 1");
    if (static_cast<int>(z.size()) != spec.p.dim()) throw Error(Errc::InvalidInput, "dimension mismatch");
    const double k = spec.k, R = spec.radius();
    cplx prod = 1.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
        const double y = z[a].imag();
        if (!std::isfinite(z[a].real()) || !std::isfinite(y)) throw Error(Errc::InvalidInput, "non-finite argument");
        if (std::fabs(y) > kThetaWindow) throw Error(Errc::OutOfWindow, "|Im z| exceeds the truncation window");
        // terms peak at m = -y; sum m in Z + p over |m + y| <= R + 1
        const double p = spec.p[static_cast<int>(a)];
        const long lo = static_cast<long>(std::floor(-y - R - 1.0 - p));
        const long hi = static_cast<long>(std::ceil(-y + R + 1.0 - p));
        cplx s = 0.0;
        for (long j = lo; j <= hi; ++j) {
            const double m = static_cast<double>(j) + p;
            s += std::exp(cplx(-k * m * m / 4.0, 0.0) + cplx(0.0, 0.5 * k * m) * z[a]);
        }
        prod *= s;
    }
    return prod;
}

cplx theta_eval(const ThetaSpec& spec, cplx z) { return theta_eval(spec, std::span<const cplx>(&z, 1)); }

IdentityReport verify_detperm(const std::vector<cplx>& c, int N, int quad_nodes) {
    check_quadrature(N, quad_nodes, 6);
    if (c.size() != static_cast<std::size_t>(N * N)) throw Error(Errc::SizeMismatch, "coefficient matrix size");
    const int Q = quad_nodes;
    std::vector<double> logA(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) logA[i] = std::log(2.0 * kPi * std::norm(c[i]));
    std::vector<cplx> table(static_cast<std::size_t>(N * N * Q));
    for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l)
            for (int q = 0; q < Q; ++q) {
                const double x = 2.0 * kPi * q / Q;
                table[static_cast<std::size_t>((j * N + l) * Q + q)] =
                    c[static_cast<std::size_t>(j * N + l)] * std::exp(cplx(0.0, (l + 1) * x));
            }
    IdentityReport r;
    r.lhs = std::exp(log_permanent(logA, N));
    r.rhs = det_square_quadrature(table, N, Q, 2.0 * kPi);
    r.rel_error = rel_err(r.lhs, r.rhs);
    r.fitted_constant = r.rhs / r.lhs;
    return r;
}

IdentityReport verify_detperm(int N, int quad_nodes, std::uint64_t seed) {
    CounterRng rng = CounterRng::stream(seed, 0xD37);
    std::vector<cplx> c(static_cast<std::size_t>(N > 0 ? N * N : 0));
    for (auto& v : c) v = random_normal_complex(rng);
    return verify_detperm(c, N, quad_nodes);
}

double fourier_permanent(std::span<const double> a, int N, int quad_nodes) {
    check_quadrature(N, quad_nodes, 6);
    if (a.size() != static_cast<std::size_t>(N * N)) throw Error(Errc::SizeMismatch, "matrix size");
    const int Q = quad_nodes;
    std::vector<cplx> table(static_cast<std::size_t>(N * N * Q));
    for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l) {
            const double v = a[static_cast<std::size_t>(j * N + l)];
            if (!std::isfinite(v)) throw Error(Errc::NonFinite, "non-finite entry");
            if (v < 0.0) throw Error(Errc::NegativeEntry, "entries must be nonnegative");
            for (int q = 0; q < Q; ++q)
                table[static_cast<std::size_t>((j * N + l) * Q + q)] =
                    std::sqrt(v) * std::exp(cplx(0.0, (l + 1) * 2.0 * kPi * q / Q));
        }
    return det_square_quadrature(table, N, Q, 2.0 * kPi) / std::pow(2.0 * kPi, N);
}

IdentityReport gram_identity(const std::vector<std::vector<cplx>>& coef, int quad_nodes) {
    const int N = static_cast<int>(coef.size());
    check_quadrature(N, quad_nodes, 4);
    const std::size_t width = coef.front().size();
    if (width % 2 != 1) throw Error(Errc::InvalidInput, "coefficients must cover -D..D");
    for (const auto& row : coef)
        if (row.size() != width) throw Error(Errc::SizeMismatch, "ragged coefficient rows");
    const int D = static_cast<int>(width / 2), Q = quad_nodes;

    // Gram matrix from Parseval: int f_j conj f_k = 2pi sum_m a_jm conj a_km
    Eigen::MatrixXcd gram(N, N);
    for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l) {
            cplx s = 0.0;
            for (std::size_t m = 0; m < width; ++m)
                s += coef[static_cast<std::size_t>(j)][m] * std::conj(coef[static_cast<std::size_t>(l)][m]);
            gram(j, l) = 2.0 * kPi * s;
        }
    // rows are particles x_j, columns functions f_l
    std::vector<cplx> table(static_cast<std::size_t>(N * N * Q));
    for (int l = 0; l < N; ++l)
        for (int q = 0; q < Q; ++q) {
            const double x = 2.0 * kPi * q / Q;
            cplx v = 0.0;
            for (int m = -D; m <= D; ++m)
                v += coef[static_cast<std::size_t>(l)][static_cast<std::size_t>(m + D)] * std::exp(cplx(0.0, m * x));
            for (int j = 0; j < N; ++j) table[static_cast<std::size_t>((j * N + l) * Q + q)] = v;
        }
    IdentityReport r;
    r.lhs = gram.determinant().real();
    r.rhs = det_square_quadrature(table, N, Q, 2.0 * kPi) / std::tgamma(N + 1.0);
    r.rel_error = rel_err(r.lhs, r.rhs);
    r.fitted_constant = r.rhs / r.lhs;
    return r;
}

IdentityReport gram_identity(int N, std::uint64_t seed, int quad_nodes, bool recombine) {
    if (N < 1 || N > 4) throw Error(Errc::UnsupportedSize, "Gram identity check supports N <= 4");
    CounterRng rng = CounterRng::stream(seed, 0x6A4);
    const int W = 2 * N + 1;
    std::vector<std::vector<cplx>> coef(static_cast<std::size_t>(N), std::vector<cplx>(static_cast<std::size_t>(W)));
    for (auto& row : coef)
        for (auto& v : row) v = random_normal_complex(rng);
    if (recombine) {
        // random complex matrix scaled to determinant one
        Eigen::MatrixXcd A(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) A(i, j) = random_normal_complex(rng);
        A /= std::pow(A.determinant(), 1.0 / N);
        std::vector<std::vector<cplx>> mixed(coef.size(), std::vector<cplx>(static_cast<std::size_t>(W), 0.0));
        for (int l = 0; l < N; ++l)
            for (int j = 0; j < N; ++j)
                for (int m = 0; m < W; ++m)
                    mixed[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] +=
                        coef[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] * A(j, l);
        coef = std::move(mixed);
    }
    return gram_identity(coef, quad_nodes);
}

namespace {

double fiber_integral(int k, const std::vector<TorusPoint>& p, const Configuration& y, int Q) {
    const int N = static_cast<int>(p.size());
    const double period = 4.0 * kPi;
    std::vector<cplx> table(static_cast<std::size_t>(N * N * Q));
    for (int j = 0; j < N; ++j) {
        const double yj = y.points[static_cast<std::size_t>(j)][0];
        const double damp = std::exp(-k * yj * yj / 4.0);
        for (int l = 0; l < N; ++l) {
            const ThetaSpec spec{k, p[static_cast<std::size_t>(l)], 0.0};
            for (int q = 0; q < Q; ++q)
                table[static_cast<std::size_t>((j * N + l) * Q + q)] =
                    theta_eval(spec, cplx(period * q / Q, yj)) * damp;
        }
    }
    return det_square_quadrature(table, N, Q, period);
}

}  // namespace

IdentityReport theta_pushforward_check(int k, const Configuration& y, int quad_nodes) {
    if (k < 1 || k > 2) throw Error(Errc::UnsupportedSize, "pushforward check supports N = k <= 2");
    if (static_cast<int>(y.points.size()) != k) throw Error(Errc::SizeMismatch, "configuration must have N = k points");
    if (quad_nodes < 8) throw Error(Errc::InvalidInput, "too few quadrature nodes");
    const EnsembleSpec spec = EnsembleSpec::lattice(1, k, 1.0);
    IdentityReport r;
    r.lhs = fiber_integral(k, spec.points, y, quad_nodes);
    r.rhs = std::exp(log_permanent(log_wave_matrix(y, spec), k));
    r.fitted_constant = r.lhs / r.rhs;
    r.rel_error = rel_err(r.fitted_constant, std::pow(4.0 * kPi, k));
    return r;
}

IdentityReport theta_pushforward_fit(int k, const std::vector<Configuration>& ys, int quad_nodes) {
    if (ys.empty()) throw Error(Errc::InvalidInput, "no configurations");
    double num = 0.0, den = 0.0;
    IdentityReport r;
    for (const auto& y : ys) {
        const IdentityReport one = theta_pushforward_check(k, y, quad_nodes);
        num += one.lhs * one.rhs;
        den += one.rhs * one.rhs;
        r.lhs += one.lhs;
        r.rhs += one.rhs;
    }
    r.fitted_constant = num / den;
    r.rel_error = rel_err(r.fitted_constant, std::pow(4.0 * kPi, k));
    return r;
}

double theta_gamma_density_check(int nodes, int quad_nodes) {
    if (nodes < 1) throw Error(Errc::InvalidInput, "need at least one node");
    const std::vector<TorusPoint> p{TorusPoint{0.0}};
    double worst = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double y = static_cast<double>(i) / nodes;
        const double fib = fiber_integral(1, p, Configuration{{TorusPoint{y}}}, quad_nodes) / (4.0 * kPi);
        worst = std::max(worst, rel_err(fib, std::exp(log_wave_1d(1, y))));
    }
    return worst;
}

}  // namespace torusma
