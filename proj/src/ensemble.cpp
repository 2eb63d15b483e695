#include "torusma/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace torusma {

EnsembleSpec EnsembleSpec::lattice(int n, int k, double beta, std::optional<DiscreteMeasure> mu0) {
    EnsembleSpec s;
    s.n = n;
    s.k = k;
    s.beta = beta;
    s.points = lattice_points(n, k);
    s.mu0 = std::move(mu0);
    s.validate();
    return s;
}

void EnsembleSpec::validate() const {
    if (n < 1) throw Error(Errc::InvalidInput, "dimension must be >= 1");
    if (k < 1) throw Error(Errc::InvalidInput, "k must be >= 1");
    if (!std::isfinite(beta)) throw Error(Errc::InvalidInput, "beta must be finite");
    if (points.empty()) throw Error(Errc::InvalidInput, "ensemble needs at least one point");
    for (const auto& p : points)
        if (p.dim() != n) throw Error(Errc::InvalidInput, "point dimension differs from n");
    if (mu0) {
        if (!mu0->is_grid()) throw Error(Errc::UnsupportedMeasure, "background measure must be a grid density");
        if (mu0->dim() != n) throw Error(Errc::InvalidInput, "background measure dimension differs from n");
        for (double v : mu0->density().values())
            if (!(v > 0.0)) throw Error(Errc::InvalidInput, "background density must be strictly positive");
    }
}

double EnsembleSpec::log_mu0(std::span<const double> x) const {
    if (!mu0) return 0.0;
    return std::log(mu0->density_at(x));
}

std::vector<TorusPoint> lattice_points(int n, int k) {
    if (n < 1 || k < 1) throw Error(Errc::InvalidInput, "lattice needs n >= 1 and k >= 1");
    std::size_t N = 1;
    for (int a = 0; a < n; ++a) N *= static_cast<std::size_t>(k);
    std::vector<TorusPoint> pts;
    pts.reserve(N);
    std::vector<double> c(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t r = i;
        for (int a = n - 1; a >= 0; --a) {
            c[static_cast<std::size_t>(a)] = static_cast<double>(r % static_cast<std::size_t>(k)) / k;
            r /= static_cast<std::size_t>(k);
        }
        pts.emplace_back(c);
    }
    return pts;
}

double truncation_radius(int k) { return std::sqrt(2.0 * std::log(1e17) / k); }

double log_wave_1d(int k, double t) {
    const double R = truncation_radius(k);
    const double m0 = std::nearbyint(t);
    const double d0 = t - m0;
    const long lo = static_cast<long>(std::floor(t - R - 1.0)), hi = static_cast<long>(std::ceil(t + R + 1.0));
    double s = 0.0;
    for (long m = lo; m <= hi; ++m) {
        const double d = t - static_cast<double>(m);
        s += std::exp(-0.5 * k * (d * d - d0 * d0));
    }
    return -0.5 * k * d0 * d0 + std::log(s);
}

double log_wave_function(int k, const TorusPoint& p, const TorusPoint& x) {
    if (k < 1) throw Error(Errc::InvalidInput, "k must be >= 1");
    if (p.dim() != x.dim()) throw Error(Errc::InvalidInput, "dimension mismatch");
    double s = 0.0;
    for (int a = 0; a < x.dim(); ++a) s += log_wave_1d(k, x[a] - p[a]);
    return s;
}

double wave_function(int k, const TorusPoint& p, const TorusPoint& x) { return std::exp(log_wave_function(k, p, x)); }

double c_potential(int k, const TorusPoint& p, const TorusPoint& x) { return -log_wave_function(k, p, x) / k; }

// ---------------------------------------------------------------------------

double permanent_naive(std::span<const double> A, int N) {
    std::vector<int> s(static_cast<std::size_t>(N));
    std::iota(s.begin(), s.end(), 0);
    long double total = 0.0L;
    do {
        long double p = 1.0L;
        for (int i = 0; i < N; ++i) p *= A[static_cast<std::size_t>(i * N + s[static_cast<std::size_t>(i)])];
        total += p;
    } while (std::next_permutation(s.begin(), s.end()));
    return static_cast<double>(total);
}

namespace {

// Ryser's formula in the Nijenhuis-Wilf form with Gray-code subset order:
// perm(B) = (-1)^{N-1} 2 sum_{S subset of first N-1 columns} (-1)^{|S|} prod_i (x_i + sum_{j in S} b_ij)
// with x_i = b_{i,N-1} - (1/2) sum_j b_ij.
double product(const double* x, int N) {
    // four independent chains keep the multiplier pipeline busy
    double p0 = 1.0, p1 = 1.0, p2 = 1.0, p3 = 1.0;
    int i = 0;
    for (; i + 4 <= N; i += 4) {
        p0 *= x[i];
        p1 *= x[i + 1];
        p2 *= x[i + 2];
        p3 *= x[i + 3];
    }
    for (; i < N; ++i) p0 *= x[i];
    return (p0 * p1) * (p2 * p3);
}

double ryser(const double* B, int N, double* x) {
    thread_local std::vector<double> T;
    T.resize(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) T[static_cast<std::size_t>(j * N + i)] = B[i * N + j];
    for (int i = 0; i < N; ++i) {
        double rs = 0.0;
        for (int j = 0; j < N; ++j) rs += B[i * N + j];
        x[i] = B[i * N + N - 1] - 0.5 * rs;
    }
    // terms alternate in sign; even and odd steps go to separate accumulators
    long double sum_even = product(x, N), sum_odd = 0.0L;
    const std::uint64_t count = std::uint64_t{1} << (N - 1);
    std::uint64_t gray = 0;
    for (std::uint64_t g = 1; g < count; ++g) {
        const int j = std::countr_zero(g);
        const std::uint64_t bit = std::uint64_t{1} << j;
        gray ^= bit;
        const double* col = T.data() + static_cast<std::size_t>(j * N);
        if (gray & bit)
            for (int i = 0; i < N; ++i) x[i] += col[i];
        else
            for (int i = 0; i < N; ++i) x[i] -= col[i];
        if (g & 1)
            sum_odd += product(x, N);
        else
            sum_even += product(x, N);
    }
    double perm = static_cast<double>(2.0L * (sum_even - sum_odd));
    if ((N - 1) % 2 == 1) perm = -perm;
    return perm;
}

double logsumexp(const double* v, int n, int stride) {
    double m = -INFINITY;
    for (int i = 0; i < n; ++i) m = std::max(m, v[i * stride]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i * stride] - m);
    return m + std::log(s);
}

}  // namespace

double log_permanent(std::span<const double> L, int N) {
    if (N < 0 || static_cast<std::size_t>(N) * static_cast<std::size_t>(N) != L.size())
        throw Error(Errc::InvalidInput, "matrix is not N x N");
    if (N > kMaxPermanentSize) throw Error(Errc::OversizeMatrix, "permanent limited to N <= 22");
    if (N == 0) return 0.0;
    for (double v : L)
        if (!std::isfinite(v)) throw Error(Errc::NonFinite, "non-finite log-entry");

    thread_local std::vector<double> A, B, x;
    const std::size_t NN = L.size();
    A.assign(L.begin(), L.end());
    B.resize(NN);
    x.resize(static_cast<std::size_t>(N));

    // row maxima first, then balance rows and columns towards a doubly
    // stochastic matrix; the scalings are tracked exactly in log form
    double logscale = 0.0;
    double amin = 0.0;
    for (int i = 0; i < N; ++i) {
        double r = *std::max_element(A.begin() + i * N, A.begin() + (i + 1) * N);
        logscale += r;
        for (int j = 0; j < N; ++j) {
            A[static_cast<std::size_t>(i * N + j)] -= r;
            amin = std::min(amin, A[static_cast<std::size_t>(i * N + j)]);
        }
    }
    if (amin < -600.0) {
        // entries would underflow: balance in the log domain first
        for (int it = 0; it < 200; ++it) {
            for (int j = 0; j < N; ++j) {
                double c = logsumexp(A.data() + j, N, N);
                logscale += c;
                for (int i = 0; i < N; ++i) A[static_cast<std::size_t>(i * N + j)] -= c;
            }
            double worst = 0.0;
            for (int i = 0; i < N; ++i) {
                double r = logsumexp(A.data() + i * N, N, 1);
                worst = std::max(worst, std::fabs(r));
                logscale += r;
                for (int j = 0; j < N; ++j) A[static_cast<std::size_t>(i * N + j)] -= r;
            }
            if (worst < 1e-3) break;
        }
    }
    for (std::size_t t = 0; t < NN; ++t) B[t] = std::exp(A[t]);
    for (int it = 0; it < 50; ++it) {
        for (int j = 0; j < N; ++j) {
            double c = 0.0;
            for (int i = 0; i < N; ++i) c += B[static_cast<std::size_t>(i * N + j)];
            logscale += std::log(c);
            for (int i = 0; i < N; ++i) B[static_cast<std::size_t>(i * N + j)] /= c;
        }
        double worst = 0.0;
        for (int i = 0; i < N; ++i) {
            double r = 0.0;
            for (int j = 0; j < N; ++j) r += B[static_cast<std::size_t>(i * N + j)];
            worst = std::max(worst, std::fabs(r - 1.0));
            logscale += std::log(r);
            for (int j = 0; j < N; ++j) B[static_cast<std::size_t>(i * N + j)] /= r;
        }
        if (worst < 1e-2) break;
    }

    double perm = ryser(B.data(), N, x.data());
    if (!(perm > 0.0) || !std::isfinite(perm)) {
        if (N > 10) throw Error(Errc::NonFinite, "permanent lost to cancellation");
        perm = permanent_naive(B, N);
    }
    return logscale + std::log(perm);
}

double log_permanent(const std::vector<std::vector<double>>& L) {
    const int N = static_cast<int>(L.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
    for (const auto& row : L) {
        if (static_cast<int>(row.size()) != N) throw Error(Errc::InvalidInput, "matrix is not square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return log_permanent(flat, N);
}

std::vector<double> log_wave_matrix(const Configuration& cfg, const EnsembleSpec& spec) {
    const int N = spec.N();
    if (static_cast<int>(cfg.points.size()) != N) throw Error(Errc::SizeMismatch, "configuration size differs from N");
    std::vector<double> L(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            L[static_cast<std::size_t>(i * N + j)] =
                log_wave_function(spec.k, spec.points[static_cast<std::size_t>(i)], cfg.points[static_cast<std::size_t>(j)]);
    return L;
}

Configuration canonical(const Configuration& cfg) {
    Configuration c = cfg;
    std::sort(c.points.begin(), c.points.end(),
              [](const TorusPoint& a, const TorusPoint& b) { return a.coords() < b.coords(); });
    return c;
}

double hamiltonian(const Configuration& cfg, const EnsembleSpec& spec) {
    return -log_permanent(log_wave_matrix(canonical(cfg), spec), spec.N()) / spec.k;
}

}  // namespace torusma
