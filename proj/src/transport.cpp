#include "torusma/transport.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "torusma/assignment.hpp"

namespace torusma {

double config_distance(const Configuration& x, const Configuration& y) {
    const std::size_t N = x.points.size();
    if (N != y.points.size()) throw Error(Errc::SizeMismatch, "configurations of different size");
    if (N == 0) return 0.0;
    std::vector<double> c(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) c[i * N + j] = torus_distance(x.points[i], y.points[j]);
    return solve_assignment(c, static_cast<int>(N)).total_cost / static_cast<double>(N);
}

namespace {

double h_cost(double z, int exponent) { return exponent == 1 ? std::fabs(z) : 0.5 * z * z; }

void check_exponent(int exponent) {
    if (exponent != 1 && exponent != 2) throw Error(Errc::InvalidInput, "exponent must be 1 or 2");
}

// sorted positions in [0,1) with merged duplicates and cumulative weights
struct Quantile {
    std::vector<double> pos;
    std::vector<double> cum;  // cum[i] = mass of atoms 0..i; cum.back() == 1

    explicit Quantile(const std::vector<Atom>& atoms) {
        std::vector<std::pair<double, double>> a;
        for (const auto& at : atoms)
            if (at.weight > 0.0) a.emplace_back(at.point[0], at.weight);
        std::sort(a.begin(), a.end());
        double total = 0.0;
        for (const auto& [p, w] : a) {
            if (!pos.empty() && p == pos.back()) {
                cum.back() += w;
            } else {
                pos.push_back(p);
                cum.push_back((cum.empty() ? 0.0 : cum.back()) + w);
            }
            total = cum.back();
        }
        for (double& c : cum) c /= total;
        cum.back() = 1.0;
    }
    // lifted quantile function: Q(s + 1) = Q(s) + 1
    double operator()(double s) const {
        const double f = std::floor(s);
        const double t = s - f;
        std::size_t i = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), t) - cum.begin());
        if (i >= pos.size()) i = pos.size() - 1;
        return pos[i] + f;
    }
};

// integral over t in [0,1) of h(Q_mu(t) - Q_nu(t + alpha))
double circle_cost_at(const Quantile& mu, const Quantile& nu, double alpha, int exponent) {
    std::vector<double> br{0.0, 1.0};
    for (double c : mu.cum)
        if (c > 0.0 && c < 1.0) br.push_back(c);
    for (double c : nu.cum) {
        double t = c - alpha;
        t -= std::floor(t);
        if (t > 0.0 && t < 1.0) br.push_back(t);
    }
    std::sort(br.begin(), br.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double len = br[i + 1] - br[i];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (br[i] + br[i + 1]);
        s += len * h_cost(mu(mid) - nu(mid + alpha), exponent);
    }
    return s;
}

// minimizes a convex function of alpha on [-1, 1]: coarse scan, then golden section
template <class F>
double minimize_shift(F&& f) {
    const int scan = 64;
    double best = std::numeric_limits<double>::infinity();
    int bi = 0;
    std::vector<double> vals(scan + 1);
    for (int i = 0; i <= scan; ++i) {
        vals[static_cast<std::size_t>(i)] = f(-1.0 + 2.0 * i / scan);
        if (vals[static_cast<std::size_t>(i)] < best) {
            best = vals[static_cast<std::size_t>(i)];
            bi = i;
        }
    }
    double a = -1.0 + 2.0 * std::max(0, bi - 1) / scan, b = -1.0 + 2.0 * std::min(scan, bi + 1) / scan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return std::min({best, fc, fd});
}

double circle_cost(const std::vector<Atom>& a, const std::vector<Atom>& b, int exponent) {
    const Quantile qa(a), qb(b);
    return minimize_shift([&](double alpha) { return circle_cost_at(qa, qb, alpha, exponent); });
}

double gcd_ll(long long a, long long b) { return static_cast<double>(std::gcd(a, b)); }

}  // namespace

int common_denominator(const DiscreteMeasure& mu, int cap) {
    const auto atoms = mu.to_atoms();
    for (int D = 1; D <= cap; ++D) {
        bool ok = true;
        for (const auto& a : atoms) {
            const double s = a.weight * D;
            if (std::fabs(s - std::nearbyint(s)) > 1e-9) {
                ok = false;
                break;
            }
        }
        if (ok) return D;
    }
    return 0;
}

std::vector<TorusPoint> atomize(const DiscreteMeasure& mu, int denominator) {
    const auto atoms = mu.to_atoms();
    if (static_cast<int>(atoms.size()) > denominator && common_denominator(mu, denominator) == 0)
        throw Error(Errc::UnsupportedMeasure, "more atoms than the equalization denominator");
    // largest-remainder rounding keeps the total at exactly `denominator` copies
    std::vector<long> copies(atoms.size());
    std::vector<std::pair<double, std::size_t>> rem;
    long used = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double s = atoms[i].weight * denominator;
        long c = static_cast<long>(std::floor(s + 1e-9));
        copies[i] = c;
        used += c;
        rem.emplace_back(s - static_cast<double>(c), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t r = 0; used < denominator && r < rem.size(); ++r, ++used) ++copies[rem[r].second];
    std::vector<TorusPoint> out;
    out.reserve(static_cast<std::size_t>(denominator));
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (long c = 0; c < copies[i]; ++c) out.push_back(atoms[i].point);
    return out;
}

double wasserstein_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int exponent, TransportRoute route) {
    check_exponent(exponent);
    if (mu.dim() != nu.dim()) throw Error(Errc::InvalidInput, "measures of different dimension");
    if (route == TransportRoute::automatic && mu.dim() == 1) return circle_cost(mu.to_atoms(), nu.to_atoms(), exponent);

    const int Da = common_denominator(mu), Db = common_denominator(nu);
    int D = kAtomCap;
    if (Da > 0 && Db > 0) {
        const double l = static_cast<double>(Da) / gcd_ll(Da, Db) * Db;
        if (l <= kAtomCap) D = static_cast<int>(l);
    }
    const auto A = atomize(mu, D), B = atomize(nu, D);
    std::vector<double> c(static_cast<std::size_t>(D) * static_cast<std::size_t>(D));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < B.size(); ++j) {
            const double d = torus_distance(A[i], B[j]);
            c[i * B.size() + j] = exponent == 1 ? d : 0.5 * d * d;
        }
    return solve_assignment(c, D).total_cost / D;
}

double wasserstein_to_uniform(const DiscreteMeasure& mu, int exponent) {
    check_exponent(exponent);
    if (mu.dim() != 1) throw Error(Errc::UnsupportedSize, "transport to continuous dx implemented for n = 1");
    const Quantile q(mu.to_atoms());
    // antiderivative of h(z) in z
    auto H = [exponent](double z) { return exponent == 1 ? 0.5 * z * std::fabs(z) : z * z * z / 6.0; };
    auto cost_at = [&](double alpha) {
        double s = 0.0, t0 = 0.0;
        for (std::size_t i = 0; i < q.pos.size(); ++i) {
            const double t1 = q.cum[i];
            const double b = q.pos[i] - alpha;
            s += H(b - t0) - H(b - t1);
            t0 = t1;
        }
        return s;
    };
    return minimize_shift(cost_at);
}

double relative_entropy(const DiscreteMeasure& mu, const DiscreteMeasure& mu0) {
    if (!mu.is_grid() || !mu0.is_grid() || !mu.density().same_grid(mu0.density()))
        throw Error(Errc::GridMismatch, "relative entropy needs two measures on the same grid");
    const GridField a = mu.masses(), b = mu0.masses();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.0) continue;
        if (b[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += a[i] * std::log(a[i] / b[i]);
    }
    return std::max(s, 0.0);
}

double w2_to_lebesgue(const DiscreteMeasure& mu) {
    if (mu.dim() == 1) return wasserstein_to_uniform(mu, 2);
    const GridField& d = mu.density();
    return wasserstein_cost(mu, DiscreteMeasure::uniform(d.dim(), d.resolution()), 2);
}

RateFunctionReport rate_function(const DiscreteMeasure& mu, double beta, const DiscreteMeasure& mu0,
                                 const DiscreteMeasure& mu_star) {
    RateFunctionReport r;
    r.w2 = w2_to_lebesgue(mu);
    r.entropy = relative_entropy(mu, mu0);
    r.constant_C = -(beta * w2_to_lebesgue(mu_star) + relative_entropy(mu_star, mu0));
    r.G_value = beta * r.w2 + r.entropy + r.constant_C;
    return r;
}

double kantorovich_dual(const GridField& phi, const DiscreteMeasure& mu, XiRule rule) {
    if (!mu.is_grid() || !mu.density().same_grid(phi)) throw Error(Errc::GridMismatch, "mu must live on phi's grid");
    const GridField m = mu.masses();
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += phi[i] * m[i];
    return -s - xi(phi, rule);
}

DualityGapResult duality_gap(const DiscreteMeasure& mu, int iterations) {
    if (mu.dim() != 1) throw Error(Errc::UnsupportedSize, "duality gap implemented for n = 1");
    if (iterations < 0) throw Error(Errc::InvalidInput, "iterations must be >= 0");

    // merged, sorted sites
    std::vector<std::pair<double, double>> a;
    for (const auto& at : mu.to_atoms())
        if (at.weight > 0.0) a.emplace_back(at.point[0], at.weight);
    std::sort(a.begin(), a.end());
    std::vector<double> x, w;
    for (const auto& [p, wt] : a) {
        if (!x.empty() && p == x.back())
            w.back() += wt;
        else {
            x.push_back(p);
            w.push_back(wt);
        }
    }
    const std::size_t M = x.size();

    DualityGapResult res;
    res.primal = wasserstein_to_uniform(mu, 2);
    std::vector<double> psi(M, 0.0);
    auto dual = [&](const std::vector<double>& p, sd::Laguerre& L) {
        L = sd::laguerre(x, p);
        double s = 0.0;
        for (std::size_t i = 0; i < M; ++i) s += w[i] * p[i];
        return -s - L.xi;
    };
    sd::Laguerre L;
    double J = dual(psi, L);
    res.best_dual = J;
    res.potential = psi;
    auto record = [&](double j) {
        if (j > res.primal + 1e-9) res.weak_duality_held = false;
        if (j > res.best_dual) res.best_dual = j;
        res.gap_history.push_back(res.primal - res.best_dual);
    };
    record(J);

    // Newton ascent on the concave semidiscrete dual: the Hessian is minus
    // the weighted Laplacian of neighbouring Laguerre cells
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd grad(static_cast<Eigen::Index>(M));
        double gmax = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            grad[static_cast<Eigen::Index>(i)] = L.mass[i] - w[i];
            gmax = std::max(gmax, std::fabs(grad[static_cast<Eigen::Index>(i)]));
        }
        if (gmax < 1e-15) {
            record(J);
            continue;
        }
        Eigen::MatrixXd Hm = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M), 1.0 / M);
        for (std::size_t i = 0; i < M; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            Hm(ii, ii) += 1e-12;
            if (!L.on_hull[i]) continue;
            Hm(ii, ii) += L.inv_gap_prev[i] + L.inv_gap_next[i];
            Hm(ii, L.prev[i]) -= L.inv_gap_prev[i];
            Hm(ii, L.next[i]) -= L.inv_gap_next[i];
        }
        const Eigen::VectorXd d = Hm.ldlt().solve(grad);
        const double slope = grad.dot(d);
        double tau = 1.0;
        bool moved = false;
        const double minmass = 0.5 * std::min(*std::min_element(w.begin(), w.end()),
                                              *std::min_element(L.mass.begin(), L.mass.end()));
        for (int bt = 0; bt < 60; ++bt, tau *= 0.5) {
            std::vector<double> trial(psi);
            for (std::size_t i = 0; i < M; ++i) trial[i] += tau * d[static_cast<Eigen::Index>(i)];
            sd::Laguerre Lt;
            const double Jt = dual(trial, Lt);
            const double mm = *std::min_element(Lt.mass.begin(), Lt.mass.end());
            if (mm >= minmass && Jt >= J + 1e-4 * tau * slope) {
                psi = std::move(trial);
                L = std::move(Lt);
                J = Jt;
                moved = true;
                break;
            }
        }
        record(J);
        if (moved && J > res.best_dual - 1e-300) res.potential = psi;
        if (!moved) {
            // no representable ascent left
            for (++it; it < iterations; ++it) record(J);
            break;
        }
    }
    res.sites = x;
    res.gap = res.primal - res.best_dual;
    return res;
}

}  // namespace torusma
