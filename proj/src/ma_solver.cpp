#include "torusma/ma_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "torusma/ensemble.hpp"
#include "torusma/parallel.hpp"
#include "torusma/rng.hpp"

namespace torusma {

namespace {

void require_aligned(const GridField& phi, const DiscreteMeasure& mu0) {
    if (!mu0.is_grid() || !mu0.density().same_grid(phi))
        throw Error(Errc::GridMismatch, "mu0 must be a grid density on phi's grid");
}

double mean(const GridField& f) { return quadrature(f); }

GridField zero_mean(GridField f) {
    const double m = mean(f);
    for (double& v : f.values()) v -= m;
    return f;
}

double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

}  // namespace

DiscreteMeasure gamma_density(int n, int G) {
    if (n != 1 && n != 2) throw Error(Errc::UnsupportedSize, "gamma density needs n in {1,2}");
    if (G < 1) throw Error(Errc::InvalidInput, "grid resolution must be positive");
    return DiscreteMeasure::normalized_density(GridField::from_function(n, G, [](std::span<const double> x) {
        double s = 0.0;
        for (double t : x) s += log_wave_1d(1, t);
        return std::exp(s);
    }));
}

double I_functional(const GridField& phi, const DiscreteMeasure& mu0) {
    require_aligned(phi, mu0);
    const GridField w = mu0.masses();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (w[i] > 0.0) mx = std::max(mx, phi[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (w[i] > 0.0) s += w[i] * std::exp(phi[i] - mx);
    return mx + std::log(s);
}

double F_functional(const GridField& phi, double beta, const DiscreteMeasure& mu0, XiRule rule) {
    if (beta == 0.0) throw Error(Errc::BetaZero, "F needs beta != 0");
    GridField bp = phi;
    for (double& v : bp.values()) v *= beta;
    return xi(phi, rule) + I_functional(bp, mu0) / beta;
}

XiRule solver_rule(int dim) { return dim == 1 ? XiRule::semidiscrete : XiRule::grid; }

GridField target_masses(const GridField& phi, double beta, const DiscreteMeasure& mu0) {
    require_aligned(phi, mu0);
    GridField w = mu0.masses();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i) mx = std::max(mx, beta * phi[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        w[i] *= std::exp(beta * phi[i] - mx);
        s += w[i];
    }
    for (double& v : w.values()) v /= s;
    return w;
}

namespace {

// State of one iterate: MA masses, neighbour couplings for the preconditioner, F.
struct Iterate {
    GridField phi;
    GridField ma;
    GridField nu;
    double F = 0.0;
    double residual = 0.0;
    std::vector<Eigen::Triplet<double>> coupling;  // h^n (-grid Laplacian), mass units
};

Iterate evaluate(GridField phi, double beta, const DiscreteMeasure& mu0) {
    Iterate it;
    const int G = phi.resolution();
    const auto n = static_cast<std::size_t>(phi.size());
    if (phi.dim() == 1) {
        const auto L = sd::laguerre(phi);
        it.ma = GridField(1, G, L.mass);
        // adjacent hull sites are h apart, so near a solution the Laguerre
        // Laplacian is the grid one; off-hull nodes also get a sane coupling
        for (int i = 0; i < G; ++i) {
            it.coupling.emplace_back(i, i, 2.0 * G);
            it.coupling.emplace_back(i, (i + 1) % G, -1.0 * G);
            it.coupling.emplace_back(i, (i + G - 1) % G, -1.0 * G);
        }
        GridField bp = phi;
        for (double& v : bp.values()) v *= beta;
        it.F = L.xi + I_functional(bp, mu0) / beta;
    } else {
        it.ma = ma_measure(phi, XiRule::grid).masses();
        // 5-point Laplacian times the cell volume h^2 is dimensionless
        for (int a = 0; a < G; ++a)
            for (int b = 0; b < G; ++b) {
                const int i = a * G + b;
                it.coupling.emplace_back(i, i, 4.0);
                it.coupling.emplace_back(i, ((a + 1) % G) * G + b, -1.0);
                it.coupling.emplace_back(i, ((a + G - 1) % G) * G + b, -1.0);
                it.coupling.emplace_back(i, a * G + (b + 1) % G, -1.0);
                it.coupling.emplace_back(i, a * G + (b + G - 1) % G, -1.0);
            }
        it.F = F_functional(phi, beta, mu0, XiRule::grid);
    }
    it.nu = target_masses(phi, beta, mu0);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::fabs(it.ma[i] - it.nu[i]));
    it.residual = r / phi.cell_volume();
    it.phi = std::move(phi);
    return it;
}

GridField project_for(const GridField& phi) { return phi.dim() == 1 ? sd::project(phi) : project_cconvex(phi); }

}  // namespace

SolveResult minimize_F(double beta, const DiscreteMeasure& mu0, int G, double tol, int max_iter,
                       const std::optional<GridField>& init) {
    if (beta == 0.0) throw Error(Errc::BetaZero, "beta must be nonzero");
    if (!mu0.is_grid() || mu0.density().resolution() != G)
        throw Error(Errc::GridMismatch, "mu0 must be a grid density at the solve resolution");
    if (!(tol > 0.0) || max_iter < 0) throw Error(Errc::InvalidInput, "bad tolerance or iteration budget");
    for (double v : mu0.density().values())
        if (!(v > 0.0)) throw Error(Errc::InvalidInput, "mu0 density must be strictly positive");
    const int dim = mu0.dim();
    GridField phi0 = init ? *init : GridField(dim, G, 0.0);
    if (!phi0.same_grid(mu0.density())) throw Error(Errc::GridMismatch, "initial potential on a different grid");
    phi0.require_finite();

    Iterate cur = evaluate(project_for(phi0), beta, mu0);
    SolveResult res;
    res.F_history.push_back(cur.F);
    const auto n = static_cast<Eigen::Index>(cur.phi.size());

    int iter = 0;
    for (; iter < max_iter && cur.residual > tol; ++iter) {
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i)
            g[i] = cur.nu[static_cast<std::size_t>(i)] - cur.ma[static_cast<std::size_t>(i)];

        // P = coupling + |beta| diag(nu): the exact Hessian for beta > 0
        // without the rank-one term, positive definite for either sign
        std::vector<Eigen::Triplet<double>> trip = cur.coupling;
        for (Eigen::Index i = 0; i < n; ++i)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i),
                              std::fabs(beta) * cur.nu[static_cast<std::size_t>(i)] + 1e-14);
        Eigen::SparseMatrix<double> P(n, n);
        P.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(P);
        Eigen::VectorXd d;
        if (ldlt.info() == Eigen::Success) d = -ldlt.solve(g);
        if (ldlt.info() != Eigen::Success || !d.allFinite()) d = -0.5 * g / cur.phi.cell_volume();
        const double slope = g.dot(d);

        bool accepted = false;
        double t = 1.0;
        for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
            GridField trial = cur.phi;
            for (Eigen::Index i = 0; i < n; ++i) trial[static_cast<std::size_t>(i)] += t * d[i];
            Iterate next = evaluate(project_for(trial), beta, mu0);
            const bool armijo = next.F <= cur.F + 1e-4 * t * slope;
            // below the resolution of F, fall back on the residual
            const bool flat = std::fabs(t * slope) < 1e-13 * (1.0 + std::fabs(cur.F)) &&
                              next.F <= cur.F + 1e-14 * (1.0 + std::fabs(cur.F)) && next.residual < cur.residual;
            if (armijo || flat) {
                cur = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        res.F_history.push_back(cur.F);
    }
    res.iterations = iter;
    res.residual = cur.residual;
    res.converged = cur.residual <= tol;
    res.F_value = cur.F;
    res.phi = zero_mean(std::move(cur.phi));
    return res;
}

namespace {

GridField resample(const GridField& f, int G) {
    if (f.resolution() == G) return f;
    return GridField::from_function(1, G, [&](std::span<const double> x) { return f.interpolate(x); });
}

// rho minimizing the sup residual is not needed; use the rho that balances total mass
double balancing_log_rho(double beta, const GridField& f, const GridField& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += std::exp(beta * phi[i]) * f[i];
    return std::log(static_cast<double>(phi.size()) / s);
}

}  // namespace

double ode_residual(double beta, const GridField& f0, const GridField& phi) {
    const int G = phi.resolution();
    const GridField f = resample(f0, G);
    const double s = balancing_log_rho(beta, f, phi);
    const double G2 = static_cast<double>(G) * G;
    double r = 0.0;
    for (int i = 0; i < G; ++i) {
        const auto at = [&](int j) { return phi[static_cast<std::size_t>((j + G) % G)]; };
        const double d2 = (at(i + 1) - 2.0 * at(i) + at(i - 1)) * G2;
        r = std::max(r, std::fabs(d2 + 1.0 - std::exp(s + beta * at(i)) * f[static_cast<std::size_t>(i)]));
    }
    return r;
}

GridField ode_oracle_1d(double beta, const GridField& f0, int G) {
    if (f0.dim() != 1) throw Error(Errc::UnsupportedSize, "ODE oracle is 1-D");
    if (G < 3) throw Error(Errc::InvalidInput, "grid too small");
    const GridField f = resample(f0, G);
    for (double v : f.values())
        if (!(v > 0.0)) throw Error(Errc::InvalidInput, "density must be positive");

    const double G2 = static_cast<double>(G) * G;
    const Eigen::Index n = G + 1;  // phi_0..phi_{G-1}, s = log rho
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    {
        double m = 0.0;
        for (double v : f.values()) m += v;
        u[G] = -std::log(m / G);
    }
    auto residual = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
        r.resize(n);
        double sum = 0.0;
        for (int i = 0; i < G; ++i) {
            const double d2 = (v[(i + 1) % G] - 2.0 * v[i] + v[(i + G - 1) % G]) * G2;
            r[i] = d2 + 1.0 - std::exp(v[G] + beta * v[i]) * f[static_cast<std::size_t>(i)];
            sum += v[i];
        }
        r[G] = sum / G;
    };
    auto positive = [&](const Eigen::VectorXd& v) {
        for (int i = 0; i < G; ++i)
            if (!(1.0 + (v[(i + 1) % G] - 2.0 * v[i] + v[(i + G - 1) % G]) * G2 > 0.0)) return false;
        return true;
    };

    Eigen::VectorXd r;
    residual(u, r);
    for (int it = 0; it < 100; ++it) {
        const double rn = r.lpNorm<Eigen::Infinity>();
        if (rn <= 1e-13) break;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < G; ++i) {
            const double e = std::exp(u[G] + beta * u[i]) * f[static_cast<std::size_t>(i)];
            J(i, (i + 1) % G) += G2;
            J(i, (i + G - 1) % G) += G2;
            J(i, i) += -2.0 * G2 - beta * e;
            J(i, G) = -e;
            J(G, i) = 1.0 / G;
        }
        const Eigen::VectorXd du = J.partialPivLu().solve(-r);
        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
            const Eigen::VectorXd trial = u + t * du;
            Eigen::VectorXd rt;
            residual(trial, rt);
            if (positive(trial) && rt.allFinite() && rt.lpNorm<Eigen::Infinity>() < rn) {
                u = trial;
                r = rt;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (!(r.lpNorm<Eigen::Infinity>() <= 1e-10))
        throw Error(Errc::NewtonDivergence, "Newton iteration did not reach the residual target");
    GridField out(1, G);
    for (int i = 0; i < G; ++i) out[static_cast<std::size_t>(i)] = u[i];
    return out;
}

GridField geodesic(const GridField& phi0, const GridField& phi1, double t) {
    if (!phi0.same_grid(phi1)) throw Error(Errc::GridMismatch, "geodesic endpoints on different grids");
    if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::InvalidInput, "geodesic time outside [0,1]");
    const GridField a = c_transform(phi0), b = c_transform(phi1);
    GridField mix(phi0.dim(), phi0.resolution());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = t * b[i] + (1.0 - t) * a[i];
    return c_transform(mix);
}

GridField geodesic(const GridField& phi0, const GridField& phi1, double t, XiRule rule) {
    if (rule == XiRule::semidiscrete) return sd::geodesic(phi0, phi1, t);
    return geodesic(phi0, phi1, t);
}

GridField random_cconvex(int dim, int G, std::uint64_t seed, double amplitude) {
    CounterRng rng = CounterRng::stream(seed, 0x5EED);
    constexpr int kModes = 4;
    double c[2][kModes][2][2];
    for (auto& a : c)
        for (auto& m : a)
            for (auto& p : m)
                for (double& v : p) v = amplitude * (2.0 * rng.uniform() - 1.0) / kModes;
    const double tau = 2.0 * std::numbers::pi;
    GridField phi = GridField::from_function(dim, G, [&](std::span<const double> x) {
        double s = 0.0;
        for (int m = 1; m <= kModes; ++m) {
            const double w = 1.0 / m;  // damp higher modes
            if (dim == 1) {
                s += w * (c[0][m - 1][0][0] * std::cos(tau * m * x[0]) + c[0][m - 1][0][1] * std::sin(tau * m * x[0]));
            } else {
                s += w * (c[0][m - 1][0][0] * std::cos(tau * m * x[0]) + c[0][m - 1][0][1] * std::sin(tau * m * x[0]) +
                          c[1][m - 1][0][0] * std::cos(tau * m * x[1]) + c[1][m - 1][0][1] * std::sin(tau * m * x[1]) +
                          c[0][m - 1][1][0] * std::cos(tau * m * (x[0] + x[1])) +
                          c[1][m - 1][1][1] * std::sin(tau * m * (x[0] - x[1])));
            }
        }
        return s;
    });
    return dim == 1 ? sd::project(phi) : project_cconvex(phi);
}

UniquenessReport uniqueness_probe(double beta, const DiscreteMeasure& mu0, int G, int n_starts, std::uint64_t seed,
                                  double tol, int max_iter) {
    if (n_starts < 1) throw Error(Errc::InvalidInput, "need at least one start");
    UniquenessReport rep;
    rep.runs.resize(static_cast<std::size_t>(n_starts));
    const int dim = mu0.dim();
    parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t s) {
        const GridField init = random_cconvex(dim, G, mix64(seed) ^ mix64(s + 1), 0.2);
        rep.runs[s] = minimize_F(beta, mu0, G, tol, max_iter, init);
    });
    for (std::size_t a = 0; a < rep.runs.size(); ++a) {
        if (rep.runs[a].converged) ++rep.converged_count;
        for (std::size_t b = a + 1; b < rep.runs.size(); ++b) {
            std::vector<double> diff(rep.runs[a].phi.values());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rep.runs[b].phi[i];
            rep.sup_spread = std::max(rep.sup_spread, sup_abs(diff));
            rep.F_spread = std::max(rep.F_spread, std::fabs(rep.runs[a].F_value - rep.runs[b].F_value));
        }
    }
    return rep;
}

}  // namespace torusma
