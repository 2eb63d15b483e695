#include "torusma/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "torusma/parallel.hpp"
#include "torusma/rng.hpp"

namespace torusma {

void ChainParams::validate() const {
    if (!(n_steps > burn_in && burn_in >= 0)) throw Error(Errc::InvalidInput, "need n_steps > burn_in >= 0");
    if (thin < 1) throw Error(Errc::InvalidInput, "thin must be >= 1");
    if (!(proposal_sigma >= 0.0 && proposal_sigma <= 0.5)) throw Error(Errc::InvalidInput, "proposal_sigma must lie in (0, 0.5]");
    if (n_chains < 1) throw Error(Errc::InvalidInput, "n_chains must be >= 1");
}

double log_density_unnormalized(const Configuration& cfg_in, const EnsembleSpec& spec) {
    if (static_cast<int>(cfg_in.points.size()) != spec.N()) throw Error(Errc::SizeMismatch, "configuration size differs from N");
    const Configuration cfg = canonical(cfg_in);
    double s = 0.0;
    for (const auto& x : cfg.points) s += spec.log_mu0(x.coords());
    if (spec.beta != 0.0) s += spec.beta / spec.k * log_permanent(log_wave_matrix(cfg, spec), spec.N());
    return s;
}

namespace {

struct ChainResult {
    std::vector<Configuration> configs;
    std::vector<long> steps;
    long accepted = 0;
};

ChainResult run_chain(const EnsembleSpec& spec, const ChainParams& prm, int chain_index) {
    const int N = spec.N(), n = spec.n, k = spec.k;
    const double sigma = prm.proposal_sigma > 0.0 ? prm.proposal_sigma : 0.5 / k;
    const bool use_perm = spec.beta != 0.0;
    const double bk = spec.beta / k;
    CounterRng rng = CounterRng::stream(prm.seed, static_cast<std::uint64_t>(chain_index));
    const std::size_t NN = static_cast<std::size_t>(N) * static_cast<std::size_t>(N);

    std::vector<double> pos(static_cast<std::size_t>(N * n));
    for (double& t : pos) t = rng.uniform();
    std::vector<double> pcoord(static_cast<std::size_t>(N * n));
    for (int i = 0; i < N; ++i)
        for (int a = 0; a < n; ++a)
            pcoord[static_cast<std::size_t>(i * n + a)] = spec.points[static_cast<std::size_t>(i)][a];

    auto log_wave_col = [&](const double* x, double* col) {
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += log_wave_1d(k, x[a] - pcoord[static_cast<std::size_t>(i * n + a)]);
            col[static_cast<std::size_t>(i) * static_cast<std::size_t>(N)] = s;
        }
    };

    std::vector<double> L(NN), Lp(NN), lmu(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        log_wave_col(&pos[static_cast<std::size_t>(j * n)], &L[static_cast<std::size_t>(j)]);
        lmu[static_cast<std::size_t>(j)] = spec.log_mu0(std::span<const double>(&pos[static_cast<std::size_t>(j * n)], static_cast<std::size_t>(n)));
    }
    double lp = use_perm ? log_permanent(L, N) : 0.0;

    ChainResult out;
    std::vector<double> prop(static_cast<std::size_t>(n));
    for (long s = 0; s < prm.n_steps; ++s) {
        const int j = std::min(N - 1, static_cast<int>(rng.uniform() * N));
        for (int a = 0; a < n; ++a)
            prop[static_cast<std::size_t>(a)] = wrap_coord(pos[static_cast<std::size_t>(j * n + a)] + sigma * rng.normal());
        const double lmu_new = spec.log_mu0(prop);
        double delta = lmu_new - lmu[static_cast<std::size_t>(j)];
        double lp_new = lp;
        if (use_perm) {
            Lp = L;
            log_wave_col(prop.data(), &Lp[static_cast<std::size_t>(j)]);
            lp_new = log_permanent(Lp, N);
            delta += bk * (lp_new - lp);
        }
        const double u = rng.uniform();
        if (delta >= 0.0 || u < std::exp(delta)) {
            for (int a = 0; a < n; ++a) pos[static_cast<std::size_t>(j * n + a)] = prop[static_cast<std::size_t>(a)];
            lmu[static_cast<std::size_t>(j)] = lmu_new;
            if (use_perm) {
                std::swap(L, Lp);
                lp = lp_new;
            }
            ++out.accepted;
        }
        if (s >= prm.burn_in && (s - prm.burn_in) % prm.thin == 0) {
            Configuration c;
            c.points.reserve(static_cast<std::size_t>(N));
            for (int i = 0; i < N; ++i)
                c.points.emplace_back(std::vector<double>(pos.begin() + i * n, pos.begin() + (i + 1) * n));
            out.configs.push_back(std::move(c));
            out.steps.push_back(s);
        }
    }
    return out;
}

}  // namespace

SampleSet mcmc_sample(const EnsembleSpec& spec, const ChainParams& params) {
    spec.validate();
    params.validate();
    if (spec.N() > kMaxPermanentSize) throw Error(Errc::OversizeMatrix, "sampler limited to N <= 22");

    std::vector<ChainResult> res(static_cast<std::size_t>(params.n_chains));
    parallel_for(res.size(), [&](std::size_t c) { res[c] = run_chain(spec, params, static_cast<int>(c)); });

    SampleSet out;
    out.spec = spec;
    long acc = 0;
    for (std::size_t c = 0; c < res.size(); ++c) {
        acc += res[c].accepted;
        out.chain_acceptance.push_back(static_cast<double>(res[c].accepted) / static_cast<double>(params.n_steps));
        for (std::size_t t = 0; t < res[c].configs.size(); ++t) {
            out.configurations.push_back(std::move(res[c].configs[t]));
            out.chain.push_back(static_cast<int>(c));
            out.step.push_back(res[c].steps[t]);
        }
    }
    out.acceptance_rate = static_cast<double>(acc) / (static_cast<double>(params.n_steps) * params.n_chains);
    if (out.acceptance_rate < 0.01 || out.acceptance_rate > 0.99)
        out.warnings.push_back("NonErgodicWarning: acceptance rate " + std::to_string(out.acceptance_rate) +
                               " outside [0.01, 0.99]");
    return out;
}

DiscreteMeasure empirical_measure(const Configuration& cfg) {
    if (cfg.points.empty()) throw Error(Errc::InvalidInput, "empty configuration");
    std::vector<Atom> atoms;
    const double w = 1.0 / static_cast<double>(cfg.points.size());
    for (const auto& p : cfg.points) atoms.push_back({p, w});
    // 1/N summed N times may miss 1 by an ulp or two; the constructor allows 1e-12
    return DiscreteMeasure::from_atoms(std::move(atoms));
}

DiscreteMeasure mean_empirical(const SampleSet& samples, int G) {
    if (samples.configurations.empty()) throw Error(Errc::EmptySampleSet, "no recorded configurations");
    const int n = samples.spec.n;
    if (n != 1 && n != 2) throw Error(Errc::UnsupportedSize, "grid binning supports n = 1, 2");
    GridField counts(n, G);
    for (const auto& c : samples.configurations)
        for (const auto& p : c.points) counts[counts.nearest_node(p.coords())] += 1.0;
    return DiscreteMeasure::from_masses(counts);
}

// ---------------------------------------------------------------------------

namespace {

double perm_small(const double* A, int N) {
    switch (N) {
        case 1: return A[0];
        case 2: return A[0] * A[3] + A[1] * A[2];
        case 3:
            return A[0] * (A[4] * A[8] + A[5] * A[7]) + A[1] * (A[3] * A[8] + A[5] * A[6]) +
                   A[2] * (A[3] * A[7] + A[4] * A[6]);
        default: {
            // expansion along the first row
            double s = 0.0;
            double minor[9];
            for (int c = 0; c < 4; ++c) {
                int t = 0;
                for (int r = 1; r < 4; ++r)
                    for (int cc = 0; cc < 4; ++cc)
                        if (cc != c) minor[t++] = A[r * 4 + cc];
                s += A[c] * perm_small(minor, 3);
            }
            return s;
        }
    }
}

struct Marginal {
    std::vector<double> m;  // unnormalized marginal at each node
    std::vector<double> w;  // quadrature weights of mu0
};

// m(x1) = sum over grid tuples (x2..xN) of perm(Psi_{p_i}(x_j))^expo prod w(x_j);
// the summand is symmetric in x2..xN, so only nondecreasing tuples are visited
// and weighted by their multiplicity.
Marginal first_marginal(const EnsembleSpec& spec, int G, double expo) {
    spec.validate();
    if (spec.n != 1) throw Error(Errc::UnsupportedSize, "exact marginals need n = 1");
    const int N = spec.N();
    if (N > 4) throw Error(Errc::UnsupportedSize, "exact marginals need N <= 4");
    if (G < 2) throw Error(Errc::InvalidInput, "grid too coarse");
    const std::size_t g = static_cast<std::size_t>(G);

    Marginal out;
    out.w.resize(g);
    double wsum = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        double x = static_cast<double>(i) / G;
        out.w[i] = std::exp(spec.log_mu0(std::span<const double>(&x, 1)));
        wsum += out.w[i];
    }
    for (double& v : out.w) v /= wsum;

    // rows rescaled by their maxima; the common factor cancels against Z
    std::vector<double> W(static_cast<std::size_t>(N) * g);
    for (int i = 0; i < N; ++i) {
        double mx = -INFINITY;
        for (std::size_t t = 0; t < g; ++t) {
            TorusPoint x{static_cast<double>(t) / G};
            W[static_cast<std::size_t>(i) * g + t] = log_wave_function(spec.k, spec.points[static_cast<std::size_t>(i)], x);
            mx = std::max(mx, W[static_cast<std::size_t>(i) * g + t]);
        }
        for (std::size_t t = 0; t < g; ++t) W[static_cast<std::size_t>(i) * g + t] = std::exp(W[static_cast<std::size_t>(i) * g + t] - mx);
    }

    const double fact[5] = {1, 1, 2, 6, 24};
    out.m.assign(g, 0.0);
    parallel_for(g, [&](std::size_t g1) {
        double A[16];
        int idx[4] = {static_cast<int>(g1), 0, 0, 0};
        long double acc = 0.0L;
        auto eval = [&]() {
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) A[i * N + j] = W[static_cast<std::size_t>(i) * g + static_cast<std::size_t>(idx[j])];
            double p = perm_small(A, N);
            double val = expo == 1.0 ? p : std::pow(p, expo);
            double wt = 1.0;
            for (int j = 1; j < N; ++j) wt *= out.w[static_cast<std::size_t>(idx[j])];
            // multiplicity of the sorted tuple idx[1..N-1]
            double mult = fact[N - 1];
            int run = 1;
            for (int j = 2; j < N; ++j) {
                if (idx[j] == idx[j - 1]) {
                    ++run;
                } else {
                    mult /= fact[run];
                    run = 1;
                }
            }
            if (N > 1) mult /= fact[run];
            acc += static_cast<long double>(val * wt * mult);
        };
        if (N == 1) {
            eval();
        } else if (N == 2) {
            for (idx[1] = 0; idx[1] < G; ++idx[1]) eval();
        } else if (N == 3) {
            for (idx[1] = 0; idx[1] < G; ++idx[1])
                for (idx[2] = idx[1]; idx[2] < G; ++idx[2]) eval();
        } else {
            for (idx[1] = 0; idx[1] < G; ++idx[1])
                for (idx[2] = idx[1]; idx[2] < G; ++idx[2])
                    for (idx[3] = idx[2]; idx[3] < G; ++idx[3]) eval();
        }
        out.m[g1] = static_cast<double>(acc);
    });
    return out;
}

void zero_mean(GridField& f) {
    const double m = quadrature(f);
    for (double& v : f.values()) v -= m;
}

}  // namespace

GridField marginal_phi_exact(const EnsembleSpec& spec, int G) {
    if (spec.beta == 0.0) throw Error(Errc::BetaZero, "marginal potential needs beta != 0");
    const Marginal mg = first_marginal(spec, G, spec.beta / spec.k);
    double Z = 0.0;
    for (std::size_t i = 0; i < mg.m.size(); ++i) Z += mg.m[i] * mg.w[i];
    GridField phi(1, G);
    for (std::size_t i = 0; i < mg.m.size(); ++i) phi[i] = std::log(mg.m[i] / Z) / spec.beta;
    return phi;
}

TransportPotential transport_potential_estimate(const EnsembleSpec& spec, int G) {
    const Marginal mg = first_marginal(spec, G, 1.0);
    TransportPotential out{GridField(1, G), GridField(1, G)};
    for (std::size_t i = 0; i < mg.m.size(); ++i) {
        const double l = std::log(mg.m[i]);
        out.over_k[i] = l / spec.k;
        out.over_N[i] = l / spec.N();
    }
    zero_mean(out.over_k);
    zero_mean(out.over_N);
    return out;
}

double mgf_zero_temp(int k, const GridField& phi, const std::optional<DiscreteMeasure>& mu0) {
    if (phi.dim() != 1) throw Error(Errc::UnsupportedSize, "generating function implemented for n = 1");
    if (k < 1) throw Error(Errc::InvalidInput, "k must be >= 1");
    const int G = phi.resolution();
    if (G < 8 * k) throw Error(Errc::InvalidInput, "need G >= 8k for the per-factor quadrature");
    std::vector<double> logw(static_cast<std::size_t>(G));
    if (mu0) {
        const GridField ms = mu0->masses();
        if (!ms.same_grid(phi)) throw Error(Errc::GridMismatch, "mu0 and phi on different grids");
        for (int i = 0; i < G; ++i) logw[static_cast<std::size_t>(i)] = std::log(ms[static_cast<std::size_t>(i)]);
    } else {
        std::fill(logw.begin(), logw.end(), -std::log(static_cast<double>(G)));
    }
    const auto pts = lattice_points(1, k);
    std::vector<double> e(static_cast<std::size_t>(G));
    long double total = std::lgamma(static_cast<double>(k) + 1.0);
    for (const auto& p : pts) {
        double mx = -INFINITY;
        for (int i = 0; i < G; ++i) {
            const double x = static_cast<double>(i) / G;
            double v = log_wave_1d(k, x - p[0]) + k * phi[static_cast<std::size_t>(i)] + logw[static_cast<std::size_t>(i)];
            e[static_cast<std::size_t>(i)] = v;
            mx = std::max(mx, v);
        }
        double s = 0.0;
        for (double v : e) s += std::exp(v - mx);
        total += mx + std::log(s);
    }
    return static_cast<double>(total) / (static_cast<double>(k) * k);
}

}  // namespace torusma
