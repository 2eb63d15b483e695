// Acceptance criteria A1-A11. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Tolerances and budgets are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "torusma/ctransform.hpp"
#include "torusma/ma_solver.hpp"
#include "torusma/rng.hpp"
#include "torusma/sampler.hpp"
#include "torusma/theta.hpp"
#include "torusma/transport.hpp"
#include "torusma/verify.hpp"

using namespace torusma;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

DiscreteMeasure cosine_mu0(int G) {
    return DiscreteMeasure::normalized_density(
        GridField::from_function(1, G, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(kTau * x[0]); }));
}

double sup_abs(const GridField& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::fabs(v));
    return s;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Outcome a1() {
    const auto res = minimize_F(1.0, DiscreteMeasure::uniform(1, 256), 256, 1e-9);
    const double s = sup_abs(res.phi);
    return {res.converged && s <= 1e-6 && res.residual <= 1e-6,
            "sup|phi*| = " + num(s) + ", residual = " + num(res.residual)};
}

Outcome a2() {
    const int G = 512;
    const auto f = GridField::from_function(1, G, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(kTau * x[0]); });
    double worst = 0.0;
    bool conv = true;
    for (double beta : {0.5, 1.0, 2.0}) {
        const auto res = minimize_F(beta, DiscreteMeasure::normalized_density(f), G, 1e-10);
        conv = conv && res.converged;
        const GridField ode = ode_oracle_1d(beta, f, G);
        for (std::size_t i = 0; i < ode.size(); ++i) worst = std::max(worst, std::fabs(ode[i] - res.phi[i]));
    }
    return {conv && worst <= 1e-3, "max sup|phi - phi_ode| = " + num(worst)};
}

Outcome a3() {
    const int G = 512;
    const auto mu0 = cosine_mu0(G);
    const auto star = minimize_F(1.0, mu0, G, 1e-10);
    const DiscreteMeasure target = ma_measure(star.phi, XiRule::semidiscrete);
    std::vector<double> w;
    std::string detail;
    for (int k : {4, 8, 16}) {
        ChainParams prm;
        prm.n_steps = 200000;
        prm.burn_in = 10000;
        prm.thin = k;
        prm.n_chains = 4;
        prm.seed = 2024;
        // The target is nearly flat at these k; even the widest allowed move
        // accepts ~80%, and 1/(2k) random-walks far too slowly at k = 16.
        prm.proposal_sigma = 0.5;
        const SampleSet ss = mcmc_sample(EnsembleSpec::lattice(1, k, 1.0, mu0), prm);
        w.push_back(wasserstein_cost(mean_empirical(ss, G), target, 1));
        detail += "W1(k=" + std::to_string(k) + ") = " + num(w.back()) + " ";
    }
    const bool trend = w[1] <= w[0] && w[2] <= w[1];
    return {star.converged && trend && w[2] <= 0.05, detail};
}

Outcome a4() {
    // With uniform mu0 the exact phi_N is zero by translation invariance, so
    // the sequence sits at rounding level; compare with that much slack.
    constexpr double kRound = 1e-12;
    std::vector<double> s;
    std::string detail;
    for (int N : {2, 3, 4}) {
        s.push_back(sup_abs(marginal_phi_exact(EnsembleSpec::lattice(1, N, 1.0), 128)));
        detail += "sup|phi_" + std::to_string(N) + "| = " + num(s.back()) + " ";
    }
    // informational: the same sequence for a non-uniform mu0
    detail += "(cosine mu0:";
    for (int N : {2, 3, 4})
        detail += " " + num(sup_abs(marginal_phi_exact(EnsembleSpec::lattice(1, N, 1.0, cosine_mu0(128)), 128)));
    detail += ")";
    return {s[1] <= s[0] + kRound && s[2] <= s[1] + kRound && s[2] <= 0.2, detail};
}

Outcome a5() {
    const int G = 512;
    bool ok = true;
    std::string detail;
    for (double amp : {0.0, 0.2}) {
        const auto phi = GridField::from_function(1, G, [&](std::span<const double> x) { return amp * std::cos(kTau * x[0]); });
        GridField neg = phi;
        for (double& v : neg.values()) v = -v;
        const double target = xi(neg, XiRule::semidiscrete);
        double prev = INFINITY, last = 0.0;
        for (int k : {8, 16, 32, 64}) {
            const double gap = std::fabs(mgf_zero_temp(k, phi) - target);
            ok = ok && gap < prev;
            prev = last = gap;
        }
        ok = ok && last <= 0.05;
        detail += "gap64(amp " + num(amp) + ") = " + num(last) + " ";
    }
    const double v8 = mgf_zero_temp(8, GridField(1, G, 0.0));
    ok = ok && std::fabs(v8 - 0.1506) <= 1e-3;
    return {ok, detail + "mgf(8, 0) = " + num(v8)};
}

Outcome a6() {
    double worst = 0.0;
    bool weak = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CounterRng rng = CounterRng::stream(seed, 6);
        std::vector<Atom> atoms;
        for (int i = 0; i < 8; ++i) atoms.push_back({TorusPoint{rng.uniform()}, 1.0 / 8});
        const auto r = duality_gap(DiscreteMeasure::from_atoms(atoms), 500);
        worst = std::max(worst, r.gap);
        weak = weak && r.weak_duality_held && r.gap >= -1e-12;
    }
    return {worst <= 1e-6 && weak, "max gap = " + num(worst) + (weak ? ", weak duality held" : ", weak duality VIOLATED")};
}

Outcome a7() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (int N = 1; N <= 3; ++N) {
            worst = std::max(worst, verify_detperm(N, 4 * N + 2, seed * 31 + N).rel_error);
            worst = std::max(worst, gram_identity(N, seed * 37 + N, 4 * N + 2).rel_error);
        }
        CounterRng rng = CounterRng::stream(seed, 7);
        for (int N = 1; N <= 4; ++N) {
            std::vector<double> a(static_cast<std::size_t>(N * N)), la(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                a[i] = 0.05 + rng.uniform();
                la[i] = std::log(a[i]);
            }
            const double ref = std::exp(log_permanent(la, N));
            worst = std::max(worst, std::fabs(fourier_permanent(a, N, 4 * N + 2) - ref) / ref);
        }
    }
    return {worst <= 1e-9, "max relative error = " + num(worst)};
}

Outcome a8() {
    double worst = 0.0;
    std::string detail;
    for (int k : {1, 2}) {
        CounterRng rng = CounterRng::stream(8, static_cast<std::uint64_t>(k));
        std::vector<Configuration> ys;
        for (int s = 0; s < 10; ++s) {
            Configuration c;
            for (int i = 0; i < k; ++i) c.points.push_back(TorusPoint{rng.uniform()});
            ys.push_back(c);
        }
        const auto fit = theta_pushforward_fit(k, ys, 64);
        worst = std::max(worst, fit.rel_error);
        detail += "constant(N=" + std::to_string(k) + ")/(4pi)^N - 1 = " + num(fit.rel_error) + " ";
    }
    const double dens = theta_gamma_density_check(64, 64);
    return {worst <= 1e-6 && dens <= 1e-8, detail + "density mismatch = " + num(dens)};
}

Outcome a9() {
    const int G = 256;
    const auto r1 = uniqueness_probe(1.0, cosine_mu0(G), G, 10, 91);
    const auto r2 = uniqueness_probe(-1.0, gamma_density(1, G), G, 10, 92);
    const bool ok = r1.converged_count == 10 && r2.converged_count == 10 && r1.sup_spread <= 1e-3 && r2.sup_spread <= 1e-3;
    return {ok, "spread(beta=1) = " + num(r1.sup_spread) + ", spread(beta=-1, gamma) = " + num(r2.sup_spread)};
}

Outcome a10() {
    const int G = 256;
    const auto mu0 = cosine_mu0(G);
    const auto res = minimize_F(1.0, mu0, G, 1e-10);
    const DiscreteMeasure mu_star = DiscreteMeasure::from_masses(sd::masses(res.phi));
    const auto at_star = rate_function(mu_star, 1.0, mu0, mu_star);
    CounterRng rng = CounterRng::stream(10, 0);
    const GridField ms = mu_star.masses();
    double min_G = INFINITY;
    for (int s = 0; s < 50; ++s) {
        const double eps = 0.01 + 0.3 * rng.uniform();
        GridField w(1, G);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = ms[i] * (1.0 + eps * (2.0 * rng.uniform() - 1.0));
        min_G = std::min(min_G, rate_function(DiscreteMeasure::normalized_density(w), 1.0, mu0, mu_star).G_value);
    }
    const double ident = std::fabs(at_star.w2 + at_star.entropy + res.F_value);
    const bool ok = res.converged && at_star.G_value == 0.0 && min_G >= -1e-6 && ident <= 2e-2;
    return {ok, "G(mu*) = " + num(at_star.G_value) + ", min G(perturbed) = " + num(min_G) + ", |bW2 + Ent + bF| = " + num(ident)};
}

Outcome a11() {
    int failed = 0, total = 0;
    std::string first;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        VerifyOptions o;
        o.seed = seed;
        for (const auto& c : run_suite("all", o)) {
            ++total;
            if (!c.passed) {
                ++failed;
                if (first.empty()) first = " first: " + c.suite + "/" + c.name + " seed " + std::to_string(seed);
            }
        }
    }
    return {failed == 0, std::to_string(total - failed) + "/" + std::to_string(total) + " checks passed" + first};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* id;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {"A1", 10, a1},  {"A2", 60, a2},  {"A3", 900, a3}, {"A4", 300, a4},  {"A5", 30, a5},    {"A6", 30, a6},
        {"A7", 30, a7},  {"A8", 60, a8},  {"A9", 600, a9}, {"A10", 300, a10}, {"A11", 600, a11},
    };
    // optional filter: acceptance A1 A5 ...
    std::vector<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs <= c.budget_s;
        if (!pass) ++failures;
        std::printf("%s %s  %s  [%.1fs / %.0fs]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
