// torus-ma: command-line front end for the library.
//
// Every subcommand accepts --config FILE (a flat JSON object keyed by flag
// name) and --out DIR. Flags given on the command line win over the file.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "torusma/ctransform.hpp"
#include "torusma/error.hpp"
#include "torusma/io.hpp"
#include "torusma/ma_solver.hpp"
#include "torusma/rng.hpp"
#include "torusma/sampler.hpp"
#include "torusma/transport.hpp"
#include "torusma/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace torusma;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNonConvergence = 3, kSamplerWarning = 4, kVerifyFailed = 5 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flag values override the config file; everything is typed on lookup.
class Params {
public:
    explicit Params(std::string command) : command_(std::move(command)) {}

    void bind(CLI::App* app, const std::string& key, const std::string& help) {
        opts_[key] = app->add_option("--" + key, raw_[key], help);
    }
    void bind_flag(CLI::App* app, const std::string& key, const std::string& help) {
        flags_[key] = app->add_flag("--" + key, help);
    }

    void load_config() {
        if (config_path.empty()) return;
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot read config file " + config_path);
        try {
            is >> file_;
        } catch (const json::exception& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!file_.is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [key, _] : file_.items())
            if (!opts_.count(key) && !flags_.count(key) && key != "command" && key != "out")
                throw ConfigError("unknown key '" + key + "' for " + command_);
        if (file_.contains("command") && file_["command"] != command_)
            throw ConfigError("config file is for command " + file_["command"].dump());
        config_dir_ = fs::path(config_path).parent_path();
    }

    bool has(const std::string& key) const {
        if (auto it = opts_.find(key); it != opts_.end() && it->second->count() > 0) return true;
        return file_.contains(key);
    }

    std::string str(const std::string& key, const std::optional<std::string>& def = std::nullopt) const {
        if (auto it = opts_.find(key); it != opts_.end() && it->second->count() > 0) return raw_.at(key);
        if (file_.contains(key)) {
            const auto& v = file_.at(key);
            return v.is_string() ? v.get<std::string>() : v.dump();
        }
        if (def) return *def;
        throw ConfigError("missing required option --" + key);
    }

    double real(const std::string& key, std::optional<double> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            throw ConfigError("missing required option --" + key);
        }
        const std::string s = str(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("--" + key + " expects a number, got '" + s + "'");
        }
    }

    long integer(const std::string& key, std::optional<long> def = std::nullopt, long lo = 1) const {
        if (!has(key)) {
            if (def) return *def;
            throw ConfigError("missing required option --" + key);
        }
        const std::string s = str(key);
        long v = 0;
        try {
            std::size_t pos = 0;
            v = std::stol(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ConfigError("--" + key + " expects an integer, got '" + s + "'");
        }
        if (v < lo) throw ConfigError("--" + key + " must be >= " + std::to_string(lo));
        return v;
    }

    std::uint64_t seed(std::uint64_t def) const {
        if (!has("seed")) return def;
        const std::string s = str("seed");
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(s, &pos);
            if (pos != s.size() || s.front() == '-') throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("--seed expects a nonnegative 64-bit integer, got '" + s + "'");
        }
    }

    bool flag(const std::string& key) const {
        if (auto it = flags_.find(key); it != flags_.end() && it->second->count() > 0) return true;
        return file_.contains(key) && file_.at(key).is_boolean() && file_.at(key).get<bool>();
    }

    // Paths from the config file resolve against its directory.
    fs::path path(const std::string& key) const {
        fs::path p = str(key);
        const bool from_file = !(opts_.count(key) && opts_.at(key)->count() > 0);
        if (from_file && p.is_relative() && !config_dir_.empty()) p = config_dir_ / p;
        return p;
    }

    std::string config_path;
    std::string out_dir = ".";

private:
    std::string command_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, CLI::Option*> opts_;
    std::map<std::string, CLI::Option*> flags_;
    json file_ = json::object();
    fs::path config_dir_;
};

fs::path prepare_out(const Params& p) {
    fs::path out = p.out_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string());
    return out;
}

// uniform | cosine | gamma | path to a grid CSV (density, normalized here)
struct Mu0Choice {
    std::string label;
    std::optional<DiscreteMeasure> measure;  // empty for uniform
};

Mu0Choice resolve_mu0(const Params& p, int dim, int G) {
    const std::string name = p.str("mu0", std::string("uniform"));
    if (name == "uniform") return {name, std::nullopt};
    if (name == "cosine") {
        if (dim != 1) throw ConfigError("--mu0 cosine is one-dimensional");
        return {name, DiscreteMeasure::normalized_density(GridField::from_function(
                          1, G, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * x[0]); }))};
    }
    if (name == "gamma") return {name, gamma_density(dim, G)};
    const fs::path path = p.path("mu0");
    if (!fs::exists(path)) throw ConfigError("--mu0 must be uniform, cosine, gamma or an existing grid CSV: " + name);
    GridField f = io::read_grid_csv(path);
    if (f.dim() != dim || f.resolution() != G)
        throw ConfigError("mu0 grid " + path.string() + " does not match dim " + std::to_string(dim) + ", grid " +
                          std::to_string(G));
    return {path.string(), DiscreteMeasure::normalized_density(std::move(f))};
}

DiscreteMeasure mu0_or_uniform(const Mu0Choice& c, int dim, int G) {
    return c.measure ? *c.measure : DiscreteMeasure::uniform(dim, G);
}

json history_json(const std::vector<double>& v) {
    auto a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

double sup_abs(const GridField& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::fabs(v));
    return s;
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------

int cmd_solve(const Params& p) {
    const double beta = p.real("beta");
    if (beta == 0.0) throw ConfigError("--beta must be nonzero");
    const int dim = static_cast<int>(p.integer("dim", 1));
    if (dim > 2) throw ConfigError("--dim must be 1 or 2");
    const int G = static_cast<int>(p.integer("grid", 256, 4));
    const double tol = p.real("tol", kDefaultSolveTol);
    const int max_iter = static_cast<int>(p.integer("max-iter", 500));
    const Mu0Choice mu0 = resolve_mu0(p, dim, G);
    const fs::path out = prepare_out(p);

    const SolveResult res = minimize_F(beta, mu0_or_uniform(mu0, dim, G), G, tol, max_iter);
    io::write_grid_csv(out / "phi_star.csv", res.phi);
    json j{{"command", "solve"},
           {"beta", beta},
           {"dim", dim},
           {"grid", G},
           {"mu0", mu0.label},
           {"tol", tol},
           {"converged", res.converged},
           {"iterations", res.iterations},
           {"residual", res.residual},
           {"F_value", res.F_value},
           {"sup_abs_phi", sup_abs(res.phi)},
           {"xi_rule", solver_rule(dim) == XiRule::semidiscrete ? "semidiscrete" : "grid"},
           {"F_history", history_json(res.F_history)}};
    write_json(out / "solve_result.json", j);
    if (!res.converged) {
        std::cerr << "NonConvergence: residual " << io::fmt(res.residual) << " after " << res.iterations
                  << " iterations\n";
        return kNonConvergence;
    }
    return kOk;
}

int cmd_sample(const Params& p) {
    const int n = static_cast<int>(p.integer("n", 1));
    const int k = static_cast<int>(p.integer("k"));
    const double beta = p.real("beta");
    const int G = static_cast<int>(p.integer("grid", 64, 4));
    ChainParams cp;
    cp.n_steps = p.integer("steps", 100000);
    cp.burn_in = p.integer("burn-in", std::min<long>(1000, cp.n_steps / 10), 0);
    cp.n_chains = static_cast<int>(p.integer("chains", 1));
    cp.proposal_sigma = p.real("sigma", 0.0);
    cp.seed = p.seed(0);
    const Mu0Choice mu0 = resolve_mu0(p, n, G);
    EnsembleSpec spec = EnsembleSpec::lattice(n, k, beta, mu0.measure);
    cp.thin = p.integer("thin", spec.N());
    spec.validate();
    cp.validate();
    const fs::path out = prepare_out(p);

    const SampleSet ss = mcmc_sample(spec, cp);
    {
        std::ostringstream os;
        os << "chain,step";
        for (int i = 0; i < spec.N(); ++i)
            for (int a = 0; a < n; ++a) os << ",x" << i << '_' << a;
        os << '\n';
        for (std::size_t s = 0; s < ss.configurations.size(); ++s) {
            os << ss.chain[s] << ',' << ss.step[s];
            for (const auto& pt : ss.configurations[s].points)
                for (double c : pt.coords()) os << ',' << io::fmt(c);
            os << '\n';
        }
        io::write_text(out / "samples.csv", os.str());
    }
    const DiscreteMeasure mean = mean_empirical(ss, G);
    io::write_grid_csv(out / "mean_empirical.csv", mean.masses());

    json j{{"command", "sample"},
           {"n", n},
           {"k", k},
           {"N", spec.N()},
           {"beta", beta},
           {"mu0", mu0.label},
           {"grid", G},
           {"steps", cp.n_steps},
           {"burn_in", cp.burn_in},
           {"thin", cp.thin},
           {"chains", cp.n_chains},
           {"proposal_sigma", cp.proposal_sigma == 0.0 ? 1.0 / (2.0 * k) : cp.proposal_sigma},
           {"seed", cp.seed},
           {"n_samples", ss.configurations.size()},
           {"acceptance_rate", ss.acceptance_rate},
           {"chain_acceptance", history_json(ss.chain_acceptance)},
           {"warnings", ss.warnings}};
    if (n == 1 && beta != 0.0) {
        // distance to the Monge-Ampere measure of the limiting potential
        const SolveResult res = minimize_F(beta, mu0_or_uniform(mu0, 1, G), G, 1e-9, 200);
        j["solver_converged"] = res.converged;
        j["w1_to_solver_ma"] = wasserstein_cost(mean, ma_measure(res.phi, XiRule::semidiscrete), 1);
    }
    write_json(out / "summary.json", j);
    for (const auto& w : ss.warnings) std::cerr << w << '\n';
    if (p.flag("strict") && ss.non_ergodic()) return kSamplerWarning;
    return kOk;
}

int cmd_potential(const Params& p) {
    const int k = static_cast<int>(p.integer("k"));
    const double beta = p.real("beta");
    if (beta == 0.0) throw ConfigError("--beta must be nonzero");
    const int G = static_cast<int>(p.integer("grid", 64, 4));
    const Mu0Choice mu0 = resolve_mu0(p, 1, G);
    EnsembleSpec spec = EnsembleSpec::lattice(1, k, beta, mu0.measure);
    spec.validate();
    const fs::path out = prepare_out(p);

    json j{{"command", "potential"}, {"k", k}, {"N", spec.N()}, {"beta", beta}, {"grid", G}, {"mu0", mu0.label}};
    const GridField phi_N = marginal_phi_exact(spec, G);
    io::write_grid_csv(out / "phi_N.csv", phi_N);
    j["sup_abs_phi_N"] = sup_abs(phi_N);
    const TransportPotential tp = transport_potential_estimate(spec, G);
    io::write_grid_csv(out / "transport_potential_over_k.csv", tp.over_k);
    io::write_grid_csv(out / "transport_potential_over_N.csv", tp.over_N);
    j["sup_abs_over_k"] = sup_abs(tp.over_k);
    j["sup_abs_over_N"] = sup_abs(tp.over_N);
    const SolveResult res = minimize_F(beta, mu0_or_uniform(mu0, 1, G), G, 1e-9, 200);
    double gap = 0.0;
    for (std::size_t i = 0; i < phi_N.size(); ++i) gap = std::max(gap, std::fabs(phi_N[i] - res.phi[i]));
    j["sup_distance_to_phi_star"] = gap;
    j["solver_converged"] = res.converged;
    write_json(out / "potential.json", j);
    return kOk;
}

int cmd_transport_map(const Params& p) {
    GridField phi;
    json j{{"command", "transport-map"}};
    if (p.has("phi")) {
        phi = io::read_grid_csv(p.path("phi"));
        j["source"] = p.path("phi").string();
    } else {
        const double beta = p.real("beta");
        if (beta == 0.0) throw ConfigError("--beta must be nonzero");
        const int G = static_cast<int>(p.integer("grid", 256, 4));
        const Mu0Choice mu0 = resolve_mu0(p, 1, G);
        const SolveResult res = minimize_F(beta, mu0_or_uniform(mu0, 1, G), G, 1e-9, 200);
        if (!res.converged) {
            std::cerr << "NonConvergence: residual " << io::fmt(res.residual) << '\n';
            return kNonConvergence;
        }
        phi = res.phi;
        j["source"] = "solve";
        j["beta"] = beta;
        j["mu0"] = mu0.label;
    }
    const std::string rule_name = p.str("rule", std::string("grid"));
    if (rule_name != "grid" && rule_name != "semidiscrete") throw ConfigError("--rule must be grid or semidiscrete");
    const XiRule rule = rule_name == "grid" ? XiRule::grid : XiRule::semidiscrete;
    const fs::path out = prepare_out(p);

    // the map that carries dx onto MA(phi) is the c-gradient of phi^c
    const CGradientField cg = c_gradient(c_transform(phi));
    std::ostringstream os;
    const int dim = phi.dim();
    os << "node";
    for (int a = 0; a < dim; ++a) os << ",x" << a;
    for (int a = 0; a < dim; ++a) os << ",y" << a;
    os << ",defined\n";
    for (std::size_t i = 0; i < phi.size(); ++i) {
        os << i;
        const TorusPoint x = phi.node(i);
        for (double c : x.coords()) os << ',' << io::fmt(c);
        for (double c : cg.map[i].coords()) os << ',' << io::fmt(c);
        os << ',' << (cg.defined_mask[i] ? 1 : 0) << '\n';
    }
    io::write_text(out / "transport_map.csv", os.str());
    const DiscreteMeasure ma = ma_measure(phi, rule);
    io::write_grid_csv(out / "ma_measure.csv", ma.masses());
    j["dim"] = dim;
    j["grid"] = phi.resolution();
    j["rule"] = rule_name;
    j["defined_fraction"] = cg.defined_fraction();
    write_json(out / "transport_map.json", j);
    return kOk;
}

int cmd_rate(const Params& p) {
    const double beta = p.real("beta");
    if (beta == 0.0) throw ConfigError("--beta must be nonzero");
    const int G = static_cast<int>(p.integer("grid", 256, 4));
    const long n_perturb = p.integer("perturb", 0, 0);
    const double eps = p.real("epsilon", 0.1);
    const std::uint64_t seed = p.seed(0);
    const Mu0Choice mu0c = resolve_mu0(p, 1, G);
    const DiscreteMeasure mu0 = mu0_or_uniform(mu0c, 1, G);
    std::optional<DiscreteMeasure> mu;
    if (p.has("mu")) {
        GridField f = io::read_grid_csv(p.path("mu"));
        if (f.dim() != 1 || f.resolution() != G) throw ConfigError("--mu grid must be one-dimensional with --grid nodes");
        mu = DiscreteMeasure::normalized_density(std::move(f));
    }
    const fs::path out = prepare_out(p);

    const SolveResult res = minimize_F(beta, mu0, G, 1e-10, 200);
    if (!res.converged) {
        std::cerr << "NonConvergence: residual " << io::fmt(res.residual) << '\n';
        return kNonConvergence;
    }
    const DiscreteMeasure mu_star = DiscreteMeasure::from_masses(sd::masses(res.phi));
    io::write_grid_csv(out / "mu_star.csv", mu_star.masses());
    auto report = [&](const DiscreteMeasure& m) {
        const RateFunctionReport r = rate_function(m, beta, mu0, mu_star);
        return json{{"w2", r.w2}, {"entropy", r.entropy}, {"G", r.G_value}};
    };
    const RateFunctionReport star = rate_function(mu_star, beta, mu0, mu_star);
    json j{{"command", "rate"},
           {"beta", beta},
           {"grid", G},
           {"mu0", mu0c.label},
           {"constant_C", star.constant_C},
           {"F_star", res.F_value},
           {"mu_star", report(mu_star)},
           {"identity_residual", std::fabs(beta * star.w2 + star.entropy + beta * res.F_value)}};
    if (mu) j["measure"] = report(*mu);
    auto arr = json::array();
    double min_G = star.G_value;
    CounterRng rng = CounterRng::stream(seed, 0);
    const GridField ms = mu_star.masses();
    for (long s = 0; s < n_perturb; ++s) {
        GridField w(1, G);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = ms[i] * (1.0 + eps * (2.0 * rng.uniform() - 1.0));
        const json r = report(DiscreteMeasure::normalized_density(w));
        min_G = std::min(min_G, r["G"].get<double>());
        arr.push_back(r);
    }
    j["perturbed"] = arr;
    j["min_G"] = min_G;
    write_json(out / "rate.json", j);
    return kOk;
}

int cmd_verify(const Params& p) {
    VerifyOptions o;
    o.seed = p.seed(1);
    o.kmax = static_cast<int>(p.integer("kmax", 64, 8));
    const std::string suite = p.str("suite", std::string("all"));
    if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw ConfigError("unknown suite '" + suite + "'");
    const fs::path out = prepare_out(p);
    const auto results = run_suite(suite, o);
    for (const auto& c : results)
        std::printf("%-4s %-11s %-34s %12.4e  tol %.1e\n", c.passed ? "PASS" : "FAIL", c.suite.c_str(), c.name.c_str(),
                    c.value, c.tolerance);
    write_json(out / "verify_report.json", verify_report_json(results, suite, o));
    return all_passed(results) ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real Monge-Ampere equations on the flat torus: solver, sampler, transport and identity checks"};
    app.require_subcommand(1);

    struct Command {
        std::string name, help;
        int (*run)(const Params&);
        std::vector<std::pair<std::string, std::string>> options;
        std::vector<std::pair<std::string, std::string>> flags;
    };
    const std::string mu0_help = "background measure: uniform, cosine, gamma or a grid CSV";
    std::vector<Command> commands = {
        {"solve", "minimize F and write phi_star.csv, solve_result.json", cmd_solve,
         {{"beta", "inverse temperature (nonzero)"}, {"mu0", mu0_help}, {"grid", "nodes per axis"},
          {"dim", "torus dimension (1 or 2)"}, {"tol", "residual tolerance"}, {"max-iter", "iteration cap"}},
         {}},
        {"sample", "Metropolis sampling; writes samples.csv, mean_empirical.csv, summary.json", cmd_sample,
         {{"k", "lattice parameter, N = k^n"}, {"n", "torus dimension"}, {"beta", "inverse temperature"},
          {"mu0", mu0_help}, {"grid", "grid for mu0 and the mean empirical measure"}, {"steps", "steps per chain"},
          {"burn-in", "discarded initial steps"}, {"thin", "keep every thin-th step (default N)"},
          {"chains", "independent chains"}, {"sigma", "proposal scale (0: 1/(2k))"}, {"seed", "64-bit seed"}},
         {{"strict", "exit 4 on sampler warnings"}}},
        {"potential", "exact marginal potential phi_N and transport potentials (n = 1, N <= 4)", cmd_potential,
         {{"k", "lattice parameter"}, {"beta", "inverse temperature"}, {"mu0", mu0_help}, {"grid", "nodes"}},
         {}},
        {"transport-map", "c-gradient transport map and Monge-Ampere measure of a potential", cmd_transport_map,
         {{"phi", "grid CSV of the potential (otherwise solve with --beta)"}, {"beta", "inverse temperature"},
          {"mu0", mu0_help}, {"grid", "nodes"}, {"rule", "grid or semidiscrete MA measure"}},
         {}},
        {"rate", "rate function at the minimizer, a given measure and perturbations", cmd_rate,
         {{"beta", "inverse temperature"}, {"mu0", mu0_help}, {"grid", "nodes"}, {"mu", "grid CSV of a measure"},
          {"perturb", "number of random perturbations of mu*"}, {"epsilon", "relative perturbation size"},
          {"seed", "64-bit seed"}},
         {}},
        {"verify", "property suites; writes verify_report.json", cmd_verify,
         {{"suite", "ctransform, detperm, mgf, lipschitz, duality or all"}, {"seed", "64-bit seed"},
          {"kmax", "largest k of the generating-function sequence"}},
         {}},
    };

    std::vector<std::unique_ptr<Params>> params;
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        auto prm = std::make_unique<Params>(c.name);
        sub->add_option("--config", prm->config_path, "JSON file with option values");
        sub->add_option("--out", prm->out_dir, "output directory");
        for (const auto& [k, h] : c.options) prm->bind(sub, k, h);
        for (const auto& [k, h] : c.flags) prm->bind_flag(sub, k, h);
        params.push_back(std::move(prm));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            params[i]->load_config();
            return commands[i].run(*params[i]);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kConfig;
        } catch (const Error& e) {
            std::cerr << e.what() << '\n';
            return e.code() == Errc::NewtonDivergence ? kNonConvergence : kConfig;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kConfig;
        }
    }
    return kConfig;
}
