#pragma once
// beta-deformed permanental Gibbs measures: Metropolis sampling, empirical
// measures, exact low-N marginals and the zero-temperature generating function.

#include <cstdint>
#include <string>
#include <vector>

#include "torusma/ensemble.hpp"

namespace torusma {

struct ChainParams {
    long n_steps = 100000;
    long burn_in = 1000;
    long thin = 1;
    double proposal_sigma = 0.0;  // 0 selects the default 1/(2k)
    std::uint64_t seed = 0;
    int n_chains = 1;

    void validate() const;
};

struct SampleSet {
    std::vector<Configuration> configurations;  // chain 0 first, then chain 1, ...
    std::vector<int> chain;
    std::vector<long> step;
    std::vector<double> chain_acceptance;
    double acceptance_rate = 0.0;
    EnsembleSpec spec;
    std::vector<std::string> warnings;  // NonErgodicWarning entries

    bool non_ergodic() const { return !warnings.empty(); }
};

double log_density_unnormalized(const Configuration& cfg, const EnsembleSpec& spec);

SampleSet mcmc_sample(const EnsembleSpec& spec, const ChainParams& params);

DiscreteMeasure empirical_measure(const Configuration& cfg);

// Average of the empirical measures, binned to nearest nodes of a G-grid.
DiscreteMeasure mean_empirical(const SampleSet& samples, int G);

// phi_N = (1/beta) log(first-marginal density w.r.t. mu0), n = 1, N <= 4.
GridField marginal_phi_exact(const EnsembleSpec& spec, int G);

struct TransportPotential {
    GridField over_k;  // (1/k) log of the integral, zero mean
    GridField over_N;  // same integral with the literal 1/N prefactor, zero mean
};

TransportPotential transport_potential_estimate(const EnsembleSpec& spec, int G);

// (1/kN)[log N! + sum_p log int exp(k(-c_p + phi)) dmu0] for the k-lattice, n = 1.
// mu0 empty means Lebesgue. Requires G >= 8k.
double mgf_zero_temp(int k, const GridField& phi, const std::optional<DiscreteMeasure>& mu0 = std::nullopt);

}  // namespace torusma
