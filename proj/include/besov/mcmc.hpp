#pragma once

#include <cstdint>
#include <vector>

#include "besov/estimators.hpp"

namespace besov {

// Preconditioned Crank-Nicolson in a Gaussianized coordinate system: the
// chain state z has a standard normal reference law; Laplace coefficients
// are reproduced exactly through the inverse-CDF transport
// c_kl = scale_k * T(z_kl), T = F_Laplace^{-1} o Phi_normal (T = id * scale
// for the Gaussian comparison prior).  pCN is reversible for the reference
// law, so the acceptance ratio is the likelihood ratio alone.
struct ChainConfig {
    int n_samples = 2000;   // post burn-in, before thinning
    int burn_in = 500;
    double beta = 0.2;      // pCN step in (0, 1]
    int thinning = 1;
    std::uint64_t seed = 1;
    CoefficientTree init;   // coefficient-space init (zero tree = prior center)
    bool adapt_beta = true; // tune toward 25% acceptance during burn-in
    bool store_samples = true;

    void validate() const;
};

struct ChainOutput {
    std::vector<CoefficientTree> samples;  // thinned coefficient trees
    std::vector<double> log_likelihood_trace;
    double acceptance_rate = 0.0;
    double final_beta = 0.0;
    bool degenerate_acceptance = false;    // < 1% after burn-in
    CoefficientTree mean;                  // running mean over kept samples
    double ess_loglik = 0.0;               // batch-means ESS of the loglik trace
};

ChainOutput run_chain(const Observation& obs, const ForwardModel& model, const PriorSpec& prior,
                      const ChainConfig& cfg);

// Standard-normal-to-standard-Laplace transport and its inverse.
double gaussian_to_laplace(double z);
double laplace_to_gaussian(double x);

// Batch-means effective sample size of a scalar trace.
double batch_means_ess(const std::vector<double>& trace);

// Fractions of posterior samples outside prediction/parameter balls of
// radius r around the truth.
struct ContractionStat {
    double prediction_fraction = 0.0; // ||G(F) - G(F0)|| >= r
    double parameter_fraction = 0.0;  // ||f - f0||_{L2} >= r
    int n_samples = 0;
};
ContractionStat posterior_contraction_stat(const ChainOutput& chain, const CoefficientTree& F0,
                                           const ForwardModel& model, double radius);

} // namespace besov
