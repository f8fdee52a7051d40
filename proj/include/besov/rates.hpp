#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "besov/estimators.hpp"
#include "besov/truths.hpp"

namespace besov {

struct Fraction {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// Exact rate exponents of the theory:
//   delta: eps-exponent of the contraction / prediction-risk rate
//          (2 kappa + 2 alpha) / (2 kappa + 2 alpha + d)
//   theta: parameter-space exponent of the PDE models
//   linear / minimax: direct-model rates over B^alpha_pq balls (p = q here)
struct RateExponents {
    Fraction delta;
    std::optional<Fraction> theta;
    std::optional<Fraction> linear_rate;  // l_eps exponent (direct model)
    std::optional<Fraction> minimax_rate; // m_eps exponent (direct model)
};

RateExponents theoretical_exponents(ForwardModel::Kind kind, int alpha, int d,
                                    int smoothing_kappa = 0, int p = 1);

// One row of a rate experiment; the CSV schema is exactly
// model,prior,estimator,alpha,d,eps,replicate,J,lambda,err_pred,err_param,seconds
struct RateRecord {
    std::string model;
    std::string prior;
    std::string estimator;
    int alpha = 0;
    int d = 1;
    double eps = 0.0;
    int replicate = 0;
    int J = 0;
    double lambda = 0.0;
    double err_pred = 0.0;
    double err_param = 0.0;
    double seconds = 0.0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double theoretical = 0.0;
    std::string exponent_source;
};

struct SweepConfig {
    ForwardModel::Kind model = ForwardModel::Kind::Identity;
    PriorSpec::Kind prior = PriorSpec::Kind::LaplaceBesov;
    WaveletFamily family = WaveletFamily::Haar;
    TruthSpec truth;
    int alpha = 2;               // prior / penalty smoothness
    int d = 1;
    int base_J = 10;             // resolution at the largest eps
    int max_J = 14;              // memory budget
    std::vector<double> eps_grid;
    int replicates = 20;
    std::uint64_t seed = 1;
    double lambda_scale = 1.0;   // lambda = lambda_scale * delta_eps^2
    int map_max_iters = 4000;
    double map_tol = 1e-10;
    bool noisy_truth_restart = true; // synthetic-mode extra init
    std::vector<double> rho_grid;    // Gaussian-linear tuning multipliers
    double darcy_source = 2.0;
    double schro_boundary = 1.0;
    double link_k_min = 0.1;
    int threads = 0;             // 0 = hardware concurrency
    std::string out_dir;         // empty = no files written

    void validate() const;
};

struct SweepResult {
    std::vector<RateRecord> records;
    std::vector<double> eps;
    std::vector<double> median_pred; // per eps
    std::vector<double> median_param;
    RateFit fit_pred;
    RateFit fit_param;
    double bias_check_ratio = 0.0; // discretization bias vs 0.1 * delta at smallest eps
};

// Geometric grid eps_0 * ratio^i, i = 0..count-1.
std::vector<double> geometric_grid(double eps0, double ratio, int count);

SweepResult run_rate_sweep(const SweepConfig& config);

struct CompareReport {
    SweepResult laplace;
    SweepResult gaussian;
    double gap = 0.0;           // slope(Laplace) - slope(Gaussian)
    double gap_ci_low = 0.0;    // bootstrap 95% CI
    double gap_ci_high = 0.0;
    double theoretical_gap = 0.0;
};

// Laplace MAP vs best-tuned Gaussian linear estimator on the same data
// (direct model only).
CompareReport compare_priors(const SweepConfig& config);

void write_records_csv(const std::string& path, const std::vector<RateRecord>& records);
void write_plotdata_csv(const std::string& path, const SweepResult& result);

} // namespace besov
