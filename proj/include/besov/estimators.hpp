#pragma once

#include <optional>
#include <span>

#include "besov/observation.hpp"

namespace besov {

// Configuration of the penalized-least-squares (MAP) solver, which
// maximizes  2<Y, G(F)> - ||G(F)||^2 - lambda ||F||_{Z~_alpha}
// by proximal gradient steps with level-weighted soft thresholding.
struct PlsConfig {
    double lambda = 1.0;     // penalty weight
    int alpha = 2;           // penalty smoothness (Z~_alpha weights)
    int max_iters = 5000;
    enum class StepRule { Fixed, Backtracking } step_rule = StepRule::Backtracking;
    double fixed_step = 0.25;               // only for StepRule::Fixed
    int restarts = 3;                        // inits consumed by solve_map_best
    double tol = 1e-9;                       // relative objective change
    std::optional<double> z_ball_radius;     // restricted variant: ||F||_Z <= B
    bool check_gradients = false;            // debug FD spot checks

    void validate() const;
};

struct EstimateReport {
    CoefficientTree F_hat;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_check_error = 0.0; // worst FD relative error seen (debug mode)
};

// The PLS objective J_{lambda,eps}(F) evaluated exactly.
double pls_objective(const Observation& obs, const ForwardModel& model,
                     const CoefficientTree& F, const PlsConfig& cfg);

// sign(x) * max(|x| - t, 0)
double soft_threshold(double x, double t);

// Proximal-gradient ascent from a single initial tree.  Non-convergence
// within max_iters returns converged = false with the best iterate.
EstimateReport solve_map(const Observation& obs, const ForwardModel& model,
                         const PlsConfig& cfg, const CoefficientTree& init);

// Best objective across several inits (restart order has no effect beyond
// tie-breaking within tol).
EstimateReport solve_map_best(const Observation& obs, const ForwardModel& model,
                              const PlsConfig& cfg, std::span<const CoefficientTree> inits);

// tau_lambda^2(F1, F2) = ||G(F1) - G(F2)||^2 + lambda ||F1||_{Z~_alpha}
double tau_lambda_sq(const CoefficientTree& F1, const CoefficientTree& F2,
                     const ForwardModel& model, double lambda, int alpha);

// Conjugate posterior mean for the Gaussian comparison prior in the direct
// model: coefficientwise shrinkage y * v / (v + eps^2) with prior variance
// v = (rho 2^{(d/2-alpha)k})^2.  UnsupportedModel for non-identity models.
CoefficientTree gaussian_posterior_mean(const Observation& obs, const ForwardModel& model,
                                        const PriorSpec& prior);

} // namespace besov
