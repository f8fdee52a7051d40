#pragma once

#include <cstdint>
#include <iosfwd>

#include "besov/forward.hpp"
#include "besov/wavelet.hpp"

namespace besov {

// White-noise observation in coefficient form: y = analysis(G(F_true)) + eps * xi
// with xi_kl i.i.d. standard normal.  eps = 0 is allowed (noise-free data
// for oracles and determinism tests).
struct Observation {
    CoefficientTree y;
    double eps = 1.0;
    std::uint64_t seed = 0;
};

Observation simulate(const ForwardModel& model, const CoefficientTree& F_true, double eps,
                     std::uint64_t seed);

// Log-likelihood (1/eps^2) <y, a> - (1/(2 eps^2)) ||a||^2 with
// a = analysis(G(F)); inner products in coefficient space.
double log_likelihood(const Observation& obs, const ForwardModel& model,
                      const CoefficientTree& F);

// Flat CSV coefficient dump (level,index,value) and its inverse.
void write_observation_csv(std::ostream& out, const Observation& obs);
Observation read_observation_csv(std::istream& in, const WaveletBasis& basis);

} // namespace besov
