#pragma once

#include <vector>

#include "besov/wavelet.hpp"

namespace besov {

// Library of ground-truth parameters F0, all supported inside the inner
// box [a,b] (so the prior cutoff acts as the identity on them).
//
//   SmoothBump       one C-infinity hump on [a,b]
//   PiecewiseBlocks  spatially inhomogeneous step function with jumps at
//                    non-dyadic points (d = 1 only)
//   SpikeSmooth      asymmetric composite of a broad positive hump, a broad
//                    negative hump and a narrow spike-like hump (d = 1 only)
struct TruthSpec {
    enum class Kind { SmoothBump, PiecewiseBlocks, SpikeSmooth } kind = Kind::SmoothBump;
    double amplitude = 1.0;
    double a = 0.2;
    double b = 0.8;
    int declared_alpha = 2; // claimed B^alpha_11 membership

    void validate() const;
};

struct TruthCertificate {
    // partial weighted-l1 sums at the declared alpha and at alpha + 1;
    // the declared-alpha increments should flatten across levels while the
    // (alpha+1)-increments grow.
    std::vector<double> partial_declared;
    std::vector<double> partial_above;
};

// Pointwise evaluation of the truth profile (1d coordinate; tensorized in
// d = 2 for the SmoothBump kind).
double truth_profile(const TruthSpec& spec, double x);

CoefficientTree make_truth(const TruthSpec& spec, const WaveletBasis& basis,
                           TruthCertificate* certificate = nullptr);

} // namespace besov
