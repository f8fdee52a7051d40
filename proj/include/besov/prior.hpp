#pragma once

#include <cstdint>
#include <string>

#include "besov/grid.hpp"
#include "besov/wavelet.hpp"

namespace besov {

// Smooth cutoff chi: identically 1 on the inner box [a,b]^d, identically 0
// outside [a - margin, b + margin]^d, glued with exp(-1/t) ramps.  When
// disabled, chi is identically 1 (used by direct-model experiments and the
// closed-form oracles).
struct CutoffSpec {
    bool enabled = true;
    double a = 0.2;
    double b = 0.8;
    double margin = 0.1;

    static CutoffSpec none() { return CutoffSpec{false, 0.0, 1.0, 0.0}; }
    void validate() const;

    // 1d profile value at coordinate x.
    double profile(double x) const;
};

GridFunction cutoff_grid(const CutoffSpec& spec, int d, int J);

// Link function Phi mapping R onto (K_min, inf) with Phi(0) = 1, applied
// pointwise to reparameterize positive PDE coefficients.  Identity is the
// trivial link for direct observation models.
struct LinkFunction {
    enum class Kind { Identity, Exponential, RegularSoftplus } kind = Kind::Identity;
    double k_min = 0.0;

    static LinkFunction identity() { return {Kind::Identity, 0.0}; }
    static LinkFunction exponential(double k_min) { return {Kind::Exponential, k_min}; }
    static LinkFunction regular_softplus(double k_min) { return {Kind::RegularSoftplus, k_min}; }

    void validate() const;
    double value(double x) const;
    double deriv(double x) const;
    double inverse(double f) const; // DomainError when f is out of range
};

GridFunction apply_link(const GridFunction& F, const LinkFunction& link);
GridFunction apply_link_inverse(const GridFunction& f, const LinkFunction& link);

// Besov-Laplace prior (or its Gaussian comparison counterpart): coefficient
// scale rho * 2^{(d/2 - alpha) k} at tree level k, i.i.d. standard Laplace
// (resp. normal) factors, multiplied by the cutoff in function space.
struct PriorSpec {
    enum class Kind { LaplaceBesov, GaussianSobolev } kind = Kind::LaplaceBesov;
    int alpha = 2;
    double rho = 1.0;
    CutoffSpec cutoff;
    WaveletBasis basis;

    void validate() const;
    double coefficient_scale(int k) const; // rho * 2^{(d/2 - alpha) k}
};

// Draw from the prior: analysis of rho * chi * F_tilde.  Deterministic
// given (spec, seed).
CoefficientTree sample_prior(const PriorSpec& spec, std::uint64_t seed);

// Same draw before the cutoff multiplication (coefficients of rho * F_tilde).
CoefficientTree sample_prior_uncut(const PriorSpec& spec, std::uint64_t seed);

// Noise-level-dependent scaling: rho = eps^2 / delta^2 with
// delta = eps^{(2 kappa + 2 alpha) / (2 kappa + 2 alpha + d)}.
struct Rescaling {
    double rho;
    double delta;
};
Rescaling rescaling(double eps, int alpha, int kappa, int d);

// Log prior density of a coefficient tree, up to an additive constant.
double log_prior_density(const CoefficientTree& coeffs, const PriorSpec& spec);

} // namespace besov
