#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "besov/grid.hpp"

namespace besov {

// Wavelet family by number of vanishing moments; all filters are the
// standard orthonormal Daubechies filters (Haar = Daubechies-1).
enum class WaveletFamily { Haar, Daubechies2, Daubechies3, Daubechies4 };

const char* family_name(WaveletFamily f);
WaveletFamily family_from_name(const std::string& name);

// Scaling (low-pass) filter of a family.
std::span<const double> scaling_filter(WaveletFamily f);

// Periodized orthonormal wavelet basis of L^2([0,1]^d) truncated at
// resolution level J: the grid space with 2^J cells per axis is an exact
// orthonormal coordinate change away from the coefficient tree.
//
// Tree layout: level 0 holds the single coarse scaling coefficient; level
// k (1 <= k <= J) holds the detail coefficients of the step from 2^(k-1)
// to 2^k cells per axis, i.e. 2^(d(k-1)) coefficients per orientation
// with 2^d - 1 orientations (one in d=1; x/y/diagonal blocks in d=2).
struct WaveletBasis {
    WaveletFamily family = WaveletFamily::Haar;
    int d = 1;
    int J = 1;
    // boundary handling is always periodization; kept explicit so the
    // basis spec is self-describing in configs.
    enum class Boundary { Periodized } boundary = Boundary::Periodized;

    void validate() const;
    std::size_t level_size(int k) const;
    std::size_t total_size() const { return GridFunction::total_cells(d, J); }
};

// Multi-level wavelet coefficients {F_kl}.  The plain l2 norm of the tree
// equals the grid L^2 norm of the reconstruction (exact Parseval).
class CoefficientTree {
public:
    CoefficientTree() = default;
    explicit CoefficientTree(const WaveletBasis& basis);

    int dim() const { return d_; }
    int max_level() const { return J_; }
    int n_levels() const { return J_ + 1; }

    std::vector<double>& level(int k) { return levels_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& level(int k) const { return levels_[static_cast<std::size_t>(k)]; }

    std::size_t total_size() const;
    bool same_shape(const CoefficientTree& other) const;
    void require_same_shape(const CoefficientTree& other) const;

    double l2_norm() const;
    double inner(const CoefficientTree& other) const;
    double max_abs() const;

    void fill(double value);
    void scale_level(int k, double factor);

    CoefficientTree& operator+=(const CoefficientTree& other);
    CoefficientTree& operator-=(const CoefficientTree& other);
    CoefficientTree& operator*=(double a);

    // Flattened copy (level 0 first), and its inverse.
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);

private:
    int d_ = 1;
    int J_ = 1;
    std::vector<std::vector<double>> levels_;
};

CoefficientTree operator-(CoefficientTree a, const CoefficientTree& b);
CoefficientTree operator+(CoefficientTree a, const CoefficientTree& b);

// Orthonormal analysis of a grid function: F_kl = <F, psi_kl>.
CoefficientTree dwt_forward(const GridFunction& f, const WaveletBasis& basis);

// Exact inverse of dwt_forward (synthesis).
GridFunction dwt_inverse(const CoefficientTree& coeffs, const WaveletBasis& basis);

// Weighted sequence norms on coefficient trees.  Besov uses the wavelet
// characterization with level weights 2^{qk(s + d/2 - d/p)}; ZTilde is the
// weighted-l1 penalty norm with weights 2^{(alpha - d/2)k}; QTilde the
// weighted-l2 norm with weights 2^{(2 alpha - d)k}; NegSobolev(kappa) the
// weighted-l2 norm with weights 2^{-2 kappa k} standing in for the dual
// Sobolev norm.
struct SeqNorm {
    enum class Kind { Besov, ZTilde, QTilde, NegSobolev } kind = Kind::Besov;
    double s = 0.0;   // Besov smoothness
    double p = 2.0;   // Besov integrability, may be +inf
    double q = 2.0;   // Besov summability, may be +inf
    double alpha = 2.0;
    double kappa = 0.0;

    static SeqNorm besov(double s, double p, double q);
    static SeqNorm z_tilde(double alpha);
    static SeqNorm q_tilde(double alpha);
    static SeqNorm neg_sobolev(double kappa);
};

double seq_norm(const CoefficientTree& coeffs, const SeqNorm& norm);

// Per-level partial sums of the ZTilde-style weighted-l1 norm at exponent
// (alpha - d/2); partial[k] = contribution of levels 0..k.  Used for the
// summability certificates of truths and prior draws.
std::vector<double> weighted_l1_partial_sums(const CoefficientTree& coeffs, double alpha);

} // namespace besov
