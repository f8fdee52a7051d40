#pragma once

#include <cstdint>
#include <optional>

#include "besov/grid.hpp"
#include "besov/prior.hpp"
#include "besov/wavelet.hpp"

namespace besov {

// Diagnostics of one discrete PDE solve.
struct PdeSolution {
    GridFunction u;          // cell values of the solution
    double relative_residual = 0.0;
    int iterations = 0;      // 0 for direct (tridiagonal) solves
};

// Forward map G on coefficient trees.  All kinds share the parameter
// pipeline V = synthesis(F), param = Phi(chi * V):
//   Identity        G(F) = param                      (use Identity link)
//   LinearSmoothing G(F) = synthesis of 2^{-kappa k}-damped analysis(param)
//   Darcy           G(F) = u solving  div(f grad u) = g,  u = 0 on boundary
//   Schroedinger    G(F) = u solving  (1/2) Lap u - f u = 0,  u = g_b on boundary
// The PDE solves are second-order finite differences on the nodes of the
// cell grid; solutions are averaged back to cells.  Darcy requires
// f > K_min > 0, Schroedinger requires f >= 0 (DomainError otherwise).
class ForwardModel {
public:
    enum class Kind { Identity, LinearSmoothing, Darcy, Schroedinger };

    static ForwardModel identity(const WaveletBasis& basis);
    static ForwardModel linear_smoothing(const WaveletBasis& basis, int kappa);
    static ForwardModel darcy(const WaveletBasis& basis, const LinkFunction& link,
                              const CutoffSpec& cutoff, double source = 2.0,
                              double k_min = 0.0);
    static ForwardModel schroedinger(const WaveletBasis& basis, const LinkFunction& link,
                                     const CutoffSpec& cutoff, double boundary = 1.0);

    Kind kind() const { return kind_; }
    const WaveletBasis& basis() const { return basis_; }
    const LinkFunction& link() const { return link_; }
    int smoothing_kappa() const { return kappa_; }
    double source() const { return source_; }
    double boundary_value() const { return boundary_; }

    // Degrees of smoothing for the rescaling (0, kappa, 1, 2).
    int model_kappa() const;

    // Parameter function f = Phi(chi * synthesis(F)) on the cells.
    GridFunction parameter(const CoefficientTree& F) const;

    GridFunction evaluate(const CoefficientTree& F) const;
    PdeSolution evaluate_with_diagnostics(const CoefficientTree& F) const;

    // Gradient tree of F |-> <r, G(F)>_grid under discretize-then-optimize;
    // plain l2 pairing on trees (Parseval-matched to the grid inner product).
    CoefficientTree adjoint_gradient(const CoefficientTree& F, const GridFunction& residual) const;

    // Directional derivative DG(F) v of the discrete forward map; the exact
    // transpose pair of adjoint_gradient (dot-product test target).
    GridFunction tangent(const CoefficientTree& F, const CoefficientTree& v) const;

private:
    ForwardModel(Kind kind, const WaveletBasis& basis);

    GridFunction solve_pde(const GridFunction& f, double* residual, int* iters) const;

    Kind kind_;
    WaveletBasis basis_;
    LinkFunction link_ = LinkFunction::identity();
    CutoffSpec cutoff_ = CutoffSpec::none();
    int kappa_ = 0;        // LinearSmoothing damping exponent
    double source_ = 2.0;  // Darcy right-hand side (constant)
    double boundary_ = 1.0; // Schroedinger boundary value (constant)
    double k_min_ = 0.0;   // Darcy admissibility floor
};

// Empirical local-Lipschitz probe: max over sampled pairs of
// ||G(F1)-G(F2)||_{L2} / ||F1-F2||_{NegSobolev(kappa)} among draws whose
// Hoelder-type surrogate norm stays below `radius`.
struct LipschitzProbe {
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    int trials = 0;
};
LipschitzProbe lipschitz_probe(const ForwardModel& model, int kappa, double radius,
                               int trials, std::uint64_t seed);

} // namespace besov
