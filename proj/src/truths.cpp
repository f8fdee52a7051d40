#include "besov/truths.hpp"

#include <cmath>

#include "besov/errors.hpp"

namespace besov {

namespace {

// C-infinity hump supported on (lo, hi), peak value `amp`.
double hump(double x, double lo, double hi, double amp) {
    if (x <= lo || x >= hi) return 0.0;
    const double t = (x - lo) / (hi - lo);
    return amp * std::exp(4.0) * std::exp(-1.0 / (t * (1.0 - t)));
}

// Blocks design: jump locations avoid dyadic points; heights telescope to
// zero so the function vanishes outside the inner box.
constexpr double kBlockPos[] = {0.23, 0.31, 0.39, 0.47, 0.53, 0.61, 0.69, 0.77};
constexpr double kBlockHgt[] = {1.2, -1.6, 2.0, -1.1, 1.4, -1.9, 1.3, -1.3};

} // namespace

void TruthSpec::validate() const {
    if (!(a >= 0.0) || !(b <= 1.0) || !(a < b)) throw InvalidInput("TruthSpec: need 0 <= a < b <= 1");
    if (declared_alpha < 1) throw InvalidInput("TruthSpec: declared_alpha must be >= 1");
}

double truth_profile(const TruthSpec& spec, double x) {
    spec.validate();
    const double span = spec.b - spec.a;
    auto rel = [&](double r) { return spec.a + r * span; };
    switch (spec.kind) {
        case TruthSpec::Kind::SmoothBump:
            return hump(x, spec.a, spec.b, spec.amplitude);
        case TruthSpec::Kind::PiecewiseBlocks: {
            double y = 0.0;
            for (int i = 0; i < 8; ++i) {
                // positions are expressed on [0.2, 0.8] and mapped affinely
                const double p = rel((kBlockPos[i] - 0.2) / 0.6);
                if (x >= p) y += spec.amplitude * kBlockHgt[i];
            }
            return y;
        }
        case TruthSpec::Kind::SpikeSmooth:
            return spec.amplitude * (hump(x, rel(1.0 / 30.0), rel(16.0 / 30.0), 0.9) +
                                     hump(x, rel(0.5), rel(29.0 / 30.0), -0.7) +
                                     hump(x, rel(0.66), rel(0.76), 0.8));
    }
    return 0.0;
}

CoefficientTree make_truth(const TruthSpec& spec, const WaveletBasis& basis,
                           TruthCertificate* certificate) {
    spec.validate();
    basis.validate();
    if (basis.d == 2 && spec.kind != TruthSpec::Kind::SmoothBump)
        throw InvalidInput("make_truth: only SmoothBump is available in d = 2");

    GridFunction F(basis.d, basis.J);
    const std::size_t n = F.cells_per_axis();
    if (basis.d == 1) {
        for (std::size_t i = 0; i < n; ++i) F[i] = truth_profile(spec, F.center(i));
    } else {
        TruthSpec unit = spec;
        unit.amplitude = 1.0;
        std::vector<double> axis(n);
        for (std::size_t i = 0; i < n; ++i) axis[i] = truth_profile(unit, F.center(i));
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x)
                F.at(x, y) = spec.amplitude * axis[x] * axis[y];
    }

    // support check on the grid
    for (std::size_t i = 0; i < n; ++i) {
        const double x = F.center(i);
        if (x > spec.a && x < spec.b) continue;
        if (basis.d == 1) {
            if (F[i] != 0.0) throw InvalidInput("make_truth: support leaks outside [a,b]");
        } else {
            for (std::size_t j = 0; j < n; ++j)
                if (F.at(i, j) != 0.0 || F.at(j, i) != 0.0)
                    throw InvalidInput("make_truth: support leaks outside [a,b]^2");
        }
    }

    auto tree = dwt_forward(F, basis);
    if (certificate) {
        certificate->partial_declared =
            weighted_l1_partial_sums(tree, static_cast<double>(spec.declared_alpha));
        certificate->partial_above =
            weighted_l1_partial_sums(tree, static_cast<double>(spec.declared_alpha + 1));
    }
    return tree;
}

} // namespace besov
