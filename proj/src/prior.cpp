#include "besov/prior.hpp"

#include <cmath>
#include <limits>

#include "besov/errors.hpp"
#include "besov/rng.hpp"

namespace besov {

namespace {

// exp(-1/t) glue; smoothstep S rises from 0 at t<=0 to 1 at t>=1.
double glue(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double smoothstep(double t) {
    const double p = glue(t);
    const double q = glue(1.0 - t);
    return p / (p + q);
}

} // namespace

void CutoffSpec::validate() const {
    if (!enabled) return;
    if (!(margin > 0.0)) throw InvalidInput("CutoffSpec: margin must be positive");
    if (!(a < b)) throw InvalidInput("CutoffSpec: need a < b");
    if (!(a - margin > 0.0) || !(b + margin < 1.0))
        throw InvalidInput("CutoffSpec: support box must be strictly inside (0,1)^d");
}

double CutoffSpec::profile(double x) const {
    if (!enabled) return 1.0;
    if (x >= a && x <= b) return 1.0;
    if (x < a) return smoothstep((x - (a - margin)) / margin);
    return smoothstep(((b + margin) - x) / margin);
}

GridFunction cutoff_grid(const CutoffSpec& spec, int d, int J) {
    spec.validate();
    GridFunction chi(d, J);
    const std::size_t n = chi.cells_per_axis();
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) axis[i] = spec.profile(chi.center(i));
    if (d == 1) {
        for (std::size_t i = 0; i < n; ++i) chi[i] = axis[i];
    } else {
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) chi.at(x, y) = axis[x] * axis[y];
    }
    return chi;
}

void LinkFunction::validate() const {
    if (kind == Kind::Identity) return;
    if (!(k_min >= 0.0) || !(k_min < 1.0))
        throw InvalidInput("LinkFunction: K_min must lie in [0,1)");
}

double LinkFunction::value(double x) const {
    switch (kind) {
        case Kind::Identity: return x;
        case Kind::Exponential: return (1.0 - k_min) * std::exp(x) + k_min;
        case Kind::RegularSoftplus: {
            // Phi(x) = K_min + (1 - K_min) * log(1 + e^x) / log 2; Phi(0) = 1.
            const double sp = x > 30.0 ? x : std::log1p(std::exp(x));
            return k_min + (1.0 - k_min) * sp / 0.69314718055994530942;
        }
    }
    return x;
}

double LinkFunction::deriv(double x) const {
    switch (kind) {
        case Kind::Identity: return 1.0;
        case Kind::Exponential: return (1.0 - k_min) * std::exp(x);
        case Kind::RegularSoftplus: {
            const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                        : std::exp(x) / (1.0 + std::exp(x));
            return (1.0 - k_min) * sig / 0.69314718055994530942;
        }
    }
    return 1.0;
}

double LinkFunction::inverse(double f) const {
    switch (kind) {
        case Kind::Identity: return f;
        case Kind::Exponential: {
            if (!(f > k_min)) throw DomainError("link inverse: value must exceed K_min");
            return std::log((f - k_min) / (1.0 - k_min));
        }
        case Kind::RegularSoftplus: {
            if (!(f > k_min)) throw DomainError("link inverse: value must exceed K_min");
            const double z = (f - k_min) / (1.0 - k_min) * 0.69314718055994530942;
            return std::log(std::expm1(z));
        }
    }
    return f;
}

GridFunction apply_link(const GridFunction& F, const LinkFunction& link) {
    link.validate();
    GridFunction f = F;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = link.value(F[i]);
    return f;
}

GridFunction apply_link_inverse(const GridFunction& f, const LinkFunction& link) {
    link.validate();
    GridFunction F = f;
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = link.inverse(f[i]);
    return F;
}

void PriorSpec::validate() const {
    basis.validate();
    cutoff.validate();
    if (alpha <= basis.d) throw InvalidInput("PriorSpec: need alpha > d");
    if (!(rho >= 0.0)) throw InvalidInput("PriorSpec: rho must be nonnegative");
}

double PriorSpec::coefficient_scale(int k) const {
    return rho * std::pow(2.0, (basis.d / 2.0 - alpha) * k);
}

CoefficientTree sample_prior_uncut(const PriorSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, 0x70726972ULL));
    CoefficientTree tree(spec.basis);
    for (int k = 0; k <= spec.basis.J; ++k) {
        const double scale = spec.coefficient_scale(k);
        for (double& v : tree.level(k)) {
            const double xi = spec.kind == PriorSpec::Kind::LaplaceBesov ? rng.laplace()
                                                                         : rng.normal();
            v = scale * xi;
        }
    }
    return tree;
}

CoefficientTree sample_prior(const PriorSpec& spec, std::uint64_t seed) {
    CoefficientTree raw = sample_prior_uncut(spec, seed);
    if (!spec.cutoff.enabled) return raw;
    auto F = dwt_inverse(raw, spec.basis);
    auto chi = cutoff_grid(spec.cutoff, spec.basis.d, spec.basis.J);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= chi[i];
    return dwt_forward(F, spec.basis);
}

Rescaling rescaling(double eps, int alpha, int kappa, int d) {
    if (!(eps > 0.0)) throw InvalidInput("rescaling: eps must be positive");
    if (alpha <= d) throw InvalidInput("rescaling: need alpha > d");
    if (kappa < 0) throw InvalidInput("rescaling: need kappa >= 0");
    const double denom = 2.0 * kappa + 2.0 * alpha + d;
    const double delta = std::pow(eps, (2.0 * kappa + 2.0 * alpha) / denom);
    const double rho = std::pow(eps, 2.0 * d / denom);
    return {rho, delta};
}

double log_prior_density(const CoefficientTree& coeffs, const PriorSpec& spec) {
    spec.validate();
    if (coeffs.dim() != spec.basis.d || coeffs.max_level() != spec.basis.J)
        throw InvalidInput("log_prior_density: tree does not match prior basis");
    double total = 0.0;
    for (int k = 0; k <= spec.basis.J; ++k) {
        const double scale = spec.coefficient_scale(k);
        for (double v : coeffs.level(k)) {
            if (v == 0.0) continue;
            if (scale == 0.0) return -std::numeric_limits<double>::infinity();
            if (spec.kind == PriorSpec::Kind::LaplaceBesov)
                total -= std::fabs(v) / scale;
            else
                total -= 0.5 * (v / scale) * (v / scale);
        }
    }
    return total;
}

} // namespace besov
