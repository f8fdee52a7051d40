#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "besov/errors.hpp"
#include "besov/prior.hpp"
#include "besov/rng.hpp"

using namespace besov;

namespace {

PriorSpec laplace_spec(int alpha, double rho, int J, bool with_cutoff = true) {
    PriorSpec spec;
    spec.kind = PriorSpec::Kind::LaplaceBesov;
    spec.alpha = alpha;
    spec.rho = rho;
    spec.cutoff = with_cutoff ? CutoffSpec{} : CutoffSpec::none();
    spec.basis = WaveletBasis{WaveletFamily::Haar, 1, J};
    return spec;
}

} // namespace

TEST_CASE("rho = 0 gives the zero tree") {
    auto spec = laplace_spec(2, 0.0, 5);
    auto draw = sample_prior(spec, 99);
    CHECK(draw.l2_norm() == 0.0);
}

TEST_CASE("draws are deterministic in the seed") {
    auto spec = laplace_spec(2, 0.7, 6);
    auto a = sample_prior(spec, 4);
    auto b = sample_prior(spec, 4);
    auto c = sample_prior(spec, 5);
    CHECK((a - b).l2_norm() == 0.0);
    CHECK((a - c).l2_norm() > 0.0);
}

TEST_CASE("per-level mean absolute coefficient matches rho 2^{(d/2-alpha)k}") {
    // E|xi| = 1 for the standard Laplace, Var |xi| = 1.
    const double rho = 0.8;
    auto spec = laplace_spec(2, rho, 6, false);
    const int n_draws = 2000;
    std::vector<double> sum(spec.basis.J + 1, 0.0);
    std::vector<long> count(spec.basis.J + 1, 0);
    for (int i = 0; i < n_draws; ++i) {
        auto draw = sample_prior_uncut(spec, 1000 + i);
        for (int k = 0; k <= spec.basis.J; ++k) {
            for (double v : draw.level(k)) sum[k] += std::fabs(v);
            count[k] += static_cast<long>(draw.level(k).size());
        }
    }
    for (int k = 0; k <= spec.basis.J; ++k) {
        const double scale = spec.coefficient_scale(k);
        const double mean = sum[k] / count[k];
        const double se = scale / std::sqrt(static_cast<double>(count[k]));
        CHECK(std::fabs(mean - scale) <= 3.0 * se);
    }
}

TEST_CASE("besov-norm Monte Carlo means: bounded below alpha - d, growing above") {
    // alpha = 2, d = 1: b = 0.5 < 1 stays bounded in J, b = 1.5 > 1 diverges.
    const int n_draws = 150;
    auto mc_mean = [&](int J, double b) {
        auto spec = laplace_spec(2, 1.0, J, false);
        double s = 0.0;
        for (int i = 0; i < n_draws; ++i)
            s += seq_norm(sample_prior_uncut(spec, 50 + i), SeqNorm::besov(b, 1.0, 1.0));
        return s / n_draws;
    };
    const double low_small = mc_mean(6, 0.5), low_big = mc_mean(10, 0.5);
    const double high_small = mc_mean(6, 1.5), high_big = mc_mean(10, 1.5);
    CHECK(low_big < 1.3 * low_small);
    CHECK(high_big > 2.0 * high_small);
}

TEST_CASE("exponential sup-norm tail of the prior law") {
    auto spec = laplace_spec(2, 1.0, 6, false);
    const int n = 2000;
    std::vector<double> sup(n);
    for (int i = 0; i < n; ++i)
        sup[static_cast<std::size_t>(i)] =
            dwt_inverse(sample_prior_uncut(spec, 7000 + i), spec.basis).max_abs();
    std::sort(sup.begin(), sup.end());
    // log survival over the upper quartile must trend down linearly
    std::vector<double> xs, ys;
    for (int i = 3 * n / 4; i < n - 20; i += 10) {
        xs.push_back(sup[static_cast<std::size_t>(i)]);
        ys.push_back(std::log(static_cast<double>(n - i) / n));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    CHECK(sxy / sxx < -0.1);
}

TEST_CASE("cutoff bounds, inner plateau and support") {
    CutoffSpec cut;
    auto chi = cutoff_grid(cut, 1, 8);
    for (std::size_t i = 0; i < chi.size(); ++i) {
        CHECK(chi[i] >= 0.0);
        CHECK(chi[i] <= 1.0);
        const double x = chi.center(i);
        if (x >= cut.a && x <= cut.b) CHECK(chi[i] == 1.0);
        if (x <= cut.a - cut.margin || x >= cut.b + cut.margin) CHECK(chi[i] == 0.0);
    }
    // sampled functions vanish outside the support box
    auto spec = laplace_spec(2, 1.0, 8);
    for (int i = 0; i < 5; ++i) {
        auto F = dwt_inverse(sample_prior(spec, 300 + i), spec.basis);
        for (std::size_t j = 0; j < F.size(); ++j) {
            const double x = F.center(j);
            if (x <= cut.a - cut.margin || x >= cut.b + cut.margin) CHECK(F[j] == 0.0);
        }
    }
    CHECK_THROWS_AS(cutoff_grid(CutoffSpec{true, 0.05, 0.8, 0.1}, 1, 4), InvalidInput);
}

TEST_CASE("rescaling formulas") {
    const auto unit = rescaling(1.0, 3, 0, 1);
    CHECK(unit.rho == doctest::Approx(1.0));
    CHECK(unit.delta == doctest::Approx(1.0));

    const auto r = rescaling(0.1, 2, 1, 1); // exponents 6/7 and 2/7
    CHECK(r.delta == doctest::Approx(0.138949549437313764).epsilon(1e-14));
    CHECK(r.rho == doctest::Approx(0.517947467923121113).epsilon(1e-14));

    // Darcy setting of the rate theorems: alpha = 5, d = 2, kappa = 1
    const auto darcy = rescaling(0.25, 5, 1, 2);
    CHECK(darcy.delta == doctest::Approx(std::pow(0.25, 6.0 / 7.0)).epsilon(1e-14));

    CHECK_THROWS_AS(rescaling(-1.0, 2, 0, 1), InvalidInput);
    CHECK_THROWS_AS(rescaling(0.1, 1, 0, 1), InvalidInput);
}

TEST_CASE("log prior density") {
    auto spec = laplace_spec(2, 0.5, 4, false);
    CoefficientTree zero(spec.basis);
    CHECK(log_prior_density(zero, spec) == 0.0);

    CoefficientTree one(spec.basis);
    one.level(3)[1] = spec.coefficient_scale(3);
    CHECK(log_prior_density(one, spec) == doctest::Approx(-1.0).epsilon(1e-13));

    auto doubled = one;
    doubled *= 2.0;
    CHECK(log_prior_density(doubled, spec) ==
          doctest::Approx(2.0 * log_prior_density(one, spec)).epsilon(1e-13));

    auto gspec = spec;
    gspec.kind = PriorSpec::Kind::GaussianSobolev;
    CHECK(log_prior_density(one, gspec) == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("link functions") {
    GridFunction zero(1, 3);
    for (auto link : {LinkFunction::exponential(0.1), LinkFunction::regular_softplus(0.25)}) {
        auto f = apply_link(zero, link);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(f[i] == doctest::Approx(1.0).epsilon(1e-13)); // Phi(0) = 1
    }

    GridFunction F(1, 5);
    Rng rng(5u);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = 2.0 * rng.normal();
    for (auto link : {LinkFunction::identity(), LinkFunction::exponential(0.1),
                      LinkFunction::regular_softplus(0.0)}) {
        auto f = apply_link(F, link);
        auto back = apply_link_inverse(f, link);
        for (std::size_t i = 0; i < F.size(); ++i)
            CHECK(back[i] == doctest::Approx(F[i]).epsilon(1e-11));
        // derivative consistency against central differences
        for (double x : {-1.3, 0.0, 0.8}) {
            const double fd = (link.value(x + 1e-6) - link.value(x - 1e-6)) / 2e-6;
            CHECK(link.deriv(x) == doctest::Approx(fd).epsilon(1e-7));
        }
    }

    // Phi(1) for the exponential link with K_min = 0.1
    CHECK(LinkFunction::exponential(0.1).value(1.0) ==
          doctest::Approx(2.54645364561314071).epsilon(1e-14));

    GridFunction bad(1, 3);
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = 0.05;
    CHECK_THROWS_AS(apply_link_inverse(bad, LinkFunction::exponential(0.1)), DomainError);
}

TEST_CASE("prior validation") {
    auto spec = laplace_spec(1, 1.0, 4); // alpha must exceed d
    CHECK_THROWS_AS(spec.validate(), InvalidInput);
    spec = laplace_spec(2, -1.0, 4);
    CHECK_THROWS_AS(spec.validate(), InvalidInput);
}
