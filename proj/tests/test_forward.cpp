#include "doctest.h"

#include <cmath>
#include <vector>

#include "besov/errors.hpp"
#include "besov/forward.hpp"
#include "besov/rng.hpp"

using namespace besov;

namespace {

CoefficientTree random_tree(const WaveletBasis& basis, std::uint64_t seed, double scale) {
    Rng rng(seed);
    CoefficientTree t(basis);
    for (int k = 0; k <= basis.J; ++k)
        for (double& v : t.level(k)) v = scale * rng.normal();
    return t;
}

// max |u_cell - u_exact(center)| for the Darcy problem f = 1, g = 2
double darcy_quadratic_error(int J) {
    WaveletBasis basis{WaveletFamily::Haar, 1, J};
    auto model = ForwardModel::darcy(basis, LinkFunction::identity(), CutoffSpec::none(), 2.0, 0.5);
    CoefficientTree one(basis);
    one.level(0)[0] = 1.0; // constant function 1
    auto u = model.evaluate(one);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.center(i);
        err = std::max(err, std::fabs(u[i] - (x * x - x)));
    }
    return err;
}

double schro_cosh_error(int J, double c) {
    WaveletBasis basis{WaveletFamily::Haar, 1, J};
    auto model = ForwardModel::schroedinger(basis, LinkFunction::identity(), CutoffSpec::none(), 1.0);
    CoefficientTree tree(basis);
    tree.level(0)[0] = c;
    auto u = model.evaluate(tree);
    const double s = std::sqrt(2.0 * c);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.center(i);
        err = std::max(err, std::fabs(u[i] - std::cosh(s * (x - 0.5)) / std::cosh(0.5 * s)));
    }
    return err;
}

} // namespace

TEST_CASE("darcy 1d with unit coefficient matches x^2 - x") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 7};
    auto model = ForwardModel::darcy(basis, LinkFunction::identity(), CutoffSpec::none(), 2.0, 0.5);
    CoefficientTree one(basis);
    one.level(0)[0] = 1.0;
    auto sol = model.evaluate_with_diagnostics(one);
    CHECK(sol.relative_residual <= 1e-10);
    const std::size_t mid = sol.u.cells_per_axis() / 2; // center of cell = 0.5 + h/2
    const double x = sol.u.center(mid);
    CHECK(sol.u[mid] == doctest::Approx(x * x - x).epsilon(2e-4));
    CHECK(darcy_quadratic_error(7) < 1e-4);
}

TEST_CASE("grid convergence at second order") {
    // log2 error ratios across three refinements stay near 2
    for (int J = 4; J <= 6; ++J) {
        const double r_darcy = std::log2(darcy_quadratic_error(J) / darcy_quadratic_error(J + 1));
        CHECK(r_darcy == doctest::Approx(2.0).epsilon(0.075));
        const double r_schro = std::log2(schro_cosh_error(J, 4.0) / schro_cosh_error(J + 1, 4.0));
        CHECK(r_schro == doctest::Approx(2.0).epsilon(0.075));
    }
}

TEST_CASE("schroedinger with zero potential is the constant boundary value") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 6};
    auto model = ForwardModel::schroedinger(basis, LinkFunction::identity(), CutoffSpec::none(), 1.0);
    CoefficientTree zero(basis);
    auto u = model.evaluate(zero);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("schroedinger cosh reference value") {
    const double err = schro_cosh_error(8, 4.0);
    CHECK(err < 2e-5);
    // u(1/2) = 1/cosh(sqrt(8)/2)
    WaveletBasis basis{WaveletFamily::Haar, 1, 8};
    auto model = ForwardModel::schroedinger(basis, LinkFunction::identity(), CutoffSpec::none(), 1.0);
    CoefficientTree tree(basis);
    tree.level(0)[0] = 4.0;
    auto u = model.evaluate(tree);
    const std::size_t mid = u.cells_per_axis() / 2;
    const double s = std::sqrt(8.0);
    CHECK(u[mid] ==
          doctest::Approx(std::cosh(s * (u.center(mid) - 0.5)) / std::cosh(0.5 * s)).epsilon(1e-5));
}

TEST_CASE("maximum principles on random positive coefficients") {
    for (int d : {1, 2}) {
        WaveletBasis basis{WaveletFamily::Haar, d, d == 1 ? 6 : 4};
        auto darcy = ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0,
                                         0.1);
        auto schro = ForwardModel::schroedinger(basis, LinkFunction::exponential(0.0), CutoffSpec{},
                                                1.0);
        for (int t = 0; t < 25; ++t) {
            auto F = random_tree(basis, 100 + t, 0.5);
            auto u = darcy.evaluate(F);
            for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] <= 1e-12);
            auto v = schro.evaluate(F);
            for (std::size_t i = 0; i < v.size(); ++i) {
                CHECK(v[i] > 0.0);
                CHECK(v[i] <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("identity adjoint is the analysis of the residual") {
    WaveletBasis basis{WaveletFamily::Daubechies2, 1, 6};
    auto model = ForwardModel::identity(basis);
    Rng rng(8u);
    GridFunction r(1, 6);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rng.normal();
    auto g = model.adjoint_gradient(CoefficientTree(basis), r);
    auto a = dwt_forward(r, basis);
    CHECK((g - a).l2_norm() < 1e-12);
}

TEST_CASE("adjoint gradient against central finite differences") {
    for (int d : {1, 2}) {
        WaveletBasis basis{WaveletFamily::Daubechies2, d, d == 1 ? 5 : 3};
        std::vector<ForwardModel> models;
        models.push_back(ForwardModel::linear_smoothing(basis, 1));
        models.push_back(
            ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0, 0.1));
        models.push_back(
            ForwardModel::schroedinger(basis, LinkFunction::exponential(0.0), CutoffSpec{}, 1.0));
        int salt = 0;
        for (const auto& model : models) {
            for (int t = 0; t < 3; ++t) {
                auto F = random_tree(basis, 500 + t + 31 * salt, 0.4);
                auto v = random_tree(basis, 900 + t + 31 * salt, 1.0);
                v *= 1.0 / v.l2_norm();
                GridFunction r(d, basis.J);
                Rng rng(77u + t);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = rng.normal();
                auto g = model.adjoint_gradient(F, r);
                const double analytic = g.inner(v);
                const double h = 1e-5;
                auto Fp = F, Fm = F;
                auto dv = v;
                dv *= h;
                Fp += dv;
                Fm -= dv;
                const double phip = r.inner(model.evaluate(Fp));
                const double phim = r.inner(model.evaluate(Fm));
                const double numeric = (phip - phim) / (2.0 * h);
                CHECK(std::fabs(analytic - numeric) <=
                      1e-5 * std::max(1.0, std::fabs(numeric)));
            }
            ++salt;
        }
    }
}

TEST_CASE("adjoint dot-product test against the exact tangent") {
    for (int d : {1, 2}) {
        WaveletBasis basis{WaveletFamily::Daubechies2, d, d == 1 ? 5 : 3};
        std::vector<ForwardModel> models;
        models.push_back(ForwardModel::identity(basis));
        models.push_back(ForwardModel::linear_smoothing(basis, 2));
        models.push_back(
            ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0, 0.1));
        models.push_back(
            ForwardModel::schroedinger(basis, LinkFunction::exponential(0.0), CutoffSpec{}, 1.0));
        for (const auto& model : models) {
            for (int t = 0; t < 3; ++t) {
                auto F = random_tree(basis, 70 + t, 0.4);
                auto v = random_tree(basis, 80 + t, 1.0);
                GridFunction w(d, basis.J);
                Rng rng(90u + t);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal();
                const double lhs = w.inner(model.tangent(F, v));       // <DG v, w>
                const double rhs = model.adjoint_gradient(F, w).inner(v); // <v, DG^T w>
                CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
            }
        }
    }
}

TEST_CASE("tangent matches finite differences of the forward map") {
    WaveletBasis basis{WaveletFamily::Daubechies2, 1, 5};
    auto model = ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0, 0.1);
    auto F = random_tree(basis, 3, 0.4);
    auto v = random_tree(basis, 4, 1.0);
    v *= 1.0 / v.l2_norm();
    const double h = 1e-5;
    auto Fp = F, Fm = F;
    auto dv = v;
    dv *= h;
    Fp += dv;
    Fm -= dv;
    auto fd = model.evaluate(Fp) - model.evaluate(Fm);
    fd *= 1.0 / (2.0 * h);
    auto tan = model.tangent(F, v);
    CHECK((fd - tan).l2_norm() <= 1e-5 * std::max(1.0, tan.l2_norm()));
}

TEST_CASE("positivity violations raise DomainError") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 5};
    auto darcy = ForwardModel::darcy(basis, LinkFunction::identity(), CutoffSpec::none(), 2.0, 0.0);
    CoefficientTree neg(basis);
    neg.level(0)[0] = -1.0;
    CHECK_THROWS_AS(darcy.evaluate(neg), DomainError);
    auto schro =
        ForwardModel::schroedinger(basis, LinkFunction::identity(), CutoffSpec::none(), 1.0);
    CHECK_THROWS_AS(schro.evaluate(neg), DomainError);
}

TEST_CASE("lipschitz probe reference ratios") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 6};
    auto ident = ForwardModel::identity(basis);
    auto probe = lipschitz_probe(ident, 0, 1.0, 30, 11);
    CHECK(probe.max_ratio == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(probe.mean_ratio == doctest::Approx(1.0).epsilon(1e-10));

    auto smooth = ForwardModel::linear_smoothing(basis, 2);
    probe = lipschitz_probe(smooth, 2, 1.0, 30, 12);
    CHECK(probe.max_ratio == doctest::Approx(1.0).epsilon(1e-10));

    auto darcy = ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0, 0.1);
    auto p1 = lipschitz_probe(darcy, 1, 1.0, 100, 13);
    auto p2 = lipschitz_probe(darcy, 1, 1.0, 200, 13);
    CHECK(p1.max_ratio > 0.0);
    CHECK(std::isfinite(p2.max_ratio));
    CHECK(p2.max_ratio <= 2.0 * p1.max_ratio); // no growth trend under doubling
}

TEST_CASE("evaluate is deterministic") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 6};
    auto darcy = ForwardModel::darcy(basis, LinkFunction::exponential(0.1), CutoffSpec{}, 2.0, 0.1);
    auto F = random_tree(basis, 42, 0.5);
    auto a = darcy.evaluate(F);
    auto b = darcy.evaluate(F);
    CHECK((a - b).l2_norm() == 0.0);
}
