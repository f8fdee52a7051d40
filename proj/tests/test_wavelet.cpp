#include "doctest.h"

#include <cmath>
#include <vector>

#include "besov/errors.hpp"
#include "besov/rng.hpp"
#include "besov/wavelet.hpp"

using namespace besov;

namespace {

GridFunction random_grid(int d, int J, Rng& rng) {
    GridFunction f(d, J);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
    return f;
}

CoefficientTree random_tree(const WaveletBasis& basis, Rng& rng) {
    CoefficientTree t(basis);
    for (int k = 0; k <= basis.J; ++k)
        for (double& v : t.level(k)) v = rng.normal();
    return t;
}

const WaveletFamily kFamilies[] = {WaveletFamily::Haar, WaveletFamily::Daubechies2,
                                   WaveletFamily::Daubechies3, WaveletFamily::Daubechies4};

} // namespace

TEST_CASE("haar analysis of the constant function") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 3};
    GridFunction f(1, 3);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
    auto tree = dwt_forward(f, basis);
    CHECK(tree.level(0)[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 1; k <= 3; ++k)
        for (double v : tree.level(k)) CHECK(std::fabs(v) < 1e-14);
}

TEST_CASE("analysis of a synthesized basis element recovers the unit tree") {
    for (auto fam : kFamilies) {
        WaveletBasis basis{fam, 1, 4};
        CoefficientTree unit(basis);
        unit.level(2)[1] = 1.0;
        auto f = dwt_inverse(unit, basis);
        auto back = dwt_forward(f, basis);
        for (int k = 0; k <= 4; ++k)
            for (std::size_t l = 0; l < back.level(k).size(); ++l) {
                const double expect = (k == 2 && l == 1) ? 1.0 : 0.0;
                CHECK(back.level(k)[l] == doctest::Approx(expect).epsilon(1e-12));
            }
    }
}

TEST_CASE("parseval against brute-force grid inner products") {
    // Independent oracle: synthesize every basis function on the grid and
    // take plain grid inner products <f, psi_kl>; compare with dwt_forward.
    Rng rng(11u);
    for (int d : {1, 2}) {
        WaveletBasis basis{WaveletFamily::Daubechies2, d, d == 1 ? 5 : 3};
        auto f = random_grid(d, basis.J, rng);
        auto fast = dwt_forward(f, basis);
        double sq = 0.0;
        for (int k = 0; k <= basis.J; ++k) {
            for (std::size_t l = 0; l < basis.level_size(k); ++l) {
                CoefficientTree unit(basis);
                unit.level(k)[l] = 1.0;
                auto psi = dwt_inverse(unit, basis);
                const double coeff = f.inner(psi);
                CHECK(fast.level(k)[l] == doctest::Approx(coeff).epsilon(1e-10));
                sq += coeff * coeff;
            }
        }
        CHECK(std::sqrt(sq) == doctest::Approx(f.l2_norm()).epsilon(1e-10));
        CHECK(fast.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-10));
    }
}

TEST_CASE("round trips at 1e-12 for all families and both dimensions") {
    Rng rng(7u);
    for (auto fam : kFamilies) {
        for (int d : {1, 2}) {
            WaveletBasis basis{fam, d, d == 1 ? 8 : 4};
            auto tree = random_tree(basis, rng);
            auto f = dwt_inverse(tree, basis);
            auto back = dwt_forward(f, basis);
            auto f2 = dwt_inverse(back, basis);
            for (int k = 0; k <= basis.J; ++k)
                for (std::size_t l = 0; l < tree.level(k).size(); ++l)
                    CHECK(back.level(k)[l] == doctest::Approx(tree.level(k)[l]).epsilon(1e-12));
            for (std::size_t i = 0; i < f.size(); ++i)
                CHECK(f2[i] == doctest::Approx(f[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero tree and unit coarse coefficient") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 4};
    CoefficientTree zero(basis);
    auto f = dwt_inverse(zero, basis);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == 0.0);

    CoefficientTree coarse(basis);
    coarse.level(0)[0] = 1.0;
    auto one = dwt_inverse(coarse, basis);
    for (std::size_t i = 0; i < one.size(); ++i)
        CHECK(one[i] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("level sizes of the periodized tree") {
    for (int d : {1, 2}) {
        WaveletBasis basis{WaveletFamily::Haar, d, 6};
        std::size_t total = basis.level_size(0);
        CHECK(basis.level_size(0) == 1);
        const std::size_t orientations = (1u << d) - 1;
        for (int k = 1; k <= basis.J; ++k) {
            CHECK(basis.level_size(k) ==
                  orientations * GridFunction::total_cells(d, k - 1));
            total += basis.level_size(k);
        }
        CHECK(total == GridFunction::total_cells(d, basis.J));
    }
}

TEST_CASE("sequence norm reference values") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 4};
    CoefficientTree t(basis);
    t.level(3)[2] = 1.0;
    // weight 2^{(alpha - d/2) k} = 2^{1.5 * 3}
    CHECK(seq_norm(t, SeqNorm::z_tilde(2.0)) ==
          doctest::Approx(22.627416997969522).epsilon(1e-13));

    CoefficientTree zero(basis);
    CHECK(seq_norm(zero, SeqNorm::z_tilde(2.0)) == 0.0);
    CHECK(seq_norm(zero, SeqNorm::besov(1.3, 1.0, 4.0)) == 0.0);
    CHECK(seq_norm(zero, SeqNorm::neg_sobolev(1.0)) == 0.0);
}

TEST_CASE("besov(0,2,2) equals the plain l2 norm and the grid L2 norm") {
    Rng rng(23u);
    WaveletBasis basis{WaveletFamily::Daubechies3, 1, 6};
    auto tree = random_tree(basis, rng);
    CHECK(seq_norm(tree, SeqNorm::besov(0.0, 2.0, 2.0)) ==
          doctest::Approx(tree.l2_norm()).epsilon(1e-12));
    auto f = dwt_inverse(tree, basis);
    CHECK(seq_norm(tree, SeqNorm::besov(0.0, 2.0, 2.0)) ==
          doctest::Approx(f.l2_norm()).epsilon(1e-10));
}

TEST_CASE("norm axioms on random pairs") {
    Rng rng(37u);
    WaveletBasis basis{WaveletFamily::Haar, 1, 5};
    const SeqNorm norms[] = {SeqNorm::besov(0.7, 1.0, 2.0), SeqNorm::besov(1.2, 3.0, 1.0),
                             SeqNorm::z_tilde(2.0), SeqNorm::q_tilde(1.5),
                             SeqNorm::neg_sobolev(1.0)};
    for (const auto& n : norms) {
        for (int trial = 0; trial < 100; ++trial) {
            auto a = random_tree(basis, rng);
            auto b = random_tree(basis, rng);
            const double s = 2.0 * rng.uniform() - 1.0;
            auto scaled = a;
            scaled *= s;
            CHECK(seq_norm(scaled, n) ==
                  doctest::Approx(std::fabs(s) * seq_norm(a, n)).epsilon(1e-10));
            CHECK(seq_norm(a + b, n) <= seq_norm(a, n) + seq_norm(b, n) + 1e-10);
        }
    }
}

TEST_CASE("shape mismatches raise InvalidInput") {
    WaveletBasis basis{WaveletFamily::Haar, 1, 4};
    GridFunction wrong(1, 3);
    CHECK_THROWS_AS(dwt_forward(wrong, basis), InvalidInput);
    WaveletBasis other{WaveletFamily::Haar, 1, 5};
    CoefficientTree t(other);
    CHECK_THROWS_AS(dwt_inverse(t, basis), InvalidInput);
    CHECK_THROWS_AS((WaveletBasis{WaveletFamily::Haar, 3, 2}.validate()), InvalidInput);
    CHECK_THROWS_AS((WaveletBasis{WaveletFamily::Haar, 1, 0}.validate()), InvalidInput);
}
