#include "besov/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "besov/errors.hpp"

namespace besov {

namespace {

// Orthonormal Daubechies scaling filters (N vanishing moments, length 2N),
// classic ordering, 20 significant digits.
constexpr double kHaar[2] = {
    0.70710678118654752440, 0.70710678118654752440};

constexpr double kDb2[4] = {
    0.48296291314453414337, 0.83651630373780790558,
    0.22414386804201338103, -0.12940952255126038117};

constexpr double kDb3[6] = {
    0.33267055295008261600, 0.80689150931109257649,
    0.45987750211849157010, -0.13501102001025458870,
    -0.08544127388202666169, 0.03522629188570953660};

constexpr double kDb4[8] = {
    0.23037781330889650086, 0.71484657055291564709,
    0.63088076792985890788, -0.02798376941685985421,
    -0.18703481171909308408, 0.03084138183556076363,
    0.03288301166688519974, -0.01059740178506903210};

// Periodic single-stage analysis: length n -> approx n/2 + detail n/2.
// QMF highpass g[m] = (-1)^m h[L-1-m].
void analyze_step(const std::vector<double>& c, std::size_t n,
                  std::span<const double> h,
                  std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t L = h.size();
    const std::size_t half = n / 2;
    const std::size_t mask = n - 1;
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (std::size_t m = 0; m < L; ++m) {
            const double x = c[(2 * i + m) & mask];
            a += h[m] * x;
            const double g = ((m & 1) ? 1.0 : -1.0) * h[L - 1 - m];
            d += g * x;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

// Transpose of analyze_step (exact inverse by orthonormality).
void synth_step(const std::vector<double>& approx, const std::vector<double>& detail,
                std::size_t half, std::span<const double> h, std::vector<double>& out) {
    const std::size_t L = h.size();
    const std::size_t n = 2 * half;
    const std::size_t mask = n - 1;
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        for (std::size_t m = 0; m < L; ++m) {
            const std::size_t j = (2 * i + m) & mask;
            const double g = ((m & 1) ? 1.0 : -1.0) * h[L - 1 - m];
            out[j] += h[m] * approx[i] + g * detail[i];
        }
    }
}

} // namespace

const char* family_name(WaveletFamily f) {
    switch (f) {
        case WaveletFamily::Haar: return "haar";
        case WaveletFamily::Daubechies2: return "db2";
        case WaveletFamily::Daubechies3: return "db3";
        case WaveletFamily::Daubechies4: return "db4";
    }
    return "?";
}

WaveletFamily family_from_name(const std::string& name) {
    if (name == "haar" || name == "db1") return WaveletFamily::Haar;
    if (name == "db2") return WaveletFamily::Daubechies2;
    if (name == "db3") return WaveletFamily::Daubechies3;
    if (name == "db4") return WaveletFamily::Daubechies4;
    throw InvalidInput("unknown wavelet family: " + name);
}

std::span<const double> scaling_filter(WaveletFamily f) {
    switch (f) {
        case WaveletFamily::Haar: return {kHaar, 2};
        case WaveletFamily::Daubechies2: return {kDb2, 4};
        case WaveletFamily::Daubechies3: return {kDb3, 6};
        case WaveletFamily::Daubechies4: return {kDb4, 8};
    }
    throw InvalidInput("unknown wavelet family");
}

void WaveletBasis::validate() const {
    if (d != 1 && d != 2) throw InvalidInput("WaveletBasis: d must be 1 or 2");
    if (J < 1) throw InvalidInput("WaveletBasis: J must be >= 1");
}

std::size_t WaveletBasis::level_size(int k) const {
    if (k < 0 || k > J) throw InvalidInput("WaveletBasis: level out of range");
    if (k == 0) return 1;
    const std::size_t per_orientation = GridFunction::total_cells(d, k - 1);
    const std::size_t orientations = (static_cast<std::size_t>(1) << d) - 1;
    return per_orientation * orientations;
}

CoefficientTree::CoefficientTree(const WaveletBasis& basis) : d_(basis.d), J_(basis.J) {
    basis.validate();
    levels_.resize(static_cast<std::size_t>(J_) + 1);
    for (int k = 0; k <= J_; ++k)
        levels_[static_cast<std::size_t>(k)].assign(basis.level_size(k), 0.0);
}

std::size_t CoefficientTree::total_size() const {
    std::size_t n = 0;
    for (const auto& lv : levels_) n += lv.size();
    return n;
}

bool CoefficientTree::same_shape(const CoefficientTree& other) const {
    if (d_ != other.d_ || J_ != other.J_ || levels_.size() != other.levels_.size()) return false;
    for (std::size_t k = 0; k < levels_.size(); ++k)
        if (levels_[k].size() != other.levels_[k].size()) return false;
    return true;
}

void CoefficientTree::require_same_shape(const CoefficientTree& other) const {
    if (!same_shape(other)) throw InvalidInput("CoefficientTree: shape mismatch");
}

double CoefficientTree::l2_norm() const {
    double s = 0.0;
    for (const auto& lv : levels_)
        for (double v : lv) s += v * v;
    return std::sqrt(s);
}

double CoefficientTree::inner(const CoefficientTree& other) const {
    require_same_shape(other);
    double s = 0.0;
    for (std::size_t k = 0; k < levels_.size(); ++k)
        for (std::size_t l = 0; l < levels_[k].size(); ++l)
            s += levels_[k][l] * other.levels_[k][l];
    return s;
}

double CoefficientTree::max_abs() const {
    double m = 0.0;
    for (const auto& lv : levels_)
        for (double v : lv) m = std::max(m, std::fabs(v));
    return m;
}

void CoefficientTree::fill(double value) {
    for (auto& lv : levels_) std::fill(lv.begin(), lv.end(), value);
}

void CoefficientTree::scale_level(int k, double factor) {
    for (double& v : levels_[static_cast<std::size_t>(k)]) v *= factor;
}

CoefficientTree& CoefficientTree::operator+=(const CoefficientTree& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < levels_.size(); ++k)
        for (std::size_t l = 0; l < levels_[k].size(); ++l) levels_[k][l] += other.levels_[k][l];
    return *this;
}

CoefficientTree& CoefficientTree::operator-=(const CoefficientTree& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < levels_.size(); ++k)
        for (std::size_t l = 0; l < levels_[k].size(); ++l) levels_[k][l] -= other.levels_[k][l];
    return *this;
}

CoefficientTree& CoefficientTree::operator*=(double a) {
    for (auto& lv : levels_)
        for (double& v : lv) v *= a;
    return *this;
}

std::vector<double> CoefficientTree::flatten() const {
    std::vector<double> out;
    out.reserve(total_size());
    for (const auto& lv : levels_) out.insert(out.end(), lv.begin(), lv.end());
    return out;
}

void CoefficientTree::unflatten(const std::vector<double>& flat) {
    if (flat.size() != total_size()) throw InvalidInput("CoefficientTree: flat size mismatch");
    std::size_t p = 0;
    for (auto& lv : levels_) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p),
                  flat.begin() + static_cast<std::ptrdiff_t>(p + lv.size()), lv.begin());
        p += lv.size();
    }
}

CoefficientTree operator-(CoefficientTree a, const CoefficientTree& b) {
    a -= b;
    return a;
}

CoefficientTree operator+(CoefficientTree a, const CoefficientTree& b) {
    a += b;
    return a;
}

CoefficientTree dwt_forward(const GridFunction& f, const WaveletBasis& basis) {
    basis.validate();
    if (f.dim() != basis.d || f.level() != basis.J)
        throw InvalidInput("dwt_forward: grid does not match basis (d, J)");
    const auto h = scaling_filter(basis.family);
    CoefficientTree tree(basis);
    const double root_measure = std::sqrt(f.cell_measure());

    if (basis.d == 1) {
        std::vector<double> c(f.values());
        for (double& v : c) v *= root_measure;
        std::vector<double> a(c.size() / 2), det(c.size() / 2);
        std::size_t n = c.size();
        for (int k = basis.J; k >= 1; --k) {
            analyze_step(c, n, h, a, det);
            auto& lvl = tree.level(k);
            std::copy(det.begin(), det.begin() + static_cast<std::ptrdiff_t>(n / 2), lvl.begin());
            std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n / 2), c.begin());
            n /= 2;
        }
        tree.level(0)[0] = c[0];
        return tree;
    }

    // d = 2: separable stages; each stage maps an n x n low-pass block to
    // four (n/2)^2 blocks.  Level block layout: [x-detail | y-detail | diag].
    std::size_t n = f.cells_per_axis();
    std::vector<double> ll(f.values());
    for (double& v : ll) v *= root_measure;
    std::vector<double> row(n), ra(n / 2), rd(n / 2);
    std::vector<double> lowx(n * n / 2), highx(n * n / 2);
    for (int k = basis.J; k >= 1; --k) {
        const std::size_t half = n / 2;
        // rows: x-direction filtering
        for (std::size_t y = 0; y < n; ++y) {
            std::copy(ll.begin() + static_cast<std::ptrdiff_t>(y * n),
                      ll.begin() + static_cast<std::ptrdiff_t>((y + 1) * n), row.begin());
            analyze_step(row, n, h, ra, rd);
            for (std::size_t x = 0; x < half; ++x) {
                lowx[y * half + x] = ra[x];
                highx[y * half + x] = rd[x];
            }
        }
        // columns: y-direction filtering of both halves
        auto& lvl = tree.level(k);
        std::vector<double> col(n), ca(half), cd(half);
        std::vector<double> next_ll(half * half);
        for (std::size_t x = 0; x < half; ++x) {
            for (std::size_t y = 0; y < n; ++y) col[y] = lowx[y * half + x];
            analyze_step(col, n, h, ca, cd);
            for (std::size_t y = 0; y < half; ++y) {
                next_ll[y * half + x] = ca[y];
                lvl[half * half + y * half + x] = cd[y]; // y-detail
            }
            for (std::size_t y = 0; y < n; ++y) col[y] = highx[y * half + x];
            analyze_step(col, n, h, ca, cd);
            for (std::size_t y = 0; y < half; ++y) {
                lvl[y * half + x] = ca[y];                   // x-detail
                lvl[2 * half * half + y * half + x] = cd[y]; // diagonal
            }
        }
        ll.swap(next_ll);
        n = half;
    }
    tree.level(0)[0] = ll[0];
    return tree;
}

GridFunction dwt_inverse(const CoefficientTree& coeffs, const WaveletBasis& basis) {
    basis.validate();
    if (coeffs.dim() != basis.d || coeffs.max_level() != basis.J)
        throw InvalidInput("dwt_inverse: tree does not match basis (d, J)");
    for (int k = 0; k <= basis.J; ++k)
        if (coeffs.level(k).size() != basis.level_size(k))
            throw InvalidInput("dwt_inverse: level size mismatch");
    const auto h = scaling_filter(basis.family);
    GridFunction f(basis.d, basis.J);
    const double root_measure = std::sqrt(f.cell_measure());

    if (basis.d == 1) {
        std::vector<double> c(f.size());
        c[0] = coeffs.level(0)[0];
        std::vector<double> out(f.size());
        std::size_t half = 1;
        for (int k = 1; k <= basis.J; ++k) {
            synth_step(c, coeffs.level(k), half, h, out);
            std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(2 * half), c.begin());
            half *= 2;
        }
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = c[i] / root_measure;
        return f;
    }

    std::vector<double> ll(f.size());
    ll[0] = coeffs.level(0)[0];
    std::vector<double> col_a(f.cells_per_axis() / 2 + 1), col_d(f.cells_per_axis() / 2 + 1);
    for (int k = 1; k <= basis.J; ++k) {
        const std::size_t half = static_cast<std::size_t>(1) << (k - 1);
        const std::size_t n = 2 * half;
        const auto& lvl = coeffs.level(k);
        // columns first (transpose of the forward order)
        std::vector<double> lowx(n * half), highx(n * half), col(n);
        std::vector<double> ca(half), cd(half);
        for (std::size_t x = 0; x < half; ++x) {
            for (std::size_t y = 0; y < half; ++y) {
                ca[y] = ll[y * half + x];
                cd[y] = lvl[half * half + y * half + x];
            }
            synth_step(ca, cd, half, h, col);
            for (std::size_t y = 0; y < n; ++y) lowx[y * half + x] = col[y];
            for (std::size_t y = 0; y < half; ++y) {
                ca[y] = lvl[y * half + x];
                cd[y] = lvl[2 * half * half + y * half + x];
            }
            synth_step(ca, cd, half, h, col);
            for (std::size_t y = 0; y < n; ++y) highx[y * half + x] = col[y];
        }
        std::vector<double> next_ll(n * n), row(n), rl(half), rh(half);
        for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < half; ++x) {
                rl[x] = lowx[y * half + x];
                rh[x] = highx[y * half + x];
            }
            synth_step(rl, rh, half, h, row);
            std::copy(row.begin(), row.end(), next_ll.begin() + static_cast<std::ptrdiff_t>(y * n));
        }
        ll.swap(next_ll);
    }
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = ll[i] / root_measure;
    return f;
}

SeqNorm SeqNorm::besov(double s, double p, double q) {
    SeqNorm n;
    n.kind = Kind::Besov;
    n.s = s;
    n.p = p;
    n.q = q;
    return n;
}

SeqNorm SeqNorm::z_tilde(double alpha) {
    SeqNorm n;
    n.kind = Kind::ZTilde;
    n.alpha = alpha;
    return n;
}

SeqNorm SeqNorm::q_tilde(double alpha) {
    SeqNorm n;
    n.kind = Kind::QTilde;
    n.alpha = alpha;
    return n;
}

SeqNorm SeqNorm::neg_sobolev(double kappa) {
    SeqNorm n;
    n.kind = Kind::NegSobolev;
    n.kappa = kappa;
    return n;
}

double seq_norm(const CoefficientTree& coeffs, const SeqNorm& norm) {
    const double d = coeffs.dim();
    const double inf = std::numeric_limits<double>::infinity();
    switch (norm.kind) {
        case SeqNorm::Kind::ZTilde: {
            double total = 0.0;
            for (int k = 0; k <= coeffs.max_level(); ++k) {
                double lv = 0.0;
                for (double v : coeffs.level(k)) lv += std::fabs(v);
                total += std::pow(2.0, (norm.alpha - d / 2.0) * k) * lv;
            }
            return total;
        }
        case SeqNorm::Kind::QTilde:
        case SeqNorm::Kind::NegSobolev: {
            const double expo = (norm.kind == SeqNorm::Kind::QTilde)
                                    ? (2.0 * norm.alpha - d)
                                    : (-2.0 * norm.kappa);
            double total = 0.0;
            for (int k = 0; k <= coeffs.max_level(); ++k) {
                double lv = 0.0;
                for (double v : coeffs.level(k)) lv += v * v;
                total += std::pow(2.0, expo * k) * lv;
            }
            return std::sqrt(total);
        }
        case SeqNorm::Kind::Besov: {
            if (!(norm.p >= 1.0) || !(norm.q >= 1.0))
                throw InvalidInput("seq_norm: Besov requires p, q >= 1");
            const bool pinf = std::isinf(norm.p);
            const bool qinf = std::isinf(norm.q);
            const double wexp = norm.s + d / 2.0 - (pinf ? 0.0 : d / norm.p);
            double total = 0.0;
            for (int k = 0; k <= coeffs.max_level(); ++k) {
                double lp;
                if (pinf) {
                    lp = 0.0;
                    for (double v : coeffs.level(k)) lp = std::max(lp, std::fabs(v));
                } else {
                    lp = 0.0;
                    for (double v : coeffs.level(k)) lp += std::pow(std::fabs(v), norm.p);
                    lp = std::pow(lp, 1.0 / norm.p);
                }
                const double term = std::pow(2.0, wexp * k) * lp;
                if (qinf)
                    total = std::max(total, term);
                else
                    total += std::pow(term, norm.q);
            }
            return qinf ? total : std::pow(total, 1.0 / norm.q);
        }
    }
    return inf;
}

std::vector<double> weighted_l1_partial_sums(const CoefficientTree& coeffs, double alpha) {
    const double d = coeffs.dim();
    std::vector<double> partial(static_cast<std::size_t>(coeffs.max_level()) + 1, 0.0);
    double running = 0.0;
    for (int k = 0; k <= coeffs.max_level(); ++k) {
        double lv = 0.0;
        for (double v : coeffs.level(k)) lv += std::fabs(v);
        running += std::pow(2.0, (alpha - d / 2.0) * k) * lv;
        partial[static_cast<std::size_t>(k)] = running;
    }
    return partial;
}

} // namespace besov
