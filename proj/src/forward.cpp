#include "besov/forward.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "besov/errors.hpp"
#include "besov/rng.hpp"

namespace besov {

namespace {

// Thomas algorithm for a tridiagonal system; diagonals are overwritten.
std::vector<double> tridiag_solve(std::vector<double> sub, std::vector<double> diag,
                                  std::vector<double> sup, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

// Jacobi-preconditioned conjugate gradients for an SPD operator given as a
// matrix-free apply.  Relative tolerance on the residual norm.
int pcg_solve(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
              const std::vector<double>& diag, const std::vector<double>& rhs,
              std::vector<double>& x, double tol, double* rel_residual) {
    const std::size_t n = rhs.size();
    x.assign(n, 0.0);
    std::vector<double> r = rhs, z(n), p(n), ap(n);
    double bnorm = 0.0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        if (rel_residual) *rel_residual = 0.0;
        return 0;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    const int max_iters = 20000;
    for (int it = 1; it <= max_iters; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
        const double alpha = rz / pap;
        double rnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rnorm += r[i] * r[i];
        }
        rnorm = std::sqrt(rnorm);
        if (rnorm <= tol * bnorm) {
            if (rel_residual) *rel_residual = rnorm / bnorm;
            return it;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        double rz_new = 0.0;
        for (std::size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("pcg_solve: no convergence within iteration budget");
}

constexpr double kLinTol = 1e-12;

} // namespace

ForwardModel::ForwardModel(Kind kind, const WaveletBasis& basis) : kind_(kind), basis_(basis) {
    basis_.validate();
}

ForwardModel ForwardModel::identity(const WaveletBasis& basis) {
    return ForwardModel(Kind::Identity, basis);
}

ForwardModel ForwardModel::linear_smoothing(const WaveletBasis& basis, int kappa) {
    if (kappa < 0) throw InvalidInput("linear_smoothing: kappa must be >= 0");
    ForwardModel m(Kind::LinearSmoothing, basis);
    m.kappa_ = kappa;
    return m;
}

ForwardModel ForwardModel::darcy(const WaveletBasis& basis, const LinkFunction& link,
                                 const CutoffSpec& cutoff, double source, double k_min) {
    link.validate();
    cutoff.validate();
    ForwardModel m(Kind::Darcy, basis);
    m.link_ = link;
    m.cutoff_ = cutoff;
    m.source_ = source;
    m.k_min_ = k_min;
    return m;
}

ForwardModel ForwardModel::schroedinger(const WaveletBasis& basis, const LinkFunction& link,
                                        const CutoffSpec& cutoff, double boundary) {
    link.validate();
    cutoff.validate();
    if (!(boundary > 0.0)) throw InvalidInput("schroedinger: boundary data must be positive");
    ForwardModel m(Kind::Schroedinger, basis);
    m.link_ = link;
    m.cutoff_ = cutoff;
    m.boundary_ = boundary;
    return m;
}

int ForwardModel::model_kappa() const {
    switch (kind_) {
        case Kind::Identity: return 0;
        case Kind::LinearSmoothing: return kappa_;
        case Kind::Darcy: return 1;
        case Kind::Schroedinger: return 2;
    }
    return 0;
}

GridFunction ForwardModel::parameter(const CoefficientTree& F) const {
    auto V = dwt_inverse(F, basis_);
    if (cutoff_.enabled) {
        auto chi = cutoff_grid(cutoff_, basis_.d, basis_.J);
        for (std::size_t i = 0; i < V.size(); ++i) V[i] *= chi[i];
    }
    if (link_.kind != LinkFunction::Kind::Identity)
        for (std::size_t i = 0; i < V.size(); ++i) V[i] = link_.value(V[i]);
    return V;
}

GridFunction ForwardModel::solve_pde(const GridFunction& f, double* residual, int* iters) const {
    const std::size_t n = f.cells_per_axis();
    const double h = f.spacing();
    GridFunction u(basis_.d, basis_.J);

    if (kind_ == Kind::Darcy) {
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!(f[i] > k_min_))
                throw DomainError("darcy: coefficient must exceed K_min everywhere");
    } else {
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!(f[i] >= 0.0)) throw DomainError("schroedinger: potential must be nonnegative");
    }

    if (basis_.d == 1) {
        const std::size_t m = n - 1; // interior nodes
        std::vector<double> sub(m), diag(m), sup(m), rhs(m);
        if (kind_ == Kind::Darcy) {
            // faces between nodes j and j+1 coincide with cell centers.
            for (std::size_t j = 1; j <= m; ++j) {
                const double fw = f[j - 1], fe = f[j];
                diag[j - 1] = (fw + fe) / (h * h);
                sub[j - 1] = -fw / (h * h);
                sup[j - 1] = -fe / (h * h);
                rhs[j - 1] = -source_;
            }
        } else {
            for (std::size_t j = 1; j <= m; ++j) {
                diag[j - 1] = 1.0 / (h * h) + 0.5 * (f[j - 1] + f[j]);
                sub[j - 1] = -0.5 / (h * h);
                sup[j - 1] = -0.5 / (h * h);
                rhs[j - 1] = 0.0;
            }
            rhs[0] += 0.5 * boundary_ / (h * h);
            rhs[m - 1] += 0.5 * boundary_ / (h * h);
        }
        auto ui = tridiag_solve(sub, diag, sup, rhs);
        // residual check of the solved system
        double rnorm = 0.0, bnorm = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            double row;
            const double um = j >= 2 ? ui[j - 2] : 0.0;
            const double up = j <= m - 1 ? ui[j] : 0.0;
            if (kind_ == Kind::Darcy) {
                row = (-f[j - 1] * um + (f[j - 1] + f[j]) * ui[j - 1] - f[j] * up) / (h * h) +
                      source_;
            } else {
                const double fb = 1.0 / (h * h) + 0.5 * (f[j - 1] + f[j]);
                double b = 0.0;
                if (j == 1) b += 0.5 * boundary_ / (h * h);
                if (j == m) b += 0.5 * boundary_ / (h * h);
                row = (-0.5 * um / (h * h) + fb * ui[j - 1] - 0.5 * up / (h * h)) - b;
            }
            rnorm += row * row;
        }
        for (std::size_t j = 0; j < m; ++j) bnorm += rhs[j] * rhs[j];
        if (residual) *residual = bnorm > 0 ? std::sqrt(rnorm / bnorm) : std::sqrt(rnorm);
        if (iters) *iters = 0;
        // node -> cell averaging; boundary values are 0 (Darcy) or g (Schroedinger)
        const double gb = kind_ == Kind::Darcy ? 0.0 : boundary_;
        for (std::size_t c = 0; c < n; ++c) {
            const double ul = c == 0 ? gb : ui[c - 1];
            const double ur = c == n - 1 ? gb : ui[c];
            u[c] = 0.5 * (ul + ur);
        }
        return u;
    }

    // d = 2: interior nodes (i,j), i,j in 1..n-1, lexicographic by j then i.
    const std::size_t m = n - 1;
    const std::size_t dofs = m * m;
    auto idx = [m](std::size_t i, std::size_t j) { return (j - 1) * m + (i - 1); };
    std::vector<double> diag(dofs), rhs(dofs);
    const double ih2 = 1.0 / (h * h);

    if (kind_ == Kind::Darcy) {
        // face conductivities: x-face (i+1/2, j) from cells (i, j-1),(i, j);
        // y-face (i, j+1/2) from cells (i-1, j),(i, j).
        auto face_x = [&](std::size_t i, std::size_t j) {
            return 0.5 * (f.at(i, j - 1) + f.at(i, j));
        };
        auto face_y = [&](std::size_t i, std::size_t j) {
            return 0.5 * (f.at(i - 1, j) + f.at(i, j));
        };
        for (std::size_t j = 1; j <= m; ++j)
            for (std::size_t i = 1; i <= m; ++i) {
                const double fe = face_x(i, j), fw = face_x(i - 1, j);
                const double fn = face_y(i, j), fs = face_y(i, j - 1);
                diag[idx(i, j)] = (fe + fw + fn + fs) * ih2;
                // node value of g: average of the four touching cells
                rhs[idx(i, j)] = -source_;
            }
        auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
            for (std::size_t j = 1; j <= m; ++j)
                for (std::size_t i = 1; i <= m; ++i) {
                    const double fe = face_x(i, j), fw = face_x(i - 1, j);
                    const double fn = face_y(i, j), fs = face_y(i, j - 1);
                    double v = (fe + fw + fn + fs) * x[idx(i, j)];
                    if (i > 1) v -= fw * x[idx(i - 1, j)];
                    if (i < m) v -= fe * x[idx(i + 1, j)];
                    if (j > 1) v -= fs * x[idx(i, j - 1)];
                    if (j < m) v -= fn * x[idx(i, j + 1)];
                    y[idx(i, j)] = v * ih2;
                }
        };
        std::vector<double> x;
        double rel = 0.0;
        const int it = pcg_solve(apply, diag, rhs, x, kLinTol, &rel);
        if (residual) *residual = rel;
        if (iters) *iters = it;
        for (std::size_t cy = 0; cy < n; ++cy)
            for (std::size_t cx = 0; cx < n; ++cx) {
                double s = 0.0;
                for (std::size_t dy = 0; dy <= 1; ++dy)
                    for (std::size_t dx = 0; dx <= 1; ++dx) {
                        const std::size_t ni = cx + dx, nj = cy + dy;
                        if (ni >= 1 && ni <= m && nj >= 1 && nj <= m) s += x[idx(ni, nj)];
                    }
                u.at(cx, cy) = 0.25 * s;
            }
        return u;
    }

    // Schroedinger
    auto node_f = [&](std::size_t i, std::size_t j) {
        return 0.25 * (f.at(i - 1, j - 1) + f.at(i, j - 1) + f.at(i - 1, j) + f.at(i, j));
    };
    for (std::size_t j = 1; j <= m; ++j)
        for (std::size_t i = 1; i <= m; ++i) {
            diag[idx(i, j)] = 2.0 * ih2 + node_f(i, j);
            double b = 0.0;
            if (i == 1) b += 0.5 * boundary_ * ih2;
            if (i == m) b += 0.5 * boundary_ * ih2;
            if (j == 1) b += 0.5 * boundary_ * ih2;
            if (j == m) b += 0.5 * boundary_ * ih2;
            rhs[idx(i, j)] = b;
        }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t j = 1; j <= m; ++j)
            for (std::size_t i = 1; i <= m; ++i) {
                double v = (2.0 * ih2 + node_f(i, j)) * x[idx(i, j)];
                if (i > 1) v -= 0.5 * ih2 * x[idx(i - 1, j)];
                if (i < m) v -= 0.5 * ih2 * x[idx(i + 1, j)];
                if (j > 1) v -= 0.5 * ih2 * x[idx(i, j - 1)];
                if (j < m) v -= 0.5 * ih2 * x[idx(i, j + 1)];
                y[idx(i, j)] = v;
            }
    };
    std::vector<double> x;
    double rel = 0.0;
    const int it = pcg_solve(apply, diag, rhs, x, kLinTol, &rel);
    if (residual) *residual = rel;
    if (iters) *iters = it;
    auto node_u = [&](std::size_t ni, std::size_t nj) {
        if (ni == 0 || ni == n || nj == 0 || nj == n) return boundary_;
        return x[idx(ni, nj)];
    };
    for (std::size_t cy = 0; cy < n; ++cy)
        for (std::size_t cx = 0; cx < n; ++cx)
            u.at(cx, cy) = 0.25 * (node_u(cx, cy) + node_u(cx + 1, cy) + node_u(cx, cy + 1) +
                                   node_u(cx + 1, cy + 1));
    return u;
}

PdeSolution ForwardModel::evaluate_with_diagnostics(const CoefficientTree& F) const {
    if (F.dim() != basis_.d || F.max_level() != basis_.J)
        throw InvalidInput("evaluate: tree does not match model basis");
    PdeSolution sol{GridFunction(basis_.d, basis_.J), 0.0, 0};
    switch (kind_) {
        case Kind::Identity:
            sol.u = parameter(F);
            return sol;
        case Kind::LinearSmoothing: {
            auto damped = dwt_forward(parameter(F), basis_);
            for (int k = 0; k <= basis_.J; ++k)
                damped.scale_level(k, std::pow(2.0, -static_cast<double>(kappa_) * k));
            sol.u = dwt_inverse(damped, basis_);
            return sol;
        }
        case Kind::Darcy:
        case Kind::Schroedinger: {
            auto f = parameter(F);
            sol.u = solve_pde(f, &sol.relative_residual, &sol.iterations);
            return sol;
        }
    }
    return sol;
}

GridFunction ForwardModel::evaluate(const CoefficientTree& F) const {
    return evaluate_with_diagnostics(F).u;
}

CoefficientTree ForwardModel::adjoint_gradient(const CoefficientTree& F,
                                               const GridFunction& residual) const {
    if (F.dim() != basis_.d || F.max_level() != basis_.J)
        throw InvalidInput("adjoint_gradient: tree does not match model basis");
    residual.values(); // shape check below
    GridFunction probe(basis_.d, basis_.J);
    probe.require_same_shape(residual);

    const double h = probe.spacing();
    const double measure = probe.cell_measure();
    const std::size_t n = probe.cells_per_axis();

    // dphi/d(param cells); param = Phi(chi * V)
    GridFunction dparam(basis_.d, basis_.J);

    if (kind_ == Kind::Identity) {
        for (std::size_t i = 0; i < dparam.size(); ++i) dparam[i] = measure * residual[i];
    } else if (kind_ == Kind::LinearSmoothing) {
        auto t = dwt_forward(residual, basis_);
        for (int k = 0; k <= basis_.J; ++k)
            t.scale_level(k, std::pow(2.0, -static_cast<double>(kappa_) * k));
        auto back = dwt_inverse(t, basis_);
        for (std::size_t i = 0; i < dparam.size(); ++i) dparam[i] = measure * back[i];
    } else {
        auto f = parameter(F);
        if (basis_.d == 1) {
            const std::size_t m = n - 1;
            std::vector<double> sub(m), diag(m), sup(m), rhs(m), ui(m);
            if (kind_ == Kind::Darcy) {
                for (std::size_t j = 1; j <= m; ++j) {
                    diag[j - 1] = (f[j - 1] + f[j]) / (h * h);
                    sub[j - 1] = -f[j - 1] / (h * h);
                    sup[j - 1] = -f[j] / (h * h);
                    rhs[j - 1] = -source_;
                }
            } else {
                for (std::size_t j = 1; j <= m; ++j) {
                    diag[j - 1] = 1.0 / (h * h) + 0.5 * (f[j - 1] + f[j]);
                    sub[j - 1] = -0.5 / (h * h);
                    sup[j - 1] = -0.5 / (h * h);
                    rhs[j - 1] = 0.0;
                }
                rhs[0] += 0.5 * boundary_ / (h * h);
                rhs[m - 1] += 0.5 * boundary_ / (h * h);
            }
            ui = tridiag_solve(sub, diag, sup, rhs);
            // adjoint system (operator is symmetric): M w = measure * P^T r
            std::vector<double> arhs(m, 0.0);
            for (std::size_t j = 1; j <= m; ++j)
                arhs[j - 1] = measure * 0.5 * (residual[j - 1] + residual[j]);
            auto w = tridiag_solve(sub, diag, sup, arhs);
            if (kind_ == Kind::Darcy) {
                const double gb = 0.0;
                for (std::size_t c = 0; c < n; ++c) {
                    const double ul = c == 0 ? gb : ui[c - 1];
                    const double ur = c == n - 1 ? gb : ui[c];
                    const double wl = c == 0 ? 0.0 : w[c - 1];
                    const double wr = c == n - 1 ? 0.0 : w[c];
                    dparam[c] = -(ur - ul) * (wr - wl) / (h * h);
                }
            } else {
                std::vector<double> dnode(m);
                for (std::size_t j = 0; j < m; ++j) dnode[j] = -w[j] * ui[j];
                for (std::size_t c = 0; c < n; ++c) {
                    double s = 0.0;
                    if (c >= 1) s += 0.5 * dnode[c - 1];
                    if (c < m) s += 0.5 * dnode[c];
                    dparam[c] = s;
                }
            }
        } else {
            const std::size_t m = n - 1;
            const std::size_t dofs = m * m;
            auto idx = [m](std::size_t i, std::size_t j) { return (j - 1) * m + (i - 1); };
            const double ih2 = 1.0 / (h * h);
            std::vector<double> diag(dofs), rhs(dofs), arhs(dofs);
            for (std::size_t j = 1; j <= m; ++j)
                for (std::size_t i = 1; i <= m; ++i) {
                    const double rsum = residual.at(i - 1, j - 1) + residual.at(i, j - 1) +
                                        residual.at(i - 1, j) + residual.at(i, j);
                    arhs[idx(i, j)] = measure * 0.25 * rsum;
                }
            if (kind_ == Kind::Darcy) {
                auto face_x = [&](std::size_t i, std::size_t j) {
                    return 0.5 * (f.at(i, j - 1) + f.at(i, j));
                };
                auto face_y = [&](std::size_t i, std::size_t j) {
                    return 0.5 * (f.at(i - 1, j) + f.at(i, j));
                };
                for (std::size_t j = 1; j <= m; ++j)
                    for (std::size_t i = 1; i <= m; ++i) {
                        diag[idx(i, j)] =
                            (face_x(i, j) + face_x(i - 1, j) + face_y(i, j) + face_y(i, j - 1)) *
                            ih2;
                        rhs[idx(i, j)] = -source_;
                    }
                auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
                    for (std::size_t j = 1; j <= m; ++j)
                        for (std::size_t i = 1; i <= m; ++i) {
                            const double fe = face_x(i, j), fw = face_x(i - 1, j);
                            const double fn = face_y(i, j), fs = face_y(i, j - 1);
                            double v = (fe + fw + fn + fs) * x[idx(i, j)];
                            if (i > 1) v -= fw * x[idx(i - 1, j)];
                            if (i < m) v -= fe * x[idx(i + 1, j)];
                            if (j > 1) v -= fs * x[idx(i, j - 1)];
                            if (j < m) v -= fn * x[idx(i, j + 1)];
                            y[idx(i, j)] = v * ih2;
                        }
                };
                std::vector<double> uvec, wvec;
                pcg_solve(apply, diag, rhs, uvec, kLinTol, nullptr);
                pcg_solve(apply, diag, arhs, wvec, kLinTol, nullptr);
                auto node = [&](const std::vector<double>& v, std::size_t ni, std::size_t nj) {
                    if (ni == 0 || ni == n || nj == 0 || nj == n) return 0.0;
                    return v[idx(ni, nj)];
                };
                dparam.values().assign(dparam.size(), 0.0);
                // x-faces: nodes (i,j)->(i+1,j), i in 0..n-1, j in 1..m
                for (std::size_t j = 1; j <= m; ++j)
                    for (std::size_t i = 0; i < n; ++i) {
                        const double du = node(uvec, i + 1, j) - node(uvec, i, j);
                        const double dw = node(wvec, i + 1, j) - node(wvec, i, j);
                        const double sens = -du * dw * ih2;
                        dparam.at(i, j - 1) += 0.5 * sens;
                        dparam.at(i, j) += 0.5 * sens;
                    }
                // y-faces: nodes (i,j)->(i,j+1), i in 1..m, j in 0..n-1
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t i = 1; i <= m; ++i) {
                        const double du = node(uvec, i, j + 1) - node(uvec, i, j);
                        const double dw = node(wvec, i, j + 1) - node(wvec, i, j);
                        const double sens = -du * dw * ih2;
                        dparam.at(i - 1, j) += 0.5 * sens;
                        dparam.at(i, j) += 0.5 * sens;
                    }
            } else {
                auto node_f = [&](std::size_t i, std::size_t j) {
                    return 0.25 *
                           (f.at(i - 1, j - 1) + f.at(i, j - 1) + f.at(i - 1, j) + f.at(i, j));
                };
                for (std::size_t j = 1; j <= m; ++j)
                    for (std::size_t i = 1; i <= m; ++i) {
                        diag[idx(i, j)] = 2.0 * ih2 + node_f(i, j);
                        double b = 0.0;
                        if (i == 1) b += 0.5 * boundary_ * ih2;
                        if (i == m) b += 0.5 * boundary_ * ih2;
                        if (j == 1) b += 0.5 * boundary_ * ih2;
                        if (j == m) b += 0.5 * boundary_ * ih2;
                        rhs[idx(i, j)] = b;
                    }
                auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
                    for (std::size_t j = 1; j <= m; ++j)
                        for (std::size_t i = 1; i <= m; ++i) {
                            double v = (2.0 * ih2 + node_f(i, j)) * x[idx(i, j)];
                            if (i > 1) v -= 0.5 * ih2 * x[idx(i - 1, j)];
                            if (i < m) v -= 0.5 * ih2 * x[idx(i + 1, j)];
                            if (j > 1) v -= 0.5 * ih2 * x[idx(i, j - 1)];
                            if (j < m) v -= 0.5 * ih2 * x[idx(i, j + 1)];
                            y[idx(i, j)] = v;
                        }
                };
                std::vector<double> uvec, wvec;
                pcg_solve(apply, diag, rhs, uvec, kLinTol, nullptr);
                pcg_solve(apply, diag, arhs, wvec, kLinTol, nullptr);
                dparam.values().assign(dparam.size(), 0.0);
                for (std::size_t j = 1; j <= m; ++j)
                    for (std::size_t i = 1; i <= m; ++i) {
                        const double sens = -wvec[idx(i, j)] * uvec[idx(i, j)];
                        dparam.at(i - 1, j - 1) += 0.25 * sens;
                        dparam.at(i, j - 1) += 0.25 * sens;
                        dparam.at(i - 1, j) += 0.25 * sens;
                        dparam.at(i, j) += 0.25 * sens;
                    }
            }
        }
    }

    // chain through the link derivative and the cutoff, then the synthesis
    // transpose (= analysis / cell measure).
    if (cutoff_.enabled || link_.kind != LinkFunction::Kind::Identity) {
        auto V = dwt_inverse(F, basis_);
        GridFunction chi = cutoff_.enabled ? cutoff_grid(cutoff_, basis_.d, basis_.J)
                                           : GridFunction(basis_.d, basis_.J);
        if (!cutoff_.enabled)
            for (std::size_t i = 0; i < chi.size(); ++i) chi[i] = 1.0;
        for (std::size_t i = 0; i < dparam.size(); ++i)
            dparam[i] *= link_.deriv(chi[i] * V[i]) * chi[i];
    }
    auto grad = dwt_forward(dparam, basis_);
    grad *= 1.0 / measure;
    return grad;
}

GridFunction ForwardModel::tangent(const CoefficientTree& F, const CoefficientTree& v) const {
    if (F.dim() != basis_.d || F.max_level() != basis_.J)
        throw InvalidInput("tangent: tree does not match model basis");
    F.require_same_shape(v);

    // fdot = Phi'(chi V) * chi * synthesis(v), the parameter perturbation
    auto V = dwt_inverse(F, basis_);
    auto fdot = dwt_inverse(v, basis_);
    GridFunction chi(basis_.d, basis_.J);
    for (std::size_t i = 0; i < chi.size(); ++i) chi[i] = 1.0;
    if (cutoff_.enabled) chi = cutoff_grid(cutoff_, basis_.d, basis_.J);
    for (std::size_t i = 0; i < fdot.size(); ++i)
        fdot[i] *= link_.deriv(chi[i] * V[i]) * chi[i];

    if (kind_ == Kind::Identity) return fdot;
    if (kind_ == Kind::LinearSmoothing) {
        auto t = dwt_forward(fdot, basis_);
        for (int k = 0; k <= basis_.J; ++k)
            t.scale_level(k, std::pow(2.0, -static_cast<double>(kappa_) * k));
        return dwt_inverse(t, basis_);
    }

    auto f = parameter(F);
    const std::size_t n = f.cells_per_axis();
    const double h = f.spacing();
    GridFunction udot(basis_.d, basis_.J);

    if (basis_.d == 1) {
        const std::size_t m = n - 1;
        std::vector<double> sub(m), diag(m), sup(m), rhs(m);
        if (kind_ == Kind::Darcy) {
            for (std::size_t j = 1; j <= m; ++j) {
                diag[j - 1] = (f[j - 1] + f[j]) / (h * h);
                sub[j - 1] = -f[j - 1] / (h * h);
                sup[j - 1] = -f[j] / (h * h);
                rhs[j - 1] = -source_;
            }
        } else {
            for (std::size_t j = 1; j <= m; ++j) {
                diag[j - 1] = 1.0 / (h * h) + 0.5 * (f[j - 1] + f[j]);
                sub[j - 1] = -0.5 / (h * h);
                sup[j - 1] = -0.5 / (h * h);
                rhs[j - 1] = 0.0;
            }
            rhs[0] += 0.5 * boundary_ / (h * h);
            rhs[m - 1] += 0.5 * boundary_ / (h * h);
        }
        auto ui = tridiag_solve(sub, diag, sup, rhs);
        std::vector<double> trhs(m, 0.0);
        if (kind_ == Kind::Darcy) {
            // -(dM/df fdot) u, facewise: face c joins nodes c and c+1
            auto node_u = [&](std::size_t j) { return (j == 0 || j == n) ? 0.0 : ui[j - 1]; };
            for (std::size_t c = 0; c < n; ++c) {
                const double du = node_u(c + 1) - node_u(c);
                const double s = fdot[c] * du / (h * h);
                if (c >= 1) trhs[c - 1] += s;       // row of node c
                if (c + 1 <= m) trhs[c] -= s;       // row of node c+1
            }
        } else {
            for (std::size_t j = 1; j <= m; ++j)
                trhs[j - 1] = -0.5 * (fdot[j - 1] + fdot[j]) * ui[j - 1];
        }
        auto ud = tridiag_solve(sub, diag, sup, trhs);
        for (std::size_t c = 0; c < n; ++c) {
            const double ul = c == 0 ? 0.0 : ud[c - 1];
            const double ur = c == n - 1 ? 0.0 : ud[c];
            udot[c] = 0.5 * (ul + ur);
        }
        return udot;
    }

    const std::size_t m = n - 1;
    const std::size_t dofs = m * m;
    auto idx = [m](std::size_t i, std::size_t j) { return (j - 1) * m + (i - 1); };
    const double ih2 = 1.0 / (h * h);
    std::vector<double> diag(dofs), rhs(dofs);
    if (kind_ == Kind::Darcy) {
        auto face_x = [&](std::size_t i, std::size_t j) {
            return 0.5 * (f.at(i, j - 1) + f.at(i, j));
        };
        auto face_y = [&](std::size_t i, std::size_t j) {
            return 0.5 * (f.at(i - 1, j) + f.at(i, j));
        };
        for (std::size_t j = 1; j <= m; ++j)
            for (std::size_t i = 1; i <= m; ++i) {
                diag[idx(i, j)] =
                    (face_x(i, j) + face_x(i - 1, j) + face_y(i, j) + face_y(i, j - 1)) * ih2;
                rhs[idx(i, j)] = -source_;
            }
        auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
            for (std::size_t j = 1; j <= m; ++j)
                for (std::size_t i = 1; i <= m; ++i) {
                    const double fe = face_x(i, j), fw = face_x(i - 1, j);
                    const double fn = face_y(i, j), fs = face_y(i, j - 1);
                    double val = (fe + fw + fn + fs) * x[idx(i, j)];
                    if (i > 1) val -= fw * x[idx(i - 1, j)];
                    if (i < m) val -= fe * x[idx(i + 1, j)];
                    if (j > 1) val -= fs * x[idx(i, j - 1)];
                    if (j < m) val -= fn * x[idx(i, j + 1)];
                    y[idx(i, j)] = val * ih2;
                }
        };
        std::vector<double> uvec;
        pcg_solve(apply, diag, rhs, uvec, kLinTol, nullptr);
        auto node_u = [&](std::size_t ni, std::size_t nj) {
            if (ni == 0 || ni == n || nj == 0 || nj == n) return 0.0;
            return uvec[idx(ni, nj)];
        };
        // face perturbations: average of the two adjacent cells of fdot
        std::vector<double> trhs(dofs, 0.0);
        for (std::size_t j = 1; j <= m; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const double fd = 0.5 * (fdot.at(i, j - 1) + fdot.at(i, j));
                const double du = node_u(i + 1, j) - node_u(i, j);
                const double s = fd * du * ih2;
                if (i >= 1) trhs[idx(i, j)] += s;
                if (i + 1 <= m) trhs[idx(i + 1, j)] -= s;
            }
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 1; i <= m; ++i) {
                const double fd = 0.5 * (fdot.at(i - 1, j) + fdot.at(i, j));
                const double du = node_u(i, j + 1) - node_u(i, j);
                const double s = fd * du * ih2;
                if (j >= 1) trhs[idx(i, j)] += s;
                if (j + 1 <= m) trhs[idx(i, j + 1)] -= s;
            }
        std::vector<double> udvec;
        pcg_solve(apply, diag, trhs, udvec, kLinTol, nullptr);
        auto node_ud = [&](std::size_t ni, std::size_t nj) {
            if (ni == 0 || ni == n || nj == 0 || nj == n) return 0.0;
            return udvec[idx(ni, nj)];
        };
        for (std::size_t cy = 0; cy < n; ++cy)
            for (std::size_t cx = 0; cx < n; ++cx)
                udot.at(cx, cy) = 0.25 * (node_ud(cx, cy) + node_ud(cx + 1, cy) +
                                          node_ud(cx, cy + 1) + node_ud(cx + 1, cy + 1));
        return udot;
    }

    auto node_f = [&](std::size_t i, std::size_t j) {
        return 0.25 * (f.at(i - 1, j - 1) + f.at(i, j - 1) + f.at(i - 1, j) + f.at(i, j));
    };
    for (std::size_t j = 1; j <= m; ++j)
        for (std::size_t i = 1; i <= m; ++i) {
            diag[idx(i, j)] = 2.0 * ih2 + node_f(i, j);
            double b = 0.0;
            if (i == 1) b += 0.5 * boundary_ * ih2;
            if (i == m) b += 0.5 * boundary_ * ih2;
            if (j == 1) b += 0.5 * boundary_ * ih2;
            if (j == m) b += 0.5 * boundary_ * ih2;
            rhs[idx(i, j)] = b;
        }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t j = 1; j <= m; ++j)
            for (std::size_t i = 1; i <= m; ++i) {
                double val = (2.0 * ih2 + node_f(i, j)) * x[idx(i, j)];
                if (i > 1) val -= 0.5 * ih2 * x[idx(i - 1, j)];
                if (i < m) val -= 0.5 * ih2 * x[idx(i + 1, j)];
                if (j > 1) val -= 0.5 * ih2 * x[idx(i, j - 1)];
                if (j < m) val -= 0.5 * ih2 * x[idx(i, j + 1)];
                y[idx(i, j)] = val;
            }
    };
    std::vector<double> uvec;
    pcg_solve(apply, diag, rhs, uvec, kLinTol, nullptr);
    std::vector<double> trhs(dofs);
    for (std::size_t j = 1; j <= m; ++j)
        for (std::size_t i = 1; i <= m; ++i) {
            const double fd = 0.25 * (fdot.at(i - 1, j - 1) + fdot.at(i, j - 1) +
                                      fdot.at(i - 1, j) + fdot.at(i, j));
            trhs[idx(i, j)] = -fd * uvec[idx(i, j)];
        }
    std::vector<double> udvec;
    pcg_solve(apply, diag, trhs, udvec, kLinTol, nullptr);
    auto node_ud = [&](std::size_t ni, std::size_t nj) {
        if (ni == 0 || ni == n || nj == 0 || nj == n) return 0.0;
        return udvec[idx(ni, nj)];
    };
    for (std::size_t cy = 0; cy < n; ++cy)
        for (std::size_t cx = 0; cx < n; ++cx)
            udot.at(cx, cy) = 0.25 * (node_ud(cx, cy) + node_ud(cx + 1, cy) +
                                      node_ud(cx, cy + 1) + node_ud(cx + 1, cy + 1));
    return udot;
}

LipschitzProbe lipschitz_probe(const ForwardModel& model, int kappa, double radius, int trials,
                               std::uint64_t seed) {
    if (trials <= 0) throw InvalidInput("lipschitz_probe: trials must be positive");
    const auto& basis = model.basis();
    PriorSpec gen;
    gen.kind = PriorSpec::Kind::LaplaceBesov;
    gen.alpha = basis.d + 2;
    gen.rho = 1.0;
    gen.cutoff = CutoffSpec::none();
    gen.basis = basis;
    const SeqNorm holder = SeqNorm::besov(2.0, std::numeric_limits<double>::infinity(),
                                          std::numeric_limits<double>::infinity());
    const SeqNorm dual = SeqNorm::neg_sobolev(static_cast<double>(kappa));

    LipschitzProbe probe;
    probe.trials = trials;
    double sum = 0.0;
    Rng rng(derive_seed(seed, 0x6c6970ULL));
    for (int t = 0; t < trials; ++t) {
        auto draw_scaled = [&](std::uint64_t salt) {
            auto F = sample_prior(gen, derive_seed(seed, 2 * t + salt));
            const double surrogate =
                std::max(seq_norm(F, holder), dwt_inverse(F, basis).max_abs());
            const double target = radius * (0.5 + 0.5 * rng.uniform());
            if (surrogate > 0.0) F *= target / surrogate;
            return F;
        };
        auto F1 = draw_scaled(0);
        auto F2 = draw_scaled(1);
        const double num = (model.evaluate(F1) - model.evaluate(F2)).l2_norm();
        const double den = seq_norm(F1 - F2, dual);
        if (den == 0.0) continue;
        const double ratio = num / den;
        probe.max_ratio = std::max(probe.max_ratio, ratio);
        sum += ratio;
    }
    probe.mean_ratio = sum / trials;
    return probe;
}

} // namespace besov
