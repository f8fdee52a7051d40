#include "besov/estimators.hpp"

#include <cmath>
#include <vector>

#include "besov/errors.hpp"
#include "besov/rng.hpp"

namespace besov {

namespace {

std::vector<double> penalty_weights(const WaveletBasis& basis, int alpha) {
    std::vector<double> w(static_cast<std::size_t>(basis.J) + 1);
    for (int k = 0; k <= basis.J; ++k)
        w[static_cast<std::size_t>(k)] = std::pow(2.0, (alpha - basis.d / 2.0) * k);
    return w;
}

double weighted_l1(const CoefficientTree& c, const std::vector<double>& w) {
    double s = 0.0;
    for (int k = 0; k <= c.max_level(); ++k) {
        double lv = 0.0;
        for (double v : c.level(k)) lv += std::fabs(v);
        s += w[static_cast<std::size_t>(k)] * lv;
    }
    return s;
}

void prox_step(const CoefficientTree& point, const CoefficientTree& grad, double step,
               double lambda, const std::vector<double>& w, CoefficientTree& out) {
    out = point;
    for (int k = 0; k <= out.max_level(); ++k) {
        const double t = step * lambda * w[static_cast<std::size_t>(k)];
        auto& lv = out.level(k);
        const auto& gv = grad.level(k);
        for (std::size_t l = 0; l < lv.size(); ++l)
            lv[l] = soft_threshold(lv[l] - step * gv[l], t);
    }
}

// Projection onto the weighted-l1 ball {sum w|c| <= B} by bisection on the
// extra soft threshold.
void project_z_ball(CoefficientTree& c, const std::vector<double>& w, double radius) {
    if (weighted_l1(c, w) <= radius) return;
    double hi = 0.0;
    for (int k = 0; k <= c.max_level(); ++k)
        for (double v : c.level(k))
            hi = std::max(hi, std::fabs(v) / w[static_cast<std::size_t>(k)]);
    double lo = 0.0;
    CoefficientTree tmp = c;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        tmp = c;
        for (int k = 0; k <= tmp.max_level(); ++k) {
            const double t = mid * w[static_cast<std::size_t>(k)];
            for (double& v : tmp.level(k)) v = soft_threshold(v, t);
        }
        if (weighted_l1(tmp, w) > radius)
            lo = mid;
        else
            hi = mid;
    }
    tmp = c;
    for (int k = 0; k <= tmp.max_level(); ++k) {
        const double t = hi * w[static_cast<std::size_t>(k)];
        for (double& v : tmp.level(k)) v = soft_threshold(v, t);
    }
    c = tmp;
}

// Smooth part s(F) = ||a||^2 - 2<y, a>, a = analysis(G(F)), and its
// gradient 2 * adjoint(G(F) - y) in tree coordinates.
struct SmoothPart {
    const Observation& obs;
    const ForwardModel& model;

    double value(const CoefficientTree& F) const {
        auto a = dwt_forward(model.evaluate(F), model.basis());
        return a.inner(a) - 2.0 * obs.y.inner(a);
    }

    double value_and_grad(const CoefficientTree& F, CoefficientTree& grad) const {
        auto a = dwt_forward(model.evaluate(F), model.basis());
        const double s = a.inner(a) - 2.0 * obs.y.inner(a);
        auto resid = dwt_inverse(a - obs.y, model.basis());
        grad = model.adjoint_gradient(F, resid);
        grad *= 2.0;
        return s;
    }
};

// Curvature estimate of the smooth part by a few power iterations on the
// Gauss-Newton operator DG^T DG at the initial point.
double initial_curvature(const SmoothPart& sp, const CoefficientTree& x) {
    const auto& model = sp.model;
    Rng rng(20240617u);
    CoefficientTree v = x;
    for (int k = 0; k <= v.max_level(); ++k)
        for (double& c : v.level(k)) c = rng.normal();
    const double vn = v.l2_norm();
    if (vn == 0.0) return 2.0;
    v *= 1.0 / vn;
    double sigma_sq = 1.0;
    for (int it = 0; it < 8; ++it) {
        auto jv = model.tangent(x, v);
        auto w = model.adjoint_gradient(x, jv);
        const double wn = w.l2_norm();
        if (wn == 0.0) break;
        sigma_sq = wn;
        w *= 1.0 / wn;
        v = w;
    }
    return std::max(2.0 * sigma_sq, 1e-12);
}

} // namespace

void PlsConfig::validate() const {
    if (!(lambda > 0.0)) throw InvalidInput("PlsConfig: lambda must be positive");
    if (!(tol > 0.0)) throw InvalidInput("PlsConfig: tol must be positive");
    if (max_iters < 1) throw InvalidInput("PlsConfig: max_iters must be >= 1");
    if (step_rule == StepRule::Fixed && !(fixed_step > 0.0))
        throw InvalidInput("PlsConfig: fixed_step must be positive");
    if (z_ball_radius && !(*z_ball_radius > 0.0))
        throw InvalidInput("PlsConfig: z_ball_radius must be positive");
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double pls_objective(const Observation& obs, const ForwardModel& model,
                     const CoefficientTree& F, const PlsConfig& cfg) {
    auto a = dwt_forward(model.evaluate(F), model.basis());
    const auto w = penalty_weights(model.basis(), cfg.alpha);
    return 2.0 * obs.y.inner(a) - a.inner(a) - cfg.lambda * weighted_l1(F, w);
}

EstimateReport solve_map(const Observation& obs, const ForwardModel& model, const PlsConfig& cfg,
                         const CoefficientTree& init) {
    cfg.validate();
    const auto w = penalty_weights(model.basis(), cfg.alpha);
    SmoothPart sp{obs, model};
    const bool backtrack = cfg.step_rule == PlsConfig::StepRule::Backtracking;

    EstimateReport report;
    CoefficientTree x = init;
    if (cfg.z_ball_radius) project_z_ball(x, w, *cfg.z_ball_radius);
    CoefficientTree grad_y = x, xn = x, momentum = x;
    double L = backtrack ? initial_curvature(sp, x) : 1.0 / cfg.fixed_step;
    double F_x = sp.value(x) + cfg.lambda * weighted_l1(x, w);
    CoefficientTree y = x;
    double t = 1.0;
    bool converged = false;
    int it = 0;
    Rng check_rng(0xfdc0ffeeULL);

    for (; it < cfg.max_iters; ++it) {
        double s_y = sp.value_and_grad(y, grad_y);

        if (cfg.check_gradients && it % 100 == 0) {
            // FD spot check along a random direction
            CoefficientTree dir = y;
            for (int k = 0; k <= dir.max_level(); ++k)
                for (double& c : dir.level(k)) c = check_rng.normal();
            dir *= 1.0 / dir.l2_norm();
            const double fd = 1e-6;
            auto yp = y, ym = y;
            auto step_dir = dir;
            step_dir *= fd;
            yp += step_dir;
            ym -= step_dir;
            const double numeric = (sp.value(yp) - sp.value(ym)) / (2.0 * fd);
            const double analytic = grad_y.inner(dir);
            const double denom = std::max(1.0, std::fabs(numeric));
            report.grad_check_error =
                std::max(report.grad_check_error, std::fabs(numeric - analytic) / denom);
        }

        double s_xn = 0.0;
        while (true) {
            prox_step(y, grad_y, 1.0 / L, cfg.lambda, w, xn);
            if (cfg.z_ball_radius) project_z_ball(xn, w, *cfg.z_ball_radius);
            auto diff = xn - y;
            const double dn = diff.l2_norm();
            s_xn = sp.value(xn);
            if (!backtrack) break;
            if (s_xn <= s_y + grad_y.inner(diff) + 0.5 * L * dn * dn + 1e-14) break;
            L *= 2.0;
            if (L > 1e16) break;
        }
        double F_xn = s_xn + cfg.lambda * weighted_l1(xn, w);

        if (backtrack && F_xn > F_x + 1e-14) {
            // restart the momentum from the last accepted iterate
            y = x;
            t = 1.0;
            s_y = sp.value_and_grad(y, grad_y);
            prox_step(y, grad_y, 1.0 / L, cfg.lambda, w, xn);
            if (cfg.z_ball_radius) project_z_ball(xn, w, *cfg.z_ball_radius);
            s_xn = sp.value(xn);
            F_xn = s_xn + cfg.lambda * weighted_l1(xn, w);
            if (F_xn > F_x + 1e-14) {
                L *= 2.0;
                if (L > 1e16) break;
                continue;
            }
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        momentum = xn - x;
        momentum *= (t - 1.0) / t_next;
        y = xn + momentum;
        const bool small_change = std::fabs(F_x - F_xn) <= cfg.tol * (1.0 + std::fabs(F_xn));
        x = xn;
        F_x = F_xn;
        t = t_next;
        if (backtrack) L *= 0.95;
        if (small_change && it > 4) {
            converged = true;
            ++it;
            break;
        }
    }

    report.F_hat = x;
    report.iterations = it;
    report.converged = converged;
    report.objective = pls_objective(obs, model, x, cfg);
    return report;
}

EstimateReport solve_map_best(const Observation& obs, const ForwardModel& model,
                              const PlsConfig& cfg, std::span<const CoefficientTree> inits) {
    if (inits.empty()) throw InvalidInput("solve_map_best: need at least one init");
    EstimateReport best;
    bool have = false;
    for (const auto& init : inits) {
        auto rep = solve_map(obs, model, cfg, init);
        if (!have || rep.objective > best.objective) {
            best = rep;
            have = true;
        }
    }
    return best;
}

double tau_lambda_sq(const CoefficientTree& F1, const CoefficientTree& F2,
                     const ForwardModel& model, double lambda, int alpha) {
    const auto w = penalty_weights(model.basis(), alpha);
    const double pred = (model.evaluate(F1) - model.evaluate(F2)).l2_norm();
    return pred * pred + lambda * weighted_l1(F1, w);
}

CoefficientTree gaussian_posterior_mean(const Observation& obs, const ForwardModel& model,
                                        const PriorSpec& prior) {
    if (model.kind() != ForwardModel::Kind::Identity)
        throw UnsupportedModel("gaussian_posterior_mean: direct (identity) model only");
    if (prior.kind != PriorSpec::Kind::GaussianSobolev)
        throw InvalidInput("gaussian_posterior_mean: needs a GaussianSobolev prior");
    prior.validate();
    CoefficientTree out = obs.y;
    const double eps_sq = obs.eps * obs.eps;
    for (int k = 0; k <= out.max_level(); ++k) {
        const double sd = prior.coefficient_scale(k);
        const double v = sd * sd;
        const double shrink = v / (v + eps_sq);
        for (double& c : out.level(k)) c *= shrink;
    }
    return out;
}

} // namespace besov
