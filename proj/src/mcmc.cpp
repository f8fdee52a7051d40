#include "besov/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include "besov/errors.hpp"
#include "besov/rng.hpp"

namespace besov {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

double normal_quantile(double p) {
    // Acklam's rational approximation refined by one Newton step; good to
    // ~1e-12 over (0,1), ample for the transport map.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) * 0.39894228040143267794;
    return x - e / pdf;
}

} // namespace

double gaussian_to_laplace(double z) {
    const double p = normal_cdf(z);
    if (p < 0.5) return std::log(std::max(2.0 * p, 1e-300));
    return -std::log(std::max(2.0 * (1.0 - p), 1e-300));
}

double laplace_to_gaussian(double x) {
    const double p = x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
    return normal_quantile(std::min(std::max(p, 1e-300), 1.0 - 1e-16));
}

double batch_means_ess(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 16) return static_cast<double>(n);
    const std::size_t bs = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t nb = n / bs;
    double mean = 0.0;
    for (std::size_t i = 0; i < nb * bs; ++i) mean += trace[i];
    mean /= static_cast<double>(nb * bs);
    double var_all = 0.0;
    for (std::size_t i = 0; i < nb * bs; ++i) {
        const double d = trace[i] - mean;
        var_all += d * d;
    }
    var_all /= static_cast<double>(nb * bs - 1);
    if (var_all == 0.0) return static_cast<double>(n);
    double var_bm = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        double bm = 0.0;
        for (std::size_t i = 0; i < bs; ++i) bm += trace[b * bs + i];
        bm /= static_cast<double>(bs);
        const double d = bm - mean;
        var_bm += d * d;
    }
    var_bm /= static_cast<double>(nb - 1);
    if (var_bm == 0.0) return static_cast<double>(n);
    const double ess = static_cast<double>(nb * bs) * var_all / (static_cast<double>(bs) * var_bm);
    return std::min(ess, static_cast<double>(n));
}

void ChainConfig::validate() const {
    if (!(beta > 0.0) || !(beta <= 1.0)) throw InvalidInput("ChainConfig: beta must be in (0,1]");
    if (n_samples <= 0) throw InvalidInput("ChainConfig: n_samples must be positive");
    if (burn_in < 0) throw InvalidInput("ChainConfig: burn_in must be nonnegative");
    if (thinning < 1) throw InvalidInput("ChainConfig: thinning must be >= 1");
}

ChainOutput run_chain(const Observation& obs, const ForwardModel& model, const PriorSpec& prior,
                      const ChainConfig& cfg) {
    cfg.validate();
    prior.validate();
    const auto& basis = model.basis();
    if (prior.basis.d != basis.d || prior.basis.J != basis.J)
        throw InvalidInput("run_chain: prior and model bases disagree");
    const bool laplace = prior.kind == PriorSpec::Kind::LaplaceBesov;

    // z-coordinates of the initial tree (zero stays zero)
    CoefficientTree z(basis);
    if (cfg.init.total_size() == z.total_size() && cfg.init.dim() == basis.d) {
        for (int k = 0; k <= basis.J; ++k) {
            const double scale = prior.coefficient_scale(k);
            const auto& in = cfg.init.level(k);
            auto& zl = z.level(k);
            for (std::size_t l = 0; l < zl.size(); ++l) {
                if (scale == 0.0 || in[l] == 0.0) {
                    zl[l] = 0.0;
                } else {
                    const double u = in[l] / scale;
                    zl[l] = laplace ? laplace_to_gaussian(u) : u;
                }
            }
        }
    }

    auto to_coefficients = [&](const CoefficientTree& zt) {
        CoefficientTree c(basis);
        for (int k = 0; k <= basis.J; ++k) {
            const double scale = prior.coefficient_scale(k);
            const auto& zl = zt.level(k);
            auto& cl = c.level(k);
            for (std::size_t l = 0; l < cl.size(); ++l)
                cl[l] = scale * (laplace ? gaussian_to_laplace(zl[l]) : zl[l]);
        }
        return c;
    };

    Rng rng(derive_seed(cfg.seed, 0x6d636d63ULL));
    double beta = cfg.beta;
    double ll = log_likelihood(obs, model, to_coefficients(z));

    ChainOutput out;
    out.mean = CoefficientTree(basis);
    const int total = cfg.burn_in + cfg.n_samples;
    long accepted_post = 0, proposals_post = 0;
    int window_acc = 0, window_n = 0;
    std::size_t kept = 0;

    for (int iter = 0; iter < total; ++iter) {
        CoefficientTree zp(basis);
        const double keep = std::sqrt(1.0 - beta * beta);
        for (int k = 0; k <= basis.J; ++k) {
            const auto& zl = z.level(k);
            auto& pl = zp.level(k);
            for (std::size_t l = 0; l < pl.size(); ++l)
                pl[l] = keep * zl[l] + beta * rng.normal();
        }
        bool accept = false;
        double llp = ll;
        try {
            llp = log_likelihood(obs, model, to_coefficients(zp));
            accept = std::log(rng.uniform()) < llp - ll;
        } catch (const DomainError&) {
            accept = false; // proposal outside the admissible set
        }
        if (accept) {
            z = zp;
            ll = llp;
        }

        if (iter < cfg.burn_in) {
            window_acc += accept ? 1 : 0;
            ++window_n;
            if (cfg.adapt_beta && window_n == 50) {
                const double rate = static_cast<double>(window_acc) / window_n;
                beta = std::min(1.0, std::max(1e-4, beta * std::exp(0.6 * (rate - 0.25))));
                window_acc = 0;
                window_n = 0;
            }
            continue;
        }

        ++proposals_post;
        accepted_post += accept ? 1 : 0;
        if ((iter - cfg.burn_in) % cfg.thinning == 0) {
            auto c = to_coefficients(z);
            out.log_likelihood_trace.push_back(ll);
            if (cfg.store_samples) out.samples.push_back(c);
            ++kept;
            // running mean
            for (int k = 0; k <= basis.J; ++k) {
                auto& ml = out.mean.level(k);
                const auto& cl = c.level(k);
                for (std::size_t l = 0; l < ml.size(); ++l)
                    ml[l] += (cl[l] - ml[l]) / static_cast<double>(kept);
            }
        }
    }

    out.acceptance_rate =
        proposals_post > 0 ? static_cast<double>(accepted_post) / proposals_post : 0.0;
    out.final_beta = beta;
    out.degenerate_acceptance = out.acceptance_rate < 0.01;
    out.ess_loglik = batch_means_ess(out.log_likelihood_trace);
    return out;
}

ContractionStat posterior_contraction_stat(const ChainOutput& chain, const CoefficientTree& F0,
                                           const ForwardModel& model, double radius) {
    if (chain.samples.empty())
        throw InvalidInput("posterior_contraction_stat: chain stored no samples");
    const auto G0 = model.evaluate(F0);
    const auto f0 = model.parameter(F0);
    ContractionStat stat;
    stat.n_samples = static_cast<int>(chain.samples.size());
    int pred_out = 0, par_out = 0;
    for (const auto& c : chain.samples) {
        if ((model.evaluate(c) - G0).l2_norm() >= radius) ++pred_out;
        if ((model.parameter(c) - f0).l2_norm() >= radius) ++par_out;
    }
    stat.prediction_fraction = static_cast<double>(pred_out) / stat.n_samples;
    stat.parameter_fraction = static_cast<double>(par_out) / stat.n_samples;
    return stat;
}

} // namespace besov
