// besovlab: numerical laboratory for Bayesian inverse problems with
// Besov-Laplace priors.  Subcommands: simulate, map, sample, rates,
// compare-priors, exponents.  Exit codes: 0 success, 2 configuration
// error, 3 numerical failure.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "besov/config.hpp"
#include "besov/mcmc.hpp"
#include "besov/rng.hpp"

using namespace besov;

namespace {

struct Problem {
    SweepConfig sweep;
    WaveletBasis basis;
    ForwardModel model;
    CoefficientTree truth;
};

Problem build_problem(const std::string& config_path, int J_override) {
    auto cfg = Config::from_file(config_path);
    auto sweep = sweep_config_from(cfg);
    const int J = J_override > 0 ? J_override : sweep.base_J;
    WaveletBasis basis{sweep.family, sweep.d, J};
    ForwardModel model = [&] {
        switch (sweep.model) {
            case ForwardModel::Kind::Identity: return ForwardModel::identity(basis);
            case ForwardModel::Kind::LinearSmoothing:
                return ForwardModel::linear_smoothing(basis, 1);
            case ForwardModel::Kind::Darcy:
                return ForwardModel::darcy(basis, LinkFunction::exponential(sweep.link_k_min),
                                           CutoffSpec{}, sweep.darcy_source, sweep.link_k_min);
            case ForwardModel::Kind::Schroedinger:
                return ForwardModel::schroedinger(basis, LinkFunction::exponential(0.0),
                                                  CutoffSpec{}, sweep.schro_boundary);
        }
        throw ConfigError("unknown model kind");
    }();
    auto truth = make_truth(sweep.truth, basis);
    return Problem{std::move(sweep), basis, std::move(model), std::move(truth)};
}

void print_fit(const char* label, const RateFit& fit) {
    std::printf("%s: slope %.4f (se %.4f), theoretical %.4f  [%s]\n", label, fit.slope,
                fit.stderr_slope, fit.theoretical, fit.exponent_source.c_str());
}

int run_exponents(const std::string& model, int alpha, int d, int kappa, int p) {
    const auto kind = model_kind_from_name(model);
    const auto expo = theoretical_exponents(kind, alpha, d, kappa, p);
    std::printf("delta exponent: %s = %.6f\n", expo.delta.str().c_str(), expo.delta.value());
    if (expo.theta)
        std::printf("theta:          %s = %.6f\n", expo.theta->str().c_str(),
                    expo.theta->value());
    if (expo.linear_rate)
        std::printf("linear rate l:  %s = %.6f\n", expo.linear_rate->str().c_str(),
                    expo.linear_rate->value());
    if (expo.minimax_rate)
        std::printf("minimax rate m: %s = %.6f\n", expo.minimax_rate->str().c_str(),
                    expo.minimax_rate->value());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"besovlab: Besov-Laplace prior inverse-problem laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    double eps = 0.01;
    std::uint64_t seed = 1;
    int J_override = 0;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "key = value config file")->required();
        sub->add_option("--eps", eps, "noise level");
        sub->add_option("--seed", seed, "rng seed");
        sub->add_option("-J,--resolution", J_override, "override base_J");
        if (needs_out) sub->add_option("--out", out_path, "output file");
    };

    auto* sim = app.add_subcommand("simulate", "simulate a white-noise observation");
    add_common(sim, true);

    auto* map_cmd = app.add_subcommand("map", "penalized least squares (MAP) estimate");
    add_common(map_cmd, true);
    double lambda_override = 0.0;
    map_cmd->add_option("--lambda", lambda_override, "override lambda (default C * delta^2)");

    auto* sample = app.add_subcommand("sample", "pCN posterior sampling");
    add_common(sample, true);
    int n_samples = 4000, burn_in = 1000, thinning = 1;
    double beta = 0.2;
    sample->add_option("--n", n_samples, "post burn-in samples");
    sample->add_option("--burn", burn_in, "burn-in iterations");
    sample->add_option("--beta", beta, "pCN step");
    sample->add_option("--thin", thinning, "thinning stride");

    auto* rates_cmd = app.add_subcommand("rates", "rate sweep over the eps grid");
    rates_cmd->add_option("--config", config_path, "key = value config file")->required();

    auto* cmp = app.add_subcommand("compare-priors", "Laplace MAP vs tuned Gaussian linear");
    cmp->add_option("--config", config_path, "key = value config file")->required();

    auto* expo_cmd = app.add_subcommand("exponents", "exact theoretical rate exponents");
    std::string expo_model = "identity";
    int expo_alpha = 2, expo_d = 1, expo_kappa = 0, expo_p = 1;
    expo_cmd->add_option("--model", expo_model, "identity|smoothing|darcy|schroedinger");
    expo_cmd->add_option("--alpha", expo_alpha, "prior smoothness");
    expo_cmd->add_option("--d", expo_d, "dimension");
    expo_cmd->add_option("--kappa", expo_kappa, "smoothing degree (smoothing model)");
    expo_cmd->add_option("--p", expo_p, "Besov integrability for l/m rates");

    CLI11_PARSE(app, argc, argv);

    try {
        if (expo_cmd->parsed()) return run_exponents(expo_model, expo_alpha, expo_d, expo_kappa, expo_p);

        if (sim->parsed()) {
            auto prob = build_problem(config_path, J_override);
            auto obs = simulate(prob.model, prob.truth, eps, seed);
            if (out_path.empty()) {
                write_observation_csv(std::cout, obs);
            } else {
                std::ofstream out(out_path);
                if (!out) throw ConfigError("cannot open " + out_path);
                write_observation_csv(out, obs);
                std::printf("wrote %s (eps = %g, seed = %llu)\n", out_path.c_str(), eps,
                            static_cast<unsigned long long>(seed));
            }
            return 0;
        }

        if (map_cmd->parsed()) {
            auto prob = build_problem(config_path, J_override);
            auto obs = simulate(prob.model, prob.truth, eps, seed);
            const int kappa = prob.model.model_kappa();
            const auto scaling = rescaling(eps, prob.sweep.alpha, kappa, prob.sweep.d);
            PlsConfig pls;
            pls.lambda = lambda_override > 0.0
                             ? lambda_override
                             : prob.sweep.lambda_scale * scaling.delta * scaling.delta;
            pls.alpha = prob.sweep.alpha;
            pls.max_iters = prob.sweep.map_max_iters;
            pls.tol = prob.sweep.map_tol;
            std::vector<CoefficientTree> inits;
            inits.emplace_back(prob.basis);
            if (prob.sweep.model != ForwardModel::Kind::Identity) {
                PriorSpec draw{PriorSpec::Kind::LaplaceBesov, prob.sweep.alpha, scaling.rho,
                               CutoffSpec::none(), prob.basis};
                inits.push_back(sample_prior(draw, derive_seed(seed, 0xdeadULL)));
            }
            auto report = solve_map_best(obs, prob.model, pls, inits);
            const double err_pred =
                (prob.model.evaluate(report.F_hat) - prob.model.evaluate(prob.truth)).l2_norm();
            const double err_param =
                (prob.model.parameter(report.F_hat) - prob.model.parameter(prob.truth)).l2_norm();
            const double tau = tau_lambda_sq(report.F_hat, prob.truth, prob.model, pls.lambda,
                                             pls.alpha);
            std::printf("objective %.10g, iterations %d, converged %s\n", report.objective,
                        report.iterations, report.converged ? "yes" : "no");
            std::printf("err_pred %.6g, err_param %.6g, tau_lambda_sq %.6g, lambda %.6g\n",
                        err_pred, err_param, tau, pls.lambda);
            if (!out_path.empty()) {
                Observation dump{report.F_hat, eps, seed};
                std::ofstream out(out_path);
                if (!out) throw ConfigError("cannot open " + out_path);
                write_observation_csv(out, dump);
            }
            return 0;
        }

        if (sample->parsed()) {
            auto prob = build_problem(config_path, J_override);
            auto obs = simulate(prob.model, prob.truth, eps, seed);
            const int kappa = prob.model.model_kappa();
            const auto scaling = rescaling(eps, prob.sweep.alpha, kappa, prob.sweep.d);
            PriorSpec prior;
            prior.kind = prob.sweep.prior;
            prior.alpha = prob.sweep.alpha;
            prior.rho = scaling.rho;
            prior.cutoff = CutoffSpec::none();
            prior.basis = prob.basis;
            ChainConfig chain;
            chain.n_samples = n_samples;
            chain.burn_in = burn_in;
            chain.beta = beta;
            chain.thinning = thinning;
            chain.seed = seed;
            chain.init = CoefficientTree(prob.basis);
            auto outcome = run_chain(obs, prob.model, prior, chain);
            std::printf("acceptance %.3f, final beta %.4f, ESS(loglik) %.1f%s\n",
                        outcome.acceptance_rate, outcome.final_beta, outcome.ess_loglik,
                        outcome.degenerate_acceptance ? "  [degenerate acceptance]" : "");
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out) throw ConfigError("cannot open " + out_path);
                out << "iteration,log_likelihood,err_pred,err_param\n";
                const auto G0 = prob.model.evaluate(prob.truth);
                const auto f0 = prob.model.parameter(prob.truth);
                char buf[256];
                for (std::size_t i = 0; i < outcome.samples.size(); ++i) {
                    const auto& c = outcome.samples[i];
                    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g\n", i * chain.thinning,
                                  outcome.log_likelihood_trace[i],
                                  (prob.model.evaluate(c) - G0).l2_norm(),
                                  (prob.model.parameter(c) - f0).l2_norm());
                    out << buf;
                }
                std::printf("wrote %s\n", out_path.c_str());
            }
            return 0;
        }

        if (rates_cmd->parsed()) {
            auto sweep = sweep_config_from(Config::from_file(config_path));
            auto result = run_rate_sweep(sweep);
            std::printf("sweep: %zu eps values x %d replicates, bias ratio %.3f\n",
                        result.eps.size(), sweep.replicates, result.bias_check_ratio);
            print_fit("prediction error", result.fit_pred);
            print_fit("parameter error ", result.fit_param);
            if (!sweep.out_dir.empty()) std::printf("records in %s\n", sweep.out_dir.c_str());
            return 0;
        }

        if (cmp->parsed()) {
            auto sweep = sweep_config_from(Config::from_file(config_path));
            auto report = compare_priors(sweep);
            print_fit("laplace map      ", report.laplace.fit_pred);
            print_fit("gaussian linear  ", report.gaussian.fit_pred);
            std::printf("slope gap %.4f, bootstrap 95%% CI [%.4f, %.4f], theoretical %.4f\n",
                        report.gap, report.gap_ci_low, report.gap_ci_high,
                        report.theoretical_gap);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
