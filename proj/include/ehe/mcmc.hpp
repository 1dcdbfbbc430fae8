#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ehe/model.hpp"
#include "ehe/rng.hpp"

namespace ehe {

struct SamplerConfig {
    std::int64_t iterations = 200000;
    double burn_in = 0.5;  // fraction of iterations discarded, in [0, 1)
    int thin = 1;
    std::uint64_t seed = 1;
    int adapt_window = 50;       // Metropolis step adaptation cadence during burn-in
    double target_accept = 0.4;
    std::map<std::string, double> step_overrides;  // per-block initial step sizes

    void validate() const;
    std::int64_t n_post() const;  // iterations kept after burn-in (before thinning)
    std::int64_t n_retained() const { return n_post() / thin; }
};

struct BlockStats {
    std::string name;
    std::int64_t proposals = 0;
    std::int64_t accepts = 0;
    double step = 0;  // final (post-adaptation) step size

    double rate() const { return proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0; }
};

struct PosteriorChain {
    ParameterState init_state;
    std::vector<ParameterState> draws;  // post burn-in, thinned
    std::vector<BlockStats> acceptance;
    SamplerConfig sampler_config;
    ModelConfig model_config;
    std::vector<std::string> station_ids;
    int first_year = 0;
    int n_years = 0;
};

/// Latent probit variables, one per modeled transition in site-major term order.
struct ProbitAugmentation {
    std::vector<double> z;  // z >= 0 exactly where u == 1
};

/// One elliptical-slice transition for a block x with zero-mean Gaussian prior.
/// prior_draw must fill its argument with one prior sample. Returns the new
/// log-likelihood (loglik(x) on entry must equal current_loglik).
double ess_step(std::vector<double>& x,
                const std::function<void(Rng&, std::vector<double>&)>& prior_draw,
                const std::function<double(const std::vector<double>&)>& loglik,
                double current_loglik, Rng& rng);

/// ess_step specialization for a field with prior N(0, L L^T).
double update_gp_field(std::vector<double>& values, const Eigen::MatrixXd& chol_lower,
                       const std::function<double(const std::vector<double>&)>& loglik,
                       double current_loglik, Rng& rng);

/// Gibbs sweep of the transition block: redraw latents z | phi, draw the phi
/// coefficients from their conjugate Gaussian conditional, one elliptical-slice
/// move on the phi0 field, conjugate draw of its tau2.
ProbitAugmentation update_probit_block(ParameterState& p, const ModelData& data,
                                       const ModelConfig& config, Rng& rng);

/// Random-walk Metropolis on log omega against the truncation-aware conditional;
/// the inverse-gamma conjugacy only holds without truncation, so this block
/// corrects for the truncated-normal normalizers. Returns acceptance.
bool update_omega(ParameterState& p, const ModelData& data, const ModelConfig& config,
                  double log_step, Rng& rng);

/// Data-driven starting point: coefficients at 0, rho at 0.5, fields at 0,
/// per-site empirical state-split variances, omega at 1.
ParameterState initial_state(const ModelData& data, const ModelConfig& config);

/// Metropolis-within-Gibbs sampler for the two-state model.
PosteriorChain fit(const ModelData& data, const ModelConfig& config, const SamplerConfig& sconfig);

// --- Baseline (single-state t AR(1)) ---------------------------------------

struct BaselineChain {
    BaselineState init_state;
    std::vector<BaselineState> draws;
    std::vector<BlockStats> acceptance;
    SamplerConfig sampler_config;
    ModelConfig model_config;
    std::vector<std::string> station_ids;
    int first_year = 0;
    int n_years = 0;
};

BaselineState initial_baseline_state(const ModelData& data, const ModelConfig& config);
BaselineChain fit_baseline(const ModelData& data, const ModelConfig& config,
                           const SamplerConfig& sconfig);

// --- Chain summaries ---------------------------------------------------------

/// Names of the flattened scalar view of a ParameterState, in storage order.
std::vector<std::string> parameter_names(int n_years, const std::vector<std::string>& station_ids);
std::vector<double> parameter_values(const ParameterState& p);

std::vector<std::string> baseline_parameter_names(int n_years,
                                                  const std::vector<std::string>& station_ids);
std::vector<double> baseline_parameter_values(const BaselineState& p);

struct ParamSummary {
    std::string name;
    double mean = 0, sd = 0, q05 = 0, q95 = 0;
    double ess = 0;   // autocorrelation-based effective sample size
    double rhat = 0;  // split-Rhat; NaN when the draw is constant
};

struct Diagnostics {
    std::vector<ParamSummary> params;
    std::vector<BlockStats> acceptance;
};

Diagnostics diagnostics(const PosteriorChain& chain);

/// Summary machinery on a raw draw matrix (rows = draws); reused by tests.
ParamSummary summarize_scalar(const std::string& name, const std::vector<double>& draws);

}  // namespace ehe
