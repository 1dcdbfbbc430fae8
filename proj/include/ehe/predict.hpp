#pragma once

#include <optional>
#include <set>
#include <vector>

#include "ehe/core.hpp"
#include "ehe/mcmc.hpp"
#include "ehe/model.hpp"

namespace ehe {

/// Per-draw view of one location: covariates on the model scale plus the five
/// GP field values (kriged for new sites, read off the draw for modeled sites).
struct SimSite {
    double q = 0;
    double elev_sc = 0, lat_sc = 0;
    std::array<double, 2> f_beta0{};
    std::array<double, 2> sigma2{1.0, 1.0};  // exp(log-variance field)
    double f_phi0 = 0;
};

/// Baseline counterpart (two fields, no transition process).
struct BaselineSimSite {
    double q = 0;
    double elev_sc = 0, lat_sc = 0;
    double f_beta0 = 0;
    double sigma2 = 1;
};

SimSite sim_site_from_draw(const ParameterState& draw, const ModelData& data, std::size_t site);
BaselineSimSite baseline_sim_site_from_draw(const BaselineState& draw, const ModelData& data,
                                            std::size_t site);

/// Condition the draw's five fields on a new location (one conditional draw each).
SimSite krige_sim_site(const ParameterState& draw, const std::vector<Site>& train_sites,
                       double gp_decay, const Site& location, double q,
                       const CovariateScaling& scaling, Rng& rng);
BaselineSimSite krige_baseline_sim_site(const BaselineState& draw,
                                        const std::vector<Site>& train_sites, double gp_decay,
                                        const Site& location, double q,
                                        const CovariateScaling& scaling, Rng& rng);

/// Seasonal terms and calendar year of one simulated day.
struct SeasonalDay {
    double sin_t = 0, cos_t = 0;
    int year = 0;
    static SeasonalDay from_date(const Date& d);
};

/// Annual effect for a calendar year; 0 outside the fitted span.
double gamma_at(const ParameterState& p, int state, int year, int first_year, int n_years);

/// State-u mean at a simulated site/day.
double sim_mu(int state, const ParameterState& p, const SimSite& site, const SeasonalDay& day,
              int first_year, int n_years);
double sim_eta(const ParameterState& p, const SimSite& site, const SeasonalDay& day, double y_prev);

/// One-day-ahead exceedance probability Phi(eta) under one draw; NaN flags a
/// missing previous-day observation.
double one_day_ahead_prob(const ParameterState& p, const SimSite& site, const Date& day,
                          double y_prev);

/// One-day-ahead predictive CDF of Y_t: truncated-normal bulk below q, the
/// omega-scaled truncated tail above, mixed by Phi(eta). Continuous at q.
double one_day_ahead_cdf(double y, const ParameterState& p, const SimSite& site, const Date& day,
                         double y_prev, int first_year, int n_years, const ModelConfig& config);

/// Baseline exceedance probability: exact t tail mass above q.
double baseline_exceed_prob(const BaselineState& p, const BaselineSimSite& site, const Date& day,
                            double y_prev, int first_year, int n_years, const ModelConfig& config);

struct PredictiveSeries {
    Date start;
    std::vector<double> y;
    StateSequence u;             // u[t] = 1 exactly where y[t] >= q
    bool extended_years = false; // some annual effects came from the prior
};

/// Forward-simulate daily maxima: u_t ~ Bernoulli(Phi(eta_t)), then the matching
/// truncated emission with autoregressive centering. Years beyond the fitted
/// span get fresh N(0,1) annual effects per trajectory.
PredictiveSeries simulate_trajectory(const ParameterState& p, const SimSite& site, int first_year,
                                     int n_years, const Date& start, int n_days, double y0,
                                     const ModelConfig& config, Rng& rng);

/// State-0 mean with prior-mean annual effects; the default trajectory start y0.
double climatological_mean(const ParameterState& p, const SimSite& site, const Date& day,
                           int first_year, int n_years);

struct PredictionWindow {
    int year_start = 0;
    int year_end = 0;
    std::set<int> months{6, 7, 8};  // JJA
};

/// Misclassification error rates over observed exceedance days: marginal,
/// persistence/onset conditionals, and run-length-conditioned persistence.
/// NaN with a zero count flags an empty conditioning set.
struct ErrorRates {
    double marginal = kMissing;
    double persistence = kMissing;  // previous day at or above q
    double onset = kMissing;        // previous day below q
    std::array<double, 3> persist_run{kMissing, kMissing, kMissing};  // run already 1/2/3 days
    std::size_t n_marginal = 0, n_persistence = 0, n_onset = 0;
    std::array<std::size_t, 3> n_persist_run{};
    PredictionWindow window;
};

ErrorRates error_rates(const std::vector<ParameterState>& draws,
                       const std::vector<SimSite>& site_per_draw, const StationSeries& held_out,
                       double q, const PredictionWindow& window, int first_year, int n_years);

ErrorRates error_rates_baseline(const std::vector<BaselineState>& draws,
                                const std::vector<BaselineSimSite>& site_per_draw,
                                const StationSeries& held_out, double q,
                                const PredictionWindow& window, int first_year, int n_years,
                                const ModelConfig& config);

struct SummaryCell {
    double mean = kMissing, q05 = kMissing, q95 = kMissing;
};

struct EheSummary {
    DurationBins bins;
    std::vector<SummaryCell> duration_density;  // per bin, over trajectories with events
    std::vector<double> levels;
    std::vector<SummaryCell> exceed_avg, exceed_max;  // per level, duration >= min_duration
    SummaryCell incidence;                            // event count per trajectory
    std::size_t n_traj = 0;
    std::size_t n_traj_with_events = 0;
    std::size_t n_traj_with_long_events = 0;
    int min_duration = 3;
    bool empty = true;  // no trajectory produced an event
};

struct EheSummaryOptions {
    int n_rep = 1;
    std::uint64_t seed = 1;
    DurationBins bins = default_duration_bins();
    std::vector<double> levels = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    int min_duration = 3;
    std::optional<double> y0;  // default: climatological mean the day before start
};

/// Posterior-predictive EHE characteristics: per trajectory extract events,
/// bin durations and accumulate exceedance complement-CDFs, then report the
/// pointwise mean and 5%/95% quantiles across trajectories.
EheSummary summarize_ehe(const std::vector<ParameterState>& draws,
                         const std::vector<SimSite>& site_per_draw, int first_year, int n_years,
                         const Date& start, int n_days, const ModelConfig& config,
                         const EheSummaryOptions& options);

struct ModelComparison {
    ErrorRates two_state;
    ErrorRates baseline;
};

/// Leave-one-out harness: fits both models on the training data, kriges the
/// held-out site per retained draw, and evaluates both error-rate panels.
ModelComparison fit_baseline_and_compare(const ModelData& train, const StationSeries& held_out,
                                         double held_out_q, const ModelConfig& config,
                                         const SamplerConfig& sconfig,
                                         const PredictionWindow& window,
                                         PosteriorChain* out_chain = nullptr,
                                         BaselineChain* out_baseline_chain = nullptr);

}  // namespace ehe
