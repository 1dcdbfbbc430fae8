#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ehe/core.hpp"
#include "ehe/spatial.hpp"

namespace ehe {

/// Linear rescaling applied to the mean-function covariates:
/// scaled = (raw - offset) / scale. Defaults put elevation in km and latitude
/// in tenths of a degree about the domain midpoint.
struct CovariateScaling {
    double elev_offset = 0;
    double elev_scale = 1000;                 // meters per unit
    double lat_offset = kMissingLatOffset;    // NaN = resolve to the site midpoint at assembly
    double lat_scale = 10;                    // degrees per unit

    static constexpr double kMissingLatOffset = std::numeric_limits<double>::quiet_NaN();

    double scale_elev(double elev_m) const { return (elev_m - elev_offset) / elev_scale; }
    double scale_lat(double lat_deg) const { return (lat_deg - lat_offset) / lat_scale; }
    void validate() const;
};

struct ModelConfig {
    double nu = 3;                     // t degrees of freedom, fixed
    double effective_range_km = 400;   // shared by all five GP fields
    double coef_prior_sd = 100;        // betas, lambdas, phis
    double annual_prior_sd = 1;        // annual random effects
    double var_prior_shape = 2;        // InvGamma(2,2) on GP variances
    double var_prior_rate = 2;
    double hypermean_prior_sd = 1;     // N(0,1) on log-variance field means
    bool exceed_on_equal = true;       // tmax == q counts as state 1
    bool ar_sign_literal = false;      // keep the printed minus sign of the AR centering
    CovariateScaling scaling;

    double gp_decay() const { return 3.0 / effective_range_km; }
};

inline constexpr int kBelow = 0;
inline constexpr int kAbove = 1;

/// One full posterior draw. Spatial fields are stored at the modeled sites in
/// site order; log-variance fields hold the full field value (hypermean included),
/// intercept fields are zero-mean deviations.
struct ParameterState {
    std::array<double, 2> beta0{};      // global intercepts, deg C
    std::array<double, 2> beta_elev{};
    std::array<double, 2> beta_lat{};
    double lambda1 = 0, lambda2 = 0;    // shared seasonal pair
    std::array<double, 2> rho{};        // in (-1, 1)
    std::array<std::vector<double>, 2> gamma;      // annual effects, [0] pinned to 0
    std::array<std::vector<double>, 2> f_beta0;    // local intercept fields (zero mean)
    std::array<std::vector<double>, 2> f_logvar;   // log sigma^2(s), full value
    std::array<double, 2> logvar_mean{};           // hypermeans of the log-variance fields
    std::vector<double> f_phi0;                    // transition intercept field (zero mean)
    std::array<double, 2> tau2_beta0{1.0, 1.0};
    std::array<double, 2> tau2_logvar{1.0, 1.0};
    double tau2_phi0 = 1;
    std::array<double, 5> phi{};        // transition coefficients phi0..phi4
    double omega = 1;                   // t scale-mixture augmentation

    double sigma2(int state, std::size_t site) const { return std::exp(f_logvar[state][site]); }
    void validate(int n_sites, int n_years) const;  // throws on invariant violation
};

/// Per-site data prepared for likelihood evaluation. Day arrays run over the
/// series; term arrays index days t with y[t] and y[t-1] both observed.
struct SiteData {
    Station station;
    double q = 0;
    double elev_sc = 0, lat_sc = 0;
    Date start_date;
    std::vector<double> y;
    StateSequence u;
    std::vector<double> season_sin, season_cos;  // sin/cos(2 pi doy / L) per day
    std::vector<int> year_idx;                   // 1-based within the dataset span
    std::vector<int> terms;                      // modeled transition days
    std::array<std::vector<int>, 2> state_terms; // terms split by u[t]
    // Half-open slices of state_terms[u] touching each year (via t or t-1).
    std::array<std::vector<std::pair<int, int>>, 2> year_slices;
    std::vector<std::pair<int, int>> term_year_slices;  // same for the full term list
};

struct ModelData {
    std::vector<SiteData> sites;
    int first_year = 0;
    int n_years = 0;
    CovariateScaling scaling;          // resolved offsets
    Eigen::MatrixXd corr;              // shared GP correlation matrix
    Eigen::MatrixXd corr_chol;         // lower Cholesky of corr
    Eigen::MatrixXd corr_inv;

    std::size_t n_sites() const { return sites.size(); }
    std::vector<Site> site_coords() const;
    std::size_t n_terms() const;
};

/// Assemble aligned per-site arrays, derive states, resolve covariate scaling
/// (latitude midpoint) and precompute the GP correlation factors.
ModelData prepare_data(const std::vector<StationSeries>& series,
                       const std::vector<Threshold>& thresholds, const ModelConfig& config);

// --- Mean structure and transition predictor -------------------------------

/// State-u mean at day t of a site (Eq.-(4)-shaped linear predictor).
double mu(int state, const SiteData& site, int t, const ParameterState& p, std::size_t site_index);

/// Autoregressive centering mu_t + rho (y_prev - mu_prev); the literal-sign
/// config switch flips the rho term.
double ar_center(int state, const SiteData& site, int t, double y_prev, const ParameterState& p,
                 std::size_t site_index, const ModelConfig& config);

/// Transition predictor eta_t(s): threshold-centered previous-day temperature
/// with a slope adjustment above the threshold, plus seasonal terms.
double eta(const SiteData& site, int t, double y_prev, const ParameterState& p,
           std::size_t site_index);

/// P(U_t = 1 | y_prev) = Phi(eta).
double transition_prob(const SiteData& site, int t, double y_prev, const ParameterState& p,
                       std::size_t site_index);

// --- Log-likelihoods --------------------------------------------------------

/// Joint log-likelihood of states and temperatures given omega: Bernoulli terms
/// through the probit link plus truncated-normal emissions per state (state 1
/// with variance omega*sigma^2). OpenMP across sites, fixed-order reduction.
double loglik_two_state(const ModelData& data, const ParameterState& p, const ModelConfig& config);
double loglik_two_state_serial(const ModelData& data, const ParameterState& p,
                               const ModelConfig& config);

/// Emission-only partial sums used by the sampler blocks.
double loglik_emission(const ModelData& data, const ParameterState& p, const ModelConfig& config,
                       int state);
double loglik_emission_year(const ModelData& data, const ParameterState& p,
                            const ModelConfig& config, int state, int year_1based);
double loglik_binary(const ModelData& data, const ParameterState& p);

/// Single-state AR(1) baseline with untruncated t errors and spatially varying
/// variance; the comparison model of the validation harness.
struct BaselineState {
    double beta0 = 0, beta_elev = 0, beta_lat = 0;
    double lambda1 = 0, lambda2 = 0;
    double rho = 0;
    std::vector<double> gamma;     // [0] pinned to 0
    std::vector<double> f_beta0;   // zero-mean local intercepts
    std::vector<double> f_logvar;  // log sigma^2(s), full value
    double logvar_mean = 0;
    double tau2_beta0 = 1, tau2_logvar = 1;

    double sigma2(std::size_t site) const { return std::exp(f_logvar[site]); }
};

double mu_baseline(const SiteData& site, int t, const BaselineState& p, std::size_t site_index);
double loglik_single_state(const ModelData& data, const BaselineState& p, const ModelConfig& config);
double loglik_single_state_serial(const ModelData& data, const BaselineState& p,
                                  const ModelConfig& config);
double loglik_single_state_year(const ModelData& data, const BaselineState& p,
                                const ModelConfig& config, int year_1based);

}  // namespace ehe
