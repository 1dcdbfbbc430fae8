#include "ehe/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "ehe/dist.hpp"

namespace ehe {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}

void CovariateScaling::validate() const {
    if (!(elev_scale > 0.0) || !(lat_scale > 0.0))
        throw std::invalid_argument("covariate scales must be positive");
}

void ParameterState::validate(int n_sites, int n_years) const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw std::runtime_error(std::string("parameter state invariant violated: ") + what);
    };
    for (int u = 0; u < 2; ++u) {
        check(std::abs(rho[u]) < 1.0, "|rho| < 1");
        check(gamma[u].size() == static_cast<std::size_t>(n_years), "gamma length");
        check(gamma[u].empty() || gamma[u][0] == 0.0, "first-year gamma pinned to 0");
        check(f_beta0[u].size() == static_cast<std::size_t>(n_sites), "beta0 field length");
        check(f_logvar[u].size() == static_cast<std::size_t>(n_sites), "logvar field length");
        for (double v : f_logvar[u]) check(std::isfinite(v), "log sigma^2 finite");
        check(tau2_beta0[u] > 0.0 && tau2_logvar[u] > 0.0, "tau2 positive");
    }
    check(f_phi0.size() == static_cast<std::size_t>(n_sites), "phi0 field length");
    check(tau2_phi0 > 0.0, "tau2 positive");
    check(omega > 0.0, "omega positive");
}

std::vector<Site> ModelData::site_coords() const {
    std::vector<Site> out;
    out.reserve(sites.size());
    for (const auto& s : sites)
        out.push_back({s.station.longitude, s.station.latitude, s.station.elevation});
    return out;
}

std::size_t ModelData::n_terms() const {
    std::size_t n = 0;
    for (const auto& s : sites) n += s.terms.size();
    return n;
}

ModelData prepare_data(const std::vector<StationSeries>& series,
                       const std::vector<Threshold>& thresholds, const ModelConfig& config) {
    if (series.empty()) throw std::invalid_argument("no station series supplied");
    config.scaling.validate();

    std::map<std::string, const Threshold*> thr;
    for (const auto& t : thresholds) thr[t.station_id] = &t;

    ModelData data;
    data.scaling = config.scaling;
    if (std::isnan(data.scaling.lat_offset)) {
        double lo = series.front().station.latitude, hi = lo;
        for (const auto& s : series) {
            lo = std::min(lo, s.station.latitude);
            hi = std::max(hi, s.station.latitude);
        }
        data.scaling.lat_offset = 0.5 * (lo + hi);
    }

    int first_year = series.front().start_date.year;
    int last_year = first_year;
    std::map<std::string, int> seen;
    for (const auto& s : series) {
        s.station.validate();
        if (s.tmax.empty()) throw std::invalid_argument("station " + s.station.id + ": empty series");
        if (++seen[s.station.id] > 1)
            throw std::invalid_argument("duplicate station id '" + s.station.id + "'");
        first_year = std::min(first_year, s.start_date.year);
        last_year = std::max(last_year, s.date_at(s.size() - 1).year);
    }
    data.first_year = first_year;
    data.n_years = last_year - first_year + 1;

    for (const auto& s : series) {
        auto it = thr.find(s.station.id);
        if (it == thr.end())
            throw std::invalid_argument("no threshold for station '" + s.station.id + "'");
        SiteData site;
        site.station = s.station;
        site.q = it->second->q;
        site.elev_sc = data.scaling.scale_elev(s.station.elevation);
        site.lat_sc = data.scaling.scale_lat(s.station.latitude);
        site.start_date = s.start_date;
        site.y = s.tmax;

        const std::size_t n = s.size();
        site.u.assign(n, kStateMissing);
        site.season_sin.resize(n);
        site.season_cos.resize(n);
        site.year_idx.resize(n);
        std::int64_t serial = to_serial(s.start_date);
        for (std::size_t i = 0; i < n; ++i, ++serial) {
            const Date d = from_serial(serial);
            const double len = year_length(d.year);
            const double angle = 2.0 * std::numbers::pi * day_of_year(d) / len;
            site.season_sin[i] = std::sin(angle);
            site.season_cos[i] = std::cos(angle);
            site.year_idx[i] = d.year - first_year + 1;
            if (!is_missing(site.y[i]))
                site.u[i] = (config.exceed_on_equal ? site.y[i] >= site.q : site.y[i] > site.q)
                                ? kStateAbove
                                : kStateBelow;
        }

        for (std::size_t t = 1; t < n; ++t)
            if (!is_missing(site.y[t]) && !is_missing(site.y[t - 1]))
                site.terms.push_back(static_cast<int>(t));
        for (int t : site.terms) site.state_terms[site.u[t]].push_back(t);

        auto build_slices = [&](const std::vector<int>& list) {
            std::vector<std::pair<int, int>> slices(data.n_years, {0, 0});
            std::vector<bool> touched(data.n_years, false);
            for (std::size_t i = 0; i < list.size(); ++i) {
                const int t = list[i];
                for (int k : {site.year_idx[t - 1] - 1, site.year_idx[t] - 1}) {
                    if (!touched[k]) {
                        slices[k] = {static_cast<int>(i), static_cast<int>(i) + 1};
                        touched[k] = true;
                    } else {
                        slices[k].second = static_cast<int>(i) + 1;
                    }
                }
            }
            return slices;
        };
        site.year_slices[0] = build_slices(site.state_terms[0]);
        site.year_slices[1] = build_slices(site.state_terms[1]);
        site.term_year_slices = build_slices(site.terms);

        data.sites.push_back(std::move(site));
    }

    const auto coords = data.site_coords();
    data.corr = build_corr(coords, config.gp_decay());
    data.corr_chol = jittered_cholesky(data.corr);
    const auto n = data.corr.rows();
    data.corr_inv = data.corr_chol.transpose().triangularView<Eigen::Upper>().solve(
        data.corr_chol.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)));
    return data;
}

// ---------------------------------------------------------------------------
// Mean structure / transition predictor
// ---------------------------------------------------------------------------

double mu(int state, const SiteData& site, int t, const ParameterState& p, std::size_t site_index) {
    return p.beta0[state] + p.f_beta0[state][site_index] + p.gamma[state][site.year_idx[t] - 1] +
           p.beta_elev[state] * site.elev_sc + p.beta_lat[state] * site.lat_sc +
           p.lambda1 * site.season_sin[t] + p.lambda2 * site.season_cos[t];
}

double ar_center(int state, const SiteData& site, int t, double y_prev, const ParameterState& p,
                 std::size_t site_index, const ModelConfig& config) {
    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    return mu(state, site, t, p, site_index) +
           sign * p.rho[state] * (y_prev - mu(state, site, t - 1, p, site_index));
}

double eta(const SiteData& site, int t, double y_prev, const ParameterState& p,
           std::size_t site_index) {
    const double d = y_prev - site.q;
    return p.phi[0] + p.f_phi0[site_index] + p.phi[1] * d + p.phi[2] * (d >= 0.0 ? d : 0.0) +
           p.phi[3] * site.season_sin[t] + p.phi[4] * site.season_cos[t];
}

double transition_prob(const SiteData& site, int t, double y_prev, const ParameterState& p,
                       std::size_t site_index) {
    return norm_cdf(eta(site, t, y_prev, p, site_index));
}

// ---------------------------------------------------------------------------
// Likelihood kernels
// ---------------------------------------------------------------------------

namespace {

// State-u truncated-normal emission sum over state_terms[state][lo, hi).
double emission_site_sum(const SiteData& site, const ParameterState& p, const ModelConfig& config,
                         int state, std::size_t site_index, int lo, int hi) {
    const auto& terms = site.state_terms[state];
    const double site_const = p.beta0[state] + p.f_beta0[state][site_index] +
                              p.beta_elev[state] * site.elev_sc + p.beta_lat[state] * site.lat_sc;
    const double var = state == kAbove ? p.omega * p.sigma2(kAbove, site_index)
                                       : p.sigma2(kBelow, site_index);
    const double sd = std::sqrt(var);
    const double log_sd = 0.5 * std::log(var);
    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    const double rho = sign * p.rho[state];
    const auto& gam = p.gamma[state];

    double sum = 0.0;
    for (int i = lo; i < hi; ++i) {
        const int t = terms[i];
        const double mu_t = site_const + gam[site.year_idx[t] - 1] +
                            p.lambda1 * site.season_sin[t] + p.lambda2 * site.season_cos[t];
        const double mu_prev = site_const + gam[site.year_idx[t - 1] - 1] +
                               p.lambda1 * site.season_sin[t - 1] + p.lambda2 * site.season_cos[t - 1];
        const double center = mu_t + rho * (site.y[t - 1] - mu_prev);
        const double z = (site.y[t] - center) / sd;
        // Normalizer: Phi((q-center)/sd) below, 1 - Phi((q-center)/sd) above.
        const double zq = (site.q - center) / sd;
        const double log_norm = state == kBelow ? norm_logcdf(zq) : norm_logcdf(-zq);
        sum += -0.5 * z * z - log_sd - kLogSqrt2Pi - log_norm;
    }
    return sum;
}

double binary_site_sum(const SiteData& site, const ParameterState& p, std::size_t site_index,
                       int lo, int hi) {
    const double site_const = p.phi[0] + p.f_phi0[site_index];
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) {
        const int t = site.terms[i];
        const double d = site.y[t - 1] - site.q;
        const double e = site_const + p.phi[1] * d + p.phi[2] * (d >= 0.0 ? d : 0.0) +
                         p.phi[3] * site.season_sin[t] + p.phi[4] * site.season_cos[t];
        sum += site.u[t] == kStateAbove ? norm_logcdf(e) : norm_logcdf(-e);
    }
    return sum;
}

double site_total(const ModelData& data, const ParameterState& p, const ModelConfig& config,
                  std::size_t s) {
    const auto& site = data.sites[s];
    return emission_site_sum(site, p, config, kBelow, s, 0,
                             static_cast<int>(site.state_terms[0].size())) +
           emission_site_sum(site, p, config, kAbove, s, 0,
                             static_cast<int>(site.state_terms[1].size())) +
           binary_site_sum(site, p, s, 0, static_cast<int>(site.terms.size()));
}

double baseline_site_sum(const SiteData& site, const BaselineState& p, const ModelConfig& config,
                         std::size_t site_index, int lo, int hi) {
    const double site_const = p.beta0 + p.f_beta0[site_index] + p.beta_elev * site.elev_sc +
                              p.beta_lat * site.lat_sc;
    const double sd = std::exp(0.5 * p.f_logvar[site_index]);
    const double log_sd = 0.5 * p.f_logvar[site_index];
    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    const double rho = sign * p.rho;
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) {
        const int t = site.terms[i];
        const double mu_t = site_const + p.gamma[site.year_idx[t] - 1] +
                            p.lambda1 * site.season_sin[t] + p.lambda2 * site.season_cos[t];
        const double mu_prev = site_const + p.gamma[site.year_idx[t - 1] - 1] +
                               p.lambda1 * site.season_sin[t - 1] + p.lambda2 * site.season_cos[t - 1];
        const double z = (site.y[t] - mu_t - rho * (site.y[t - 1] - mu_prev)) / sd;
        sum += t_logpdf(z, config.nu) - log_sd;
    }
    return sum;
}

template <typename PerSite>
double reduce_over_sites(std::size_t n_sites, bool parallel, PerSite&& per_site) {
    std::vector<double> partial(n_sites);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t s = 0; s < n_sites; ++s) partial[s] = per_site(s);
    } else {
        for (std::size_t s = 0; s < n_sites; ++s) partial[s] = per_site(s);
    }
    double total = 0.0;  // fixed site order keeps the reduction bitwise reproducible
    for (double v : partial) total += v;
    return total;
}

}  // namespace

double loglik_two_state(const ModelData& data, const ParameterState& p, const ModelConfig& config) {
    return reduce_over_sites(data.n_sites(), true,
                             [&](std::size_t s) { return site_total(data, p, config, s); });
}

double loglik_two_state_serial(const ModelData& data, const ParameterState& p,
                               const ModelConfig& config) {
    return reduce_over_sites(data.n_sites(), false,
                             [&](std::size_t s) { return site_total(data, p, config, s); });
}

double loglik_emission(const ModelData& data, const ParameterState& p, const ModelConfig& config,
                       int state) {
    return reduce_over_sites(data.n_sites(), true, [&](std::size_t s) {
        const auto& site = data.sites[s];
        return emission_site_sum(site, p, config, state, s, 0,
                                 static_cast<int>(site.state_terms[state].size()));
    });
}

double loglik_emission_year(const ModelData& data, const ParameterState& p,
                            const ModelConfig& config, int state, int year_1based) {
    return reduce_over_sites(data.n_sites(), false, [&](std::size_t s) {
        const auto& site = data.sites[s];
        const auto [lo, hi] = site.year_slices[state][year_1based - 1];
        return emission_site_sum(site, p, config, state, s, lo, hi);
    });
}

double loglik_binary(const ModelData& data, const ParameterState& p) {
    return reduce_over_sites(data.n_sites(), true, [&](std::size_t s) {
        const auto& site = data.sites[s];
        return binary_site_sum(site, p, s, 0, static_cast<int>(site.terms.size()));
    });
}

double mu_baseline(const SiteData& site, int t, const BaselineState& p, std::size_t site_index) {
    return p.beta0 + p.f_beta0[site_index] + p.gamma[site.year_idx[t] - 1] +
           p.beta_elev * site.elev_sc + p.beta_lat * site.lat_sc +
           p.lambda1 * site.season_sin[t] + p.lambda2 * site.season_cos[t];
}

double loglik_single_state(const ModelData& data, const BaselineState& p,
                           const ModelConfig& config) {
    return reduce_over_sites(data.n_sites(), true, [&](std::size_t s) {
        const auto& site = data.sites[s];
        return baseline_site_sum(site, p, config, s, 0, static_cast<int>(site.terms.size()));
    });
}

double loglik_single_state_serial(const ModelData& data, const BaselineState& p,
                                  const ModelConfig& config) {
    return reduce_over_sites(data.n_sites(), false, [&](std::size_t s) {
        const auto& site = data.sites[s];
        return baseline_site_sum(site, p, config, s, 0, static_cast<int>(site.terms.size()));
    });
}

double loglik_single_state_year(const ModelData& data, const BaselineState& p,
                                const ModelConfig& config, int year_1based) {
    return reduce_over_sites(data.n_sites(), false, [&](std::size_t s) {
        const auto& site = data.sites[s];
        const auto [lo, hi] = site.term_year_slices[year_1based - 1];
        return baseline_site_sum(site, p, config, s, lo, hi);
    });
}

}  // namespace ehe
