#include "ehe/predict.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "ehe/dist.hpp"

namespace ehe {

SimSite sim_site_from_draw(const ParameterState& draw, const ModelData& data, std::size_t site) {
    SimSite s;
    const auto& sd = data.sites[site];
    s.q = sd.q;
    s.elev_sc = sd.elev_sc;
    s.lat_sc = sd.lat_sc;
    for (int u = 0; u < 2; ++u) {
        s.f_beta0[u] = draw.f_beta0[u][site];
        s.sigma2[u] = draw.sigma2(u, site);
    }
    s.f_phi0 = draw.f_phi0[site];
    return s;
}

BaselineSimSite baseline_sim_site_from_draw(const BaselineState& draw, const ModelData& data,
                                            std::size_t site) {
    BaselineSimSite s;
    const auto& sd = data.sites[site];
    s.q = sd.q;
    s.elev_sc = sd.elev_sc;
    s.lat_sc = sd.lat_sc;
    s.f_beta0 = draw.f_beta0[site];
    s.sigma2 = draw.sigma2(site);
    return s;
}

namespace {

double krige_one(const std::vector<Site>& train_sites, const std::vector<double>& values,
                 double tau2, double decay, double mean, const Site& location, Rng& rng) {
    SpatialField f;
    f.sites = train_sites;
    f.values = values;
    f.hyper = GpHyper{tau2, decay, mean};
    return krige(f, {location}, rng)[0];
}

}  // namespace

SimSite krige_sim_site(const ParameterState& draw, const std::vector<Site>& train_sites,
                       double gp_decay, const Site& location, double q,
                       const CovariateScaling& scaling, Rng& rng) {
    SimSite s;
    s.q = q;
    s.elev_sc = scaling.scale_elev(location.elevation);
    s.lat_sc = scaling.scale_lat(location.latitude);
    for (int u = 0; u < 2; ++u)
        s.f_beta0[u] =
            krige_one(train_sites, draw.f_beta0[u], draw.tau2_beta0[u], gp_decay, 0.0, location, rng);
    for (int u = 0; u < 2; ++u)
        s.sigma2[u] = std::exp(krige_one(train_sites, draw.f_logvar[u], draw.tau2_logvar[u],
                                         gp_decay, draw.logvar_mean[u], location, rng));
    s.f_phi0 = krige_one(train_sites, draw.f_phi0, draw.tau2_phi0, gp_decay, 0.0, location, rng);
    return s;
}

BaselineSimSite krige_baseline_sim_site(const BaselineState& draw,
                                        const std::vector<Site>& train_sites, double gp_decay,
                                        const Site& location, double q,
                                        const CovariateScaling& scaling, Rng& rng) {
    BaselineSimSite s;
    s.q = q;
    s.elev_sc = scaling.scale_elev(location.elevation);
    s.lat_sc = scaling.scale_lat(location.latitude);
    s.f_beta0 = krige_one(train_sites, draw.f_beta0, draw.tau2_beta0, gp_decay, 0.0, location, rng);
    s.sigma2 = std::exp(krige_one(train_sites, draw.f_logvar, draw.tau2_logvar, gp_decay,
                                  draw.logvar_mean, location, rng));
    return s;
}

SeasonalDay SeasonalDay::from_date(const Date& d) {
    SeasonalDay out;
    const double len = year_length(d.year);
    const double angle = 2.0 * std::numbers::pi * day_of_year(d) / len;
    out.sin_t = std::sin(angle);
    out.cos_t = std::cos(angle);
    out.year = d.year;
    return out;
}

double gamma_at(const ParameterState& p, int state, int year, int first_year, int n_years) {
    const int k = year - first_year;
    return (k >= 0 && k < n_years) ? p.gamma[state][k] : 0.0;
}

double sim_mu(int state, const ParameterState& p, const SimSite& site, const SeasonalDay& day,
              int first_year, int n_years) {
    return p.beta0[state] + site.f_beta0[state] + gamma_at(p, state, day.year, first_year, n_years) +
           p.beta_elev[state] * site.elev_sc + p.beta_lat[state] * site.lat_sc +
           p.lambda1 * day.sin_t + p.lambda2 * day.cos_t;
}

double sim_eta(const ParameterState& p, const SimSite& site, const SeasonalDay& day, double y_prev) {
    const double d = y_prev - site.q;
    return p.phi[0] + site.f_phi0 + p.phi[1] * d + p.phi[2] * (d >= 0.0 ? d : 0.0) +
           p.phi[3] * day.sin_t + p.phi[4] * day.cos_t;
}

double one_day_ahead_prob(const ParameterState& p, const SimSite& site, const Date& day,
                          double y_prev) {
    if (is_missing(y_prev)) return kMissing;
    return norm_cdf(sim_eta(p, site, SeasonalDay::from_date(day), y_prev));
}

double one_day_ahead_cdf(double y, const ParameterState& p, const SimSite& site, const Date& day,
                         double y_prev, int first_year, int n_years, const ModelConfig& config) {
    const SeasonalDay today = SeasonalDay::from_date(day);
    const SeasonalDay yesterday = SeasonalDay::from_date(add_days(day, -1));
    const double p1 = norm_cdf(sim_eta(p, site, today, y_prev));
    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    if (y < site.q) {
        const double center = sim_mu(0, p, site, today, first_year, n_years) +
                              sign * p.rho[0] * (y_prev - sim_mu(0, p, site, yesterday, first_year, n_years));
        TruncNormalParams tn{center, site.sigma2[0], -kInf, site.q};
        return (1.0 - p1) * tn_cdf(y, tn);
    }
    const double center = sim_mu(1, p, site, today, first_year, n_years) +
                          sign * p.rho[1] * (y_prev - sim_mu(1, p, site, yesterday, first_year, n_years));
    TruncNormalParams tn{center, p.omega * site.sigma2[1], site.q, kInf};
    return (1.0 - p1) + p1 * tn_cdf(y, tn);
}

namespace {

double baseline_gamma_at(const BaselineState& p, int year, int first_year, int n_years) {
    const int k = year - first_year;
    return (k >= 0 && k < n_years) ? p.gamma[k] : 0.0;
}

double baseline_sim_mu(const BaselineState& p, const BaselineSimSite& site, const SeasonalDay& day,
                       int first_year, int n_years) {
    return p.beta0 + site.f_beta0 + baseline_gamma_at(p, day.year, first_year, n_years) +
           p.beta_elev * site.elev_sc + p.beta_lat * site.lat_sc + p.lambda1 * day.sin_t +
           p.lambda2 * day.cos_t;
}

}  // namespace

double baseline_exceed_prob(const BaselineState& p, const BaselineSimSite& site, const Date& day,
                            double y_prev, int first_year, int n_years, const ModelConfig& config) {
    if (is_missing(y_prev)) return kMissing;
    const SeasonalDay today = SeasonalDay::from_date(day);
    const SeasonalDay yesterday = SeasonalDay::from_date(add_days(day, -1));
    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    const double center = baseline_sim_mu(p, site, today, first_year, n_years) +
                          sign * p.rho * (y_prev - baseline_sim_mu(p, site, yesterday, first_year, n_years));
    return 1.0 - t_cdf((site.q - center) / std::sqrt(site.sigma2), config.nu);
}

double climatological_mean(const ParameterState& p, const SimSite& site, const Date& day,
                           int first_year, int n_years) {
    return sim_mu(0, p, site, SeasonalDay::from_date(day), first_year, n_years);
}

PredictiveSeries simulate_trajectory(const ParameterState& p, const SimSite& site, int first_year,
                                     int n_years, const Date& start, int n_days, double y0,
                                     const ModelConfig& config, Rng& rng) {
    if (n_days < 1) throw std::invalid_argument("simulate_trajectory: n_days must be >= 1");
    PredictiveSeries out;
    out.start = start;
    out.y.resize(n_days);
    out.u.resize(n_days);

    // Annual effects for years beyond the fitted span, drawn once per trajectory.
    std::map<int, std::array<double, 2>> fresh_gamma;
    const Date end = add_days(start, n_days - 1);
    for (int year = start.year; year <= end.year; ++year) {
        if (year < first_year || year >= first_year + n_years) {
            fresh_gamma[year] = {rng.normal(), rng.normal()};
            out.extended_years = true;
        }
    }
    auto gamma_of = [&](int state, int year) {
        if (auto it = fresh_gamma.find(year); it != fresh_gamma.end()) return it->second[state];
        return gamma_at(p, state, year, first_year, n_years);
    };
    auto mu_of = [&](int state, const SeasonalDay& day) {
        return p.beta0[state] + site.f_beta0[state] + gamma_of(state, day.year) +
               p.beta_elev[state] * site.elev_sc + p.beta_lat[state] * site.lat_sc +
               p.lambda1 * day.sin_t + p.lambda2 * day.cos_t;
    };

    const double sign = config.ar_sign_literal ? -1.0 : 1.0;
    double y_prev = y0;
    SeasonalDay prev_day = SeasonalDay::from_date(add_days(start, -1));
    for (int t = 0; t < n_days; ++t) {
        const SeasonalDay day = SeasonalDay::from_date(add_days(start, t));
        const double pr = norm_cdf(sim_eta(p, site, day, y_prev));
        const int u = rng.uniform() < pr ? 1 : 0;
        const double center = mu_of(u, day) + sign * p.rho[u] * (y_prev - mu_of(u, prev_day));
        double y;
        if (u == 1) {
            TruncNormalParams tn{center, p.omega * site.sigma2[1], site.q, kInf};
            y = std::max(tn_sample(tn, rng), site.q);
        } else {
            TruncNormalParams tn{center, site.sigma2[0], -kInf, site.q};
            y = tn_sample(tn, rng);
            if (y >= site.q) y = std::nextafter(site.q, -kInf);
        }
        out.y[t] = y;
        out.u[t] = static_cast<std::int8_t>(u);
        y_prev = y;
        prev_day = day;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Error rates
// ---------------------------------------------------------------------------

namespace {

struct DayClass {
    std::size_t idx;    // day index in the held-out series
    bool prev_above;    // y_{t-1} >= q
    int exact_run;      // observed run length before t (1..3), 0 = unclassified
};

// Exceedance days in the window with an observed previous day.
std::vector<DayClass> qualifying_days(const StationSeries& series, double q,
                                      const PredictionWindow& window) {
    std::vector<DayClass> days;
    for (std::size_t t = 1; t < series.size(); ++t) {
        if (is_missing(series.tmax[t]) || series.tmax[t] < q) continue;
        if (is_missing(series.tmax[t - 1])) continue;
        const Date d = series.date_at(t);
        if (d.year < window.year_start || d.year > window.year_end) continue;
        if (!window.months.contains(d.month)) continue;
        DayClass dc{t, series.tmax[t - 1] >= q, 0};
        // Exact observed run length before t, needing the below-threshold boundary day.
        int run = 0;
        std::size_t back = t;
        while (back >= 1 && !is_missing(series.tmax[back - 1]) && series.tmax[back - 1] >= q) {
            ++run;
            --back;
        }
        const bool bounded = back >= 1 && !is_missing(series.tmax[back - 1]);
        if (run >= 1 && run <= 3 && bounded) dc.exact_run = run;
        days.push_back(dc);
    }
    return days;
}

ErrorRates assemble_rates(const std::vector<DayClass>& days, const std::vector<double>& p_hat,
                          const PredictionWindow& window) {
    ErrorRates r;
    r.window = window;
    double sum_all = 0, sum_pers = 0, sum_onset = 0;
    std::array<double, 3> sum_run{};
    for (std::size_t i = 0; i < days.size(); ++i) {
        const double err = 1.0 - p_hat[i];
        sum_all += err;
        ++r.n_marginal;
        if (days[i].prev_above) {
            sum_pers += err;
            ++r.n_persistence;
        } else {
            sum_onset += err;
            ++r.n_onset;
        }
        if (days[i].exact_run >= 1) {
            sum_run[days[i].exact_run - 1] += err;
            ++r.n_persist_run[days[i].exact_run - 1];
        }
    }
    if (r.n_marginal > 0) r.marginal = sum_all / static_cast<double>(r.n_marginal);
    if (r.n_persistence > 0) r.persistence = sum_pers / static_cast<double>(r.n_persistence);
    if (r.n_onset > 0) r.onset = sum_onset / static_cast<double>(r.n_onset);
    for (int k = 0; k < 3; ++k)
        if (r.n_persist_run[k] > 0)
            r.persist_run[k] = sum_run[k] / static_cast<double>(r.n_persist_run[k]);
    return r;
}

}  // namespace

ErrorRates error_rates(const std::vector<ParameterState>& draws,
                       const std::vector<SimSite>& site_per_draw, const StationSeries& held_out,
                       double q, const PredictionWindow& window, int first_year, int n_years) {
    (void)first_year;
    (void)n_years;
    if (draws.empty() || draws.size() != site_per_draw.size())
        throw std::invalid_argument("error_rates: draws and per-draw sites must align");
    const auto days = qualifying_days(held_out, q, window);
    std::vector<double> p_hat(days.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < days.size(); ++i) {
        const std::size_t t = days[i].idx;
        const Date date = held_out.date_at(t);
        const SeasonalDay day = SeasonalDay::from_date(date);
        const double y_prev = held_out.tmax[t - 1];
        double acc = 0.0;
        for (std::size_t d = 0; d < draws.size(); ++d)
            acc += norm_cdf(sim_eta(draws[d], site_per_draw[d], day, y_prev));
        p_hat[i] = acc / static_cast<double>(draws.size());
    }
    return assemble_rates(days, p_hat, window);
}

ErrorRates error_rates_baseline(const std::vector<BaselineState>& draws,
                                const std::vector<BaselineSimSite>& site_per_draw,
                                const StationSeries& held_out, double q,
                                const PredictionWindow& window, int first_year, int n_years,
                                const ModelConfig& config) {
    if (draws.empty() || draws.size() != site_per_draw.size())
        throw std::invalid_argument("error_rates_baseline: draws and per-draw sites must align");
    const auto days = qualifying_days(held_out, q, window);
    std::vector<double> p_hat(days.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < days.size(); ++i) {
        const std::size_t t = days[i].idx;
        const Date date = held_out.date_at(t);
        const double y_prev = held_out.tmax[t - 1];
        double acc = 0.0;
        for (std::size_t d = 0; d < draws.size(); ++d)
            acc += baseline_exceed_prob(draws[d], site_per_draw[d], date, y_prev, first_year,
                                        n_years, config);
        p_hat[i] = acc / static_cast<double>(draws.size());
    }
    return assemble_rates(days, p_hat, window);
}

// ---------------------------------------------------------------------------
// Posterior-predictive EHE summaries
// ---------------------------------------------------------------------------

namespace {

SummaryCell cell_from(std::vector<double> values) {
    SummaryCell c;
    if (values.empty()) return c;
    double mean = 0.0;
    for (double v : values) mean += v;
    c.mean = mean / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    auto q = [&](double p) {
        if (n == 1) return values[0];
        const double pos = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        return lo + 1 >= n ? values[n - 1] : values[lo] * (1.0 - frac) + values[lo + 1] * frac;
    };
    c.q05 = q(0.05);
    c.q95 = q(0.95);
    return c;
}

struct TrajectoryStats {
    DurationHistogram hist;
    ExceedanceCdf exc_avg, exc_max;
    double n_events = 0;
};

}  // namespace

EheSummary summarize_ehe(const std::vector<ParameterState>& draws,
                         const std::vector<SimSite>& site_per_draw, int first_year, int n_years,
                         const Date& start, int n_days, const ModelConfig& config,
                         const EheSummaryOptions& options) {
    if (draws.empty() || draws.size() != site_per_draw.size())
        throw std::invalid_argument("summarize_ehe: draws and per-draw sites must align");
    if (options.n_rep < 1) throw std::invalid_argument("summarize_ehe: n_rep must be >= 1");

    const std::size_t n_traj = draws.size() * static_cast<std::size_t>(options.n_rep);
    std::vector<TrajectoryStats> stats(n_traj);

#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < n_traj; ++k) {
        const std::size_t d = k / static_cast<std::size_t>(options.n_rep);
        Rng rng(options.seed, k);  // per-trajectory stream keeps runs thread-count independent
        const ParameterState& p = draws[d];
        const SimSite& site = site_per_draw[d];
        const double y0 = options.y0 ? *options.y0
                                     : climatological_mean(p, site, add_days(start, -1), first_year,
                                                           n_years);
        const PredictiveSeries traj =
            simulate_trajectory(p, site, first_year, n_years, start, n_days, y0, config, rng);

        StationSeries series;
        series.station.id = "sim";
        series.start_date = start;
        series.tmax = traj.y;
        Threshold thr;
        thr.station_id = "sim";
        thr.q = site.q;
        const auto events = extract_events(series, traj.u, thr);
        stats[k].n_events = static_cast<double>(events.size());
        stats[k].hist = duration_histogram(events, options.bins);
        stats[k].exc_avg =
            exceedance_cdf_complement(events, options.min_duration, options.levels,
                                      ExceedanceStat::average);
        stats[k].exc_max =
            exceedance_cdf_complement(events, options.min_duration, options.levels,
                                      ExceedanceStat::maximum);
    }

    EheSummary out;
    out.bins = options.bins;
    out.levels = options.levels;
    out.min_duration = options.min_duration;
    out.n_traj = n_traj;

    std::vector<double> incidence;
    incidence.reserve(n_traj);
    for (const auto& s : stats) {
        incidence.push_back(s.n_events);
        if (!s.hist.empty) ++out.n_traj_with_events;
        if (!s.exc_avg.empty) ++out.n_traj_with_long_events;
    }
    out.incidence = cell_from(incidence);
    out.empty = out.n_traj_with_events == 0;

    for (std::size_t b = 0; b < options.bins.size(); ++b) {
        std::vector<double> vals;
        for (const auto& s : stats)
            if (!s.hist.empty) vals.push_back(s.hist.probs[b]);
        out.duration_density.push_back(cell_from(std::move(vals)));
    }
    for (std::size_t l = 0; l < options.levels.size(); ++l) {
        std::vector<double> va, vm;
        for (const auto& s : stats) {
            if (!s.exc_avg.empty) va.push_back(s.exc_avg.prob_ge[l]);
            if (!s.exc_max.empty) vm.push_back(s.exc_max.prob_ge[l]);
        }
        out.exceed_avg.push_back(cell_from(std::move(va)));
        out.exceed_max.push_back(cell_from(std::move(vm)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Leave-one-out comparison
// ---------------------------------------------------------------------------

ModelComparison fit_baseline_and_compare(const ModelData& train, const StationSeries& held_out,
                                         double held_out_q, const ModelConfig& config,
                                         const SamplerConfig& sconfig,
                                         const PredictionWindow& window, PosteriorChain* out_chain,
                                         BaselineChain* out_baseline_chain) {
    PosteriorChain chain = fit(train, config, sconfig);
    SamplerConfig bconfig = sconfig;
    bconfig.seed = sconfig.seed + 1;
    BaselineChain bchain = fit_baseline(train, config, bconfig);
    if (chain.draws.empty() || bchain.draws.empty())
        throw std::runtime_error("fit_baseline_and_compare: no retained draws");

    const auto coords = train.site_coords();
    const Site location{held_out.station.longitude, held_out.station.latitude,
                        held_out.station.elevation};
    const double decay = config.gp_decay();

    std::vector<SimSite> two_state_sites(chain.draws.size());
#pragma omp parallel for schedule(static)
    for (std::size_t d = 0; d < chain.draws.size(); ++d) {
        Rng rng(sconfig.seed, 0x4B520000ull + d);  // kriging stream per draw
        two_state_sites[d] = krige_sim_site(chain.draws[d], coords, decay, location, held_out_q,
                                            train.scaling, rng);
    }
    std::vector<BaselineSimSite> baseline_sites(bchain.draws.size());
#pragma omp parallel for schedule(static)
    for (std::size_t d = 0; d < bchain.draws.size(); ++d) {
        Rng rng(sconfig.seed, 0x42520000ull + d);
        baseline_sites[d] = krige_baseline_sim_site(bchain.draws[d], coords, decay, location,
                                                    held_out_q, train.scaling, rng);
    }

    ModelComparison cmp;
    cmp.two_state = error_rates(chain.draws, two_state_sites, held_out, held_out_q, window,
                                train.first_year, train.n_years);
    cmp.baseline = error_rates_baseline(bchain.draws, baseline_sites, held_out, held_out_q, window,
                                        train.first_year, train.n_years, config);
    if (out_chain) *out_chain = std::move(chain);
    if (out_baseline_chain) *out_baseline_chain = std::move(bchain);
    return cmp;
}

}  // namespace ehe
