#include "ehe/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

#include "ehe/dist.hpp"

namespace ehe {

void SamplerConfig::validate() const {
    if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
    if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn-in must lie in [0, 1)");
    if (thin < 1) throw std::invalid_argument("thinning must be >= 1");
    if (adapt_window < 1) throw std::invalid_argument("adaptation window must be >= 1");
}

std::int64_t SamplerConfig::n_post() const {
    return static_cast<std::int64_t>(std::floor(iterations * (1.0 - burn_in) + 1e-9));
}

// ---------------------------------------------------------------------------
// Elliptical slice sampling
// ---------------------------------------------------------------------------

double ess_step(std::vector<double>& x,
                const std::function<void(Rng&, std::vector<double>&)>& prior_draw,
                const std::function<double(const std::vector<double>&)>& loglik,
                double current_loglik, Rng& rng) {
    const std::size_t n = x.size();
    std::vector<double> nu(n), cand(n);
    prior_draw(rng, nu);
    const double logy = current_loglik + std::log(rng.uniform());
    double theta = 2.0 * std::numbers::pi * rng.uniform();
    double tmin = theta - 2.0 * std::numbers::pi;
    double tmax = theta;
    for (int it = 0; it < 1000; ++it) {
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) cand[i] = x[i] * c + nu[i] * s;
        const double ll = loglik(cand);
        if (ll > logy) {
            x = cand;
            return ll;
        }
        if (theta < 0.0) tmin = theta; else tmax = theta;
        theta = tmin + (tmax - tmin) * rng.uniform();
    }
    // Shrinkage has collapsed onto the current state; keep it.
    return loglik(x);
}

double update_gp_field(std::vector<double>& values, const Eigen::MatrixXd& chol_lower,
                       const std::function<double(const std::vector<double>&)>& loglik,
                       double current_loglik, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(values.size());
    auto prior_draw = [&](Rng& r, std::vector<double>& out) {
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = r.normal();
        Eigen::VectorXd v = chol_lower * z;
        for (Eigen::Index i = 0; i < n; ++i) out[i] = v[i];
    };
    return ess_step(values, prior_draw, loglik, current_loglik, rng);
}

// ---------------------------------------------------------------------------
// Probit transition block
// ---------------------------------------------------------------------------

ProbitAugmentation update_probit_block(ParameterState& p, const ModelData& data,
                                       const ModelConfig& config, Rng& rng) {
    const std::size_t n_sites = data.n_sites();
    ProbitAugmentation aug;
    aug.z.reserve(data.n_terms());

    // z_t ~ N(eta_t, 1) restricted to the half-line matching u_t.
    for (std::size_t s = 0; s < n_sites; ++s) {
        const auto& site = data.sites[s];
        for (int t : site.terms) {
            const double e = eta(site, t, site.y[t - 1], p, s);
            const double z = site.u[t] == kStateAbove ? e + tn_sample_std(-e, kInf, rng)
                                                      : e + tn_sample_std(-kInf, -e, rng);
            aug.z.push_back(z);
        }
    }

    // phi | z: Gaussian regression with unit noise and N(0, sd^2 I) prior.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5) /
                        (config.coef_prior_sd * config.coef_prior_sd);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
    {
        std::size_t k = 0;
        Eigen::VectorXd x(5);
        for (std::size_t s = 0; s < n_sites; ++s) {
            const auto& site = data.sites[s];
            for (int t : site.terms) {
                const double d = site.y[t - 1] - site.q;
                x << 1.0, d, (d >= 0.0 ? d : 0.0), site.season_sin[t], site.season_cos[t];
                a.noalias() += x * x.transpose();
                b.noalias() += x * (aug.z[k++] - p.f_phi0[s]);
            }
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    const Eigen::VectorXd mean = llt.solve(b);
    Eigen::VectorXd eps(5);
    for (int i = 0; i < 5; ++i) eps[i] = rng.normal();
    const Eigen::VectorXd phi = mean + llt.matrixU().solve(eps);
    for (int i = 0; i < 5; ++i) p.phi[i] = phi[i];

    // phi0 field | z, phi: Gaussian likelihood with per-site sufficient statistics.
    std::vector<double> count(n_sites, 0.0), resid(n_sites, 0.0);
    {
        std::size_t k = 0;
        for (std::size_t s = 0; s < n_sites; ++s) {
            const auto& site = data.sites[s];
            for (int t : site.terms) {
                const double d = site.y[t - 1] - site.q;
                const double fit = p.phi[0] + p.phi[1] * d + p.phi[2] * (d >= 0.0 ? d : 0.0) +
                                   p.phi[3] * site.season_sin[t] + p.phi[4] * site.season_cos[t];
                count[s] += 1.0;
                resid[s] += aug.z[k++] - fit;
            }
        }
    }
    auto field_loglik = [&](const std::vector<double>& f) {
        double ll = 0.0;
        for (std::size_t s = 0; s < n_sites; ++s)
            ll += f[s] * resid[s] - 0.5 * count[s] * f[s] * f[s];
        return ll;
    };
    const Eigen::MatrixXd chol = std::sqrt(p.tau2_phi0) * data.corr_chol;
    update_gp_field(p.f_phi0, chol, field_loglik, field_loglik(p.f_phi0), rng);

    // tau2 | field: conjugate inverse gamma.
    Eigen::Map<const Eigen::VectorXd> f(p.f_phi0.data(), static_cast<Eigen::Index>(n_sites));
    const double quad = f.dot(data.corr_inv * f);
    p.tau2_phi0 = invgamma_sample(config.var_prior_shape + 0.5 * static_cast<double>(n_sites),
                                  config.var_prior_rate + 0.5 * quad, rng);
    return aug;
}

// ---------------------------------------------------------------------------
// Omega block
// ---------------------------------------------------------------------------

bool update_omega(ParameterState& p, const ModelData& data, const ModelConfig& config,
                  double log_step, Rng& rng) {
    auto log_target = [&](double omega) {
        ParameterState& mut = p;
        const double saved = mut.omega;
        mut.omega = omega;
        const double em = loglik_emission(data, mut, config, kAbove);
        mut.omega = saved;
        // Jacobian of the log transform keeps the walk on log omega valid.
        return em + invgamma_logpdf(omega, 0.5 * config.nu, 0.5 * config.nu) + std::log(omega);
    };
    const double cur = log_target(p.omega);
    const double cand = p.omega * std::exp(log_step * rng.normal());
    const double prop = log_target(cand);
    if (std::log(rng.uniform()) < prop - cur) {
        p.omega = cand;
        return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

double state_variance(const SiteData& site, int state) {
    const auto& terms = site.state_terms[state];
    if (terms.size() < 2) return 1.0;
    double mean = 0.0;
    for (int t : terms) mean += site.y[t];
    mean /= static_cast<double>(terms.size());
    double ss = 0.0;
    for (int t : terms) ss += (site.y[t] - mean) * (site.y[t] - mean);
    const double var = ss / static_cast<double>(terms.size() - 1);
    return std::clamp(var, 1e-4, 1e6);
}

double trigamma(double x) {
    double acc = 0.0;
    while (x < 8.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double ix = 1.0 / x, ix2 = ix * ix;
    return acc + ix * (1.0 + ix * (0.5 + ix * (1.0 / 6.0 - ix2 * (1.0 / 30.0 - ix2 / 42.0))));
}

}  // namespace

ParameterState initial_state(const ModelData& data, const ModelConfig& config) {
    (void)config;
    const std::size_t n_sites = data.n_sites();
    ParameterState p;
    for (int u = 0; u < 2; ++u) {
        p.rho[u] = 0.5;
        p.gamma[u].assign(data.n_years, 0.0);
        p.f_beta0[u].assign(n_sites, 0.0);
        p.f_logvar[u].resize(n_sites);
        for (std::size_t s = 0; s < n_sites; ++s)
            p.f_logvar[u][s] = std::log(state_variance(data.sites[s], u));
        double m = 0.0;
        for (double v : p.f_logvar[u]) m += v;
        p.logvar_mean[u] = m / static_cast<double>(n_sites);
    }
    p.f_phi0.assign(n_sites, 0.0);
    p.omega = 1.0;
    return p;
}

// ---------------------------------------------------------------------------
// Metropolis-within-Gibbs driver
// ---------------------------------------------------------------------------

namespace {

struct Block {
    std::string name;
    double step = 0.1;
    std::int64_t proposals = 0, accepts = 0;
    std::int64_t window_proposals = 0, window_accepts = 0;

    void record(bool accepted) {
        ++proposals;
        ++window_proposals;
        if (accepted) {
            ++accepts;
            ++window_accepts;
        }
    }
    void adapt(const SamplerConfig& sc, bool in_burnin) {
        if (!in_burnin || window_proposals < sc.adapt_window) return;
        const double rate = static_cast<double>(window_accepts) / window_proposals;
        step = std::clamp(step * std::exp(rate - sc.target_accept), 1e-6, 1e3);
        window_proposals = window_accepts = 0;
    }
    BlockStats stats() const { return {name, proposals, accepts, step}; }
};

class BlockSet {
public:
    explicit BlockSet(const SamplerConfig& sc) : sc_(sc) {}

    Block& add(const std::string& name, double default_step) {
        blocks_.push_back({name, default_step, 0, 0, 0, 0});
        if (auto it = sc_.step_overrides.find(name); it != sc_.step_overrides.end())
            blocks_.back().step = it->second;
        return blocks_.back();
    }
    std::vector<BlockStats> stats() const {
        std::vector<BlockStats> out;
        for (const auto& b : blocks_) out.push_back(b.stats());
        return out;
    }

private:
    const SamplerConfig& sc_;
    std::deque<Block> blocks_;
};

}  // namespace

PosteriorChain fit(const ModelData& data, const ModelConfig& config, const SamplerConfig& sconfig) {
    sconfig.validate();
    if (data.n_sites() < 2) throw std::invalid_argument("fit requires at least 2 sites");
    if (data.n_years < 1) throw std::invalid_argument("fit requires at least 1 year of data");
    if (data.n_terms() == 0) throw std::invalid_argument("fit requires observed consecutive days");

    const std::size_t n_sites = data.n_sites();
    const double coef_sd = config.coef_prior_sd;
    const double gam_sd = config.annual_prior_sd;

    ParameterState p = initial_state(data, config);
    p.validate(static_cast<int>(n_sites), data.n_years);
    {
        const double ll0 = loglik_two_state(data, p, config);
        if (!std::isfinite(ll0))
            throw std::runtime_error(
                "non-finite log-likelihood at initialization; check thresholds and data scale");
    }

    Rng rng(sconfig.seed);
    BlockSet blocks(sconfig);
    std::array<Block*, 2> b_elev{}, b_lat{}, b_rho{}, b_gamma{};
    for (int u = 0; u < 2; ++u) {
        const std::string suffix = u == 0 ? "_0" : "_1";
        b_elev[u] = &blocks.add("beta_elev" + suffix, 0.1);
        b_lat[u] = &blocks.add("beta_lat" + suffix, 0.1);
        b_rho[u] = &blocks.add("rho" + suffix, 0.05);
        b_gamma[u] = &blocks.add("gamma" + suffix, 0.2);
    }
    Block* b_lambda1 = &blocks.add("lambda1", 0.05);
    Block* b_lambda2 = &blocks.add("lambda2", 0.05);
    // Seed the omega walk from the spread of the untruncated InvGamma conditional.
    std::size_t n_above = 0;
    for (const auto& s : data.sites) n_above += s.state_terms[1].size();
    Block* b_omega = &blocks.add(
        "omega", std::max(0.02, 2.4 * std::sqrt(trigamma(0.5 * (config.nu + n_above)))));

    const std::int64_t n_post = sconfig.n_post();
    const std::int64_t n_burn = sconfig.iterations - n_post;

    PosteriorChain chain;
    chain.init_state = p;
    chain.sampler_config = sconfig;
    chain.model_config = config;
    chain.model_config.scaling = data.scaling;
    chain.first_year = data.first_year;
    chain.n_years = data.n_years;
    for (const auto& s : data.sites) chain.station_ids.push_back(s.station.id);
    chain.draws.reserve(static_cast<std::size_t>(sconfig.n_retained()));
    if (sconfig.iterations == 0) {
        chain.acceptance = blocks.stats();
        return chain;
    }

    std::array<double, 2> em{loglik_emission(data, p, config, 0),
                             loglik_emission(data, p, config, 1)};

    auto rw_scalar = [&](double& x, Block& blk, bool in_burnin, int state_mask,
                         double prior_sd, bool uniform_unit) {
        // state_mask: bit u set when the state-u emission sum depends on x.
        const double cand = x + blk.step * rng.normal();
        if (uniform_unit && !(cand > -1.0 && cand < 1.0)) {
            blk.record(false);
            blk.adapt(sconfig, in_burnin);
            return;
        }
        const double old = x;
        double cur = 0.0, prop = 0.0;
        std::array<double, 2> em_new = em;
        for (int u = 0; u < 2; ++u)
            if (state_mask & (1 << u)) cur += em[u];
        x = cand;
        for (int u = 0; u < 2; ++u)
            if (state_mask & (1 << u)) {
                em_new[u] = loglik_emission(data, p, config, u);
                prop += em_new[u];
            }
        double log_ratio = prop - cur;
        if (!uniform_unit)
            log_ratio += -0.5 * (cand * cand - old * old) / (prior_sd * prior_sd);
        if (std::log(rng.uniform()) < log_ratio) {
            em = em_new;
            blk.record(true);
        } else {
            x = old;
            blk.record(false);
        }
        blk.adapt(sconfig, in_burnin);
    };

    for (std::int64_t iter = 1; iter <= sconfig.iterations; ++iter) {
        const bool in_burnin = iter <= n_burn;

        // Guard the running sums against accumulation drift.
        em[0] = loglik_emission(data, p, config, 0);
        em[1] = loglik_emission(data, p, config, 1);

        update_probit_block(p, data, config, rng);

        for (int u = 0; u < 2; ++u) {
            const int mask = 1 << u;

            // Joint (global intercept, local field) elliptical-slice move.
            {
                std::vector<double> x(n_sites + 1);
                x[0] = p.beta0[u];
                std::copy(p.f_beta0[u].begin(), p.f_beta0[u].end(), x.begin() + 1);
                auto apply = [&](const std::vector<double>& v) {
                    p.beta0[u] = v[0];
                    std::copy(v.begin() + 1, v.end(), p.f_beta0[u].begin());
                };
                auto prior_draw = [&](Rng& r, std::vector<double>& out) {
                    Eigen::VectorXd z(static_cast<Eigen::Index>(n_sites));
                    for (std::size_t i = 0; i < n_sites; ++i) z[static_cast<Eigen::Index>(i)] = r.normal();
                    const Eigen::VectorXd f = std::sqrt(p.tau2_beta0[u]) * (data.corr_chol * z);
                    out[0] = coef_sd * r.normal();
                    for (std::size_t i = 0; i < n_sites; ++i) out[i + 1] = f[static_cast<Eigen::Index>(i)];
                };
                auto ll = [&](const std::vector<double>& v) {
                    apply(v);
                    return loglik_emission(data, p, config, u);
                };
                em[u] = ess_step(x, prior_draw, ll, em[u], rng);
                apply(x);
            }

            rw_scalar(p.beta_elev[u], *b_elev[u], in_burnin, mask, coef_sd, false);
            rw_scalar(p.beta_lat[u], *b_lat[u], in_burnin, mask, coef_sd, false);
            rw_scalar(p.rho[u], *b_rho[u], in_burnin, mask, 0.0, true);

            // Annual effects, first year pinned at 0.
            for (int k = 2; k <= data.n_years; ++k) {
                const double cur_part = loglik_emission_year(data, p, config, u, k);
                const double old = p.gamma[u][k - 1];
                const double cand = old + b_gamma[u]->step * rng.normal();
                p.gamma[u][k - 1] = cand;
                const double new_part = loglik_emission_year(data, p, config, u, k);
                const double log_ratio =
                    new_part - cur_part - 0.5 * (cand * cand - old * old) / (gam_sd * gam_sd);
                if (std::log(rng.uniform()) < log_ratio) {
                    em[u] += new_part - cur_part;
                    b_gamma[u]->record(true);
                } else {
                    p.gamma[u][k - 1] = old;
                    b_gamma[u]->record(false);
                }
                b_gamma[u]->adapt(sconfig, in_burnin);
            }

            // Log-variance field: slice the zero-mean deviations around the hypermean.
            {
                std::vector<double> dev(n_sites);
                for (std::size_t s = 0; s < n_sites; ++s)
                    dev[s] = p.f_logvar[u][s] - p.logvar_mean[u];
                auto apply = [&](const std::vector<double>& v) {
                    for (std::size_t s = 0; s < n_sites; ++s)
                        p.f_logvar[u][s] = p.logvar_mean[u] + v[s];
                };
                auto ll = [&](const std::vector<double>& v) {
                    apply(v);
                    return loglik_emission(data, p, config, u);
                };
                const Eigen::MatrixXd chol = std::sqrt(p.tau2_logvar[u]) * data.corr_chol;
                em[u] = update_gp_field(dev, chol, ll, em[u], rng);
                apply(dev);
            }

            // Hypermean of the log-variance field: conjugate given the field.
            {
                Eigen::Map<const Eigen::VectorXd> f(p.f_logvar[u].data(),
                                                    static_cast<Eigen::Index>(n_sites));
                const Eigen::VectorXd rinv_f = data.corr_inv * f;
                const double ones_rinv_ones = data.corr_inv.sum();
                const double prec = ones_rinv_ones / p.tau2_logvar[u] +
                                    1.0 / (config.hypermean_prior_sd * config.hypermean_prior_sd);
                const double mean = (rinv_f.sum() / p.tau2_logvar[u]) / prec;
                p.logvar_mean[u] = mean + rng.normal() / std::sqrt(prec);
            }

            // GP variances: conjugate inverse gamma.
            {
                Eigen::Map<const Eigen::VectorXd> f(p.f_beta0[u].data(),
                                                    static_cast<Eigen::Index>(n_sites));
                const double quad = f.dot(data.corr_inv * f);
                p.tau2_beta0[u] =
                    invgamma_sample(config.var_prior_shape + 0.5 * static_cast<double>(n_sites),
                                    config.var_prior_rate + 0.5 * quad, rng);
                Eigen::VectorXd d(static_cast<Eigen::Index>(n_sites));
                for (std::size_t s = 0; s < n_sites; ++s)
                    d[static_cast<Eigen::Index>(s)] = p.f_logvar[u][s] - p.logvar_mean[u];
                const double quad_d = d.dot(data.corr_inv * d);
                p.tau2_logvar[u] =
                    invgamma_sample(config.var_prior_shape + 0.5 * static_cast<double>(n_sites),
                                    config.var_prior_rate + 0.5 * quad_d, rng);
            }
        }

        rw_scalar(p.lambda1, *b_lambda1, in_burnin, 0b11, coef_sd, false);
        rw_scalar(p.lambda2, *b_lambda2, in_burnin, 0b11, coef_sd, false);

        {
            const bool acc = update_omega(p, data, config, b_omega->step, rng);
            if (acc) em[1] = loglik_emission(data, p, config, 1);
            b_omega->record(acc);
            b_omega->adapt(sconfig, in_burnin);
        }

        if (iter > n_burn && (iter - n_burn) % sconfig.thin == 0) chain.draws.push_back(p);
    }

    chain.acceptance = blocks.stats();
    return chain;
}

// ---------------------------------------------------------------------------
// Baseline sampler
// ---------------------------------------------------------------------------

BaselineState initial_baseline_state(const ModelData& data, const ModelConfig& config) {
    (void)config;
    const std::size_t n_sites = data.n_sites();
    BaselineState p;
    p.rho = 0.5;
    p.gamma.assign(data.n_years, 0.0);
    p.f_beta0.assign(n_sites, 0.0);
    p.f_logvar.resize(n_sites);
    for (std::size_t s = 0; s < n_sites; ++s) {
        const auto& site = data.sites[s];
        // All-observations variance: the baseline has no state split.
        std::vector<double> vals;
        for (int t : site.terms) vals.push_back(site.y[t]);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= std::max<std::size_t>(1, vals.size());
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double var = vals.size() > 1 ? ss / static_cast<double>(vals.size() - 1) : 1.0;
        p.f_logvar[s] = std::log(std::clamp(var, 1e-4, 1e6));
    }
    double m = 0.0;
    for (double v : p.f_logvar) m += v;
    p.logvar_mean = m / static_cast<double>(n_sites);
    return p;
}

BaselineChain fit_baseline(const ModelData& data, const ModelConfig& config,
                           const SamplerConfig& sconfig) {
    sconfig.validate();
    const std::size_t n_sites = data.n_sites();
    const double coef_sd = config.coef_prior_sd;
    const double gam_sd = config.annual_prior_sd;

    BaselineState p = initial_baseline_state(data, config);
    {
        const double ll0 = loglik_single_state(data, p, config);
        if (!std::isfinite(ll0))
            throw std::runtime_error("non-finite baseline log-likelihood at initialization");
    }

    Rng rng(sconfig.seed);
    BlockSet blocks(sconfig);
    Block& b_elev = blocks.add("beta_elev", 0.1);
    Block& b_lat = blocks.add("beta_lat", 0.1);
    Block& b_rho = blocks.add("rho", 0.05);
    Block& b_gamma = blocks.add("gamma", 0.2);
    Block& b_lambda1 = blocks.add("lambda1", 0.05);
    Block& b_lambda2 = blocks.add("lambda2", 0.05);

    const std::int64_t n_post = sconfig.n_post();
    const std::int64_t n_burn = sconfig.iterations - n_post;

    BaselineChain chain;
    chain.init_state = p;
    chain.sampler_config = sconfig;
    chain.model_config = config;
    chain.model_config.scaling = data.scaling;
    chain.first_year = data.first_year;
    chain.n_years = data.n_years;
    for (const auto& s : data.sites) chain.station_ids.push_back(s.station.id);
    if (sconfig.iterations == 0) {
        chain.acceptance = blocks.stats();
        return chain;
    }

    double ll = loglik_single_state(data, p, config);

    auto rw_scalar = [&](double& x, Block& blk, bool in_burnin, double prior_sd,
                         bool uniform_unit) {
        const double cand = x + blk.step * rng.normal();
        if (uniform_unit && !(cand > -1.0 && cand < 1.0)) {
            blk.record(false);
            blk.adapt(sconfig, in_burnin);
            return;
        }
        const double old = x;
        x = cand;
        const double prop = loglik_single_state(data, p, config);
        double log_ratio = prop - ll;
        if (!uniform_unit)
            log_ratio += -0.5 * (cand * cand - old * old) / (prior_sd * prior_sd);
        if (std::log(rng.uniform()) < log_ratio) {
            ll = prop;
            blk.record(true);
        } else {
            x = old;
            blk.record(false);
        }
        blk.adapt(sconfig, in_burnin);
    };

    for (std::int64_t iter = 1; iter <= sconfig.iterations; ++iter) {
        const bool in_burnin = iter <= n_burn;
        ll = loglik_single_state(data, p, config);

        {
            std::vector<double> x(n_sites + 1);
            x[0] = p.beta0;
            std::copy(p.f_beta0.begin(), p.f_beta0.end(), x.begin() + 1);
            auto apply = [&](const std::vector<double>& v) {
                p.beta0 = v[0];
                std::copy(v.begin() + 1, v.end(), p.f_beta0.begin());
            };
            auto prior_draw = [&](Rng& r, std::vector<double>& out) {
                Eigen::VectorXd z(static_cast<Eigen::Index>(n_sites));
                for (std::size_t i = 0; i < n_sites; ++i) z[static_cast<Eigen::Index>(i)] = r.normal();
                const Eigen::VectorXd f = std::sqrt(p.tau2_beta0) * (data.corr_chol * z);
                out[0] = coef_sd * r.normal();
                for (std::size_t i = 0; i < n_sites; ++i) out[i + 1] = f[static_cast<Eigen::Index>(i)];
            };
            auto llfun = [&](const std::vector<double>& v) {
                apply(v);
                return loglik_single_state(data, p, config);
            };
            ll = ess_step(x, prior_draw, llfun, ll, rng);
            apply(x);
        }

        rw_scalar(p.beta_elev, b_elev, in_burnin, coef_sd, false);
        rw_scalar(p.beta_lat, b_lat, in_burnin, coef_sd, false);
        rw_scalar(p.rho, b_rho, in_burnin, 0.0, true);

        for (int k = 2; k <= data.n_years; ++k) {
            const double cur_part = loglik_single_state_year(data, p, config, k);
            const double old = p.gamma[k - 1];
            const double cand = old + b_gamma.step * rng.normal();
            p.gamma[k - 1] = cand;
            const double new_part = loglik_single_state_year(data, p, config, k);
            const double log_ratio =
                new_part - cur_part - 0.5 * (cand * cand - old * old) / (gam_sd * gam_sd);
            if (std::log(rng.uniform()) < log_ratio) {
                ll += new_part - cur_part;
                b_gamma.record(true);
            } else {
                p.gamma[k - 1] = old;
                b_gamma.record(false);
            }
            b_gamma.adapt(sconfig, in_burnin);
        }

        rw_scalar(p.lambda1, b_lambda1, in_burnin, coef_sd, false);
        rw_scalar(p.lambda2, b_lambda2, in_burnin, coef_sd, false);

        {
            std::vector<double> dev(n_sites);
            for (std::size_t s = 0; s < n_sites; ++s) dev[s] = p.f_logvar[s] - p.logvar_mean;
            auto apply = [&](const std::vector<double>& v) {
                for (std::size_t s = 0; s < n_sites; ++s) p.f_logvar[s] = p.logvar_mean + v[s];
            };
            auto llfun = [&](const std::vector<double>& v) {
                apply(v);
                return loglik_single_state(data, p, config);
            };
            const Eigen::MatrixXd chol = std::sqrt(p.tau2_logvar) * data.corr_chol;
            ll = update_gp_field(dev, chol, llfun, ll, rng);
            apply(dev);
        }

        {
            Eigen::Map<const Eigen::VectorXd> f(p.f_logvar.data(),
                                                static_cast<Eigen::Index>(n_sites));
            const Eigen::VectorXd rinv_f = data.corr_inv * f;
            const double prec = data.corr_inv.sum() / p.tau2_logvar +
                                1.0 / (config.hypermean_prior_sd * config.hypermean_prior_sd);
            const double mean = (rinv_f.sum() / p.tau2_logvar) / prec;
            p.logvar_mean = mean + rng.normal() / std::sqrt(prec);

            Eigen::Map<const Eigen::VectorXd> fb(p.f_beta0.data(),
                                                 static_cast<Eigen::Index>(n_sites));
            const double quad = fb.dot(data.corr_inv * fb);
            p.tau2_beta0 =
                invgamma_sample(config.var_prior_shape + 0.5 * static_cast<double>(n_sites),
                                config.var_prior_rate + 0.5 * quad, rng);
            Eigen::VectorXd d(static_cast<Eigen::Index>(n_sites));
            for (std::size_t s = 0; s < n_sites; ++s)
                d[static_cast<Eigen::Index>(s)] = p.f_logvar[s] - p.logvar_mean;
            const double quad_d = d.dot(data.corr_inv * d);
            p.tau2_logvar =
                invgamma_sample(config.var_prior_shape + 0.5 * static_cast<double>(n_sites),
                                config.var_prior_rate + 0.5 * quad_d, rng);
        }

        if (iter > n_burn && (iter - n_burn) % sconfig.thin == 0) chain.draws.push_back(p);
    }

    chain.acceptance = blocks.stats();
    return chain;
}

// ---------------------------------------------------------------------------
// Flattened parameter views
// ---------------------------------------------------------------------------

std::vector<std::string> parameter_names(int n_years, const std::vector<std::string>& ids) {
    std::vector<std::string> n;
    for (const char* b : {"beta0", "beta_elev", "beta_lat"})
        for (int u = 0; u < 2; ++u) n.push_back(std::string(b) + "_" + std::to_string(u));
    n.insert(n.end(), {"lambda1", "lambda2", "rho_0", "rho_1"});
    for (int i = 0; i < 5; ++i) n.push_back("phi_" + std::to_string(i));
    n.insert(n.end(), {"omega", "logvar_mean_0", "logvar_mean_1", "tau2_beta0_0", "tau2_beta0_1",
                       "tau2_logvar_0", "tau2_logvar_1", "tau2_phi0"});
    for (int u = 0; u < 2; ++u)
        for (int k = 1; k <= n_years; ++k)
            n.push_back("gamma_" + std::to_string(u) + "_y" + std::to_string(k));
    for (int u = 0; u < 2; ++u)
        for (const auto& id : ids) n.push_back("f_beta0_" + std::to_string(u) + "_" + id);
    for (int u = 0; u < 2; ++u)
        for (const auto& id : ids) n.push_back("f_logvar_" + std::to_string(u) + "_" + id);
    for (const auto& id : ids) n.push_back("f_phi0_" + id);
    return n;
}

std::vector<double> parameter_values(const ParameterState& p) {
    std::vector<double> v;
    for (int u = 0; u < 2; ++u) v.push_back(p.beta0[u]);
    for (int u = 0; u < 2; ++u) v.push_back(p.beta_elev[u]);
    for (int u = 0; u < 2; ++u) v.push_back(p.beta_lat[u]);
    v.insert(v.end(), {p.lambda1, p.lambda2, p.rho[0], p.rho[1]});
    for (double x : p.phi) v.push_back(x);
    v.insert(v.end(), {p.omega, p.logvar_mean[0], p.logvar_mean[1], p.tau2_beta0[0],
                       p.tau2_beta0[1], p.tau2_logvar[0], p.tau2_logvar[1], p.tau2_phi0});
    for (int u = 0; u < 2; ++u)
        for (double x : p.gamma[u]) v.push_back(x);
    for (int u = 0; u < 2; ++u)
        for (double x : p.f_beta0[u]) v.push_back(x);
    for (int u = 0; u < 2; ++u)
        for (double x : p.f_logvar[u]) v.push_back(x);
    for (double x : p.f_phi0) v.push_back(x);
    return v;
}

std::vector<std::string> baseline_parameter_names(int n_years,
                                                  const std::vector<std::string>& ids) {
    std::vector<std::string> n{"beta0",  "beta_elev",   "beta_lat",   "lambda1",
                               "lambda2", "rho",         "logvar_mean", "tau2_beta0",
                               "tau2_logvar"};
    for (int k = 1; k <= n_years; ++k) n.push_back("gamma_y" + std::to_string(k));
    for (const auto& id : ids) n.push_back("f_beta0_" + id);
    for (const auto& id : ids) n.push_back("f_logvar_" + id);
    return n;
}

std::vector<double> baseline_parameter_values(const BaselineState& p) {
    std::vector<double> v{p.beta0,      p.beta_elev,  p.beta_lat,   p.lambda1, p.lambda2,
                          p.rho,        p.logvar_mean, p.tau2_beta0, p.tau2_logvar};
    for (double x : p.gamma) v.push_back(x);
    for (double x : p.f_beta0) v.push_back(x);
    for (double x : p.f_logvar) v.push_back(x);
    return v;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

namespace {

double quantile_type7(std::vector<double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double effective_sample_size(const std::vector<double>& x, double mean, double var) {
    const std::size_t n = x.size();
    if (n < 4 || var <= 0.0) return static_cast<double>(n);
    auto autocov = [&](std::size_t k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) s += (x[i] - mean) * (x[i + k] - mean);
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    double tau = 1.0;
    // Geyer initial positive sequence: sum lag pairs while their total stays positive.
    for (std::size_t k = 1; k + 1 < n; k += 2) {
        const double pair = autocov(k) + autocov(k + 1);
        if (pair <= 0.0) break;
        tau += 2.0 * pair / c0;
        if (k > 2000) break;
    }
    return static_cast<double>(n) / tau;
}

double split_rhat(const std::vector<double>& x) {
    const std::size_t n = x.size() / 2;
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    auto mean_var = [](const double* b, std::size_t m) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += b[i];
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) ss += (b[i] - mean) * (b[i] - mean);
        return std::pair{mean, ss / static_cast<double>(m - 1)};
    };
    const auto [m1, v1] = mean_var(x.data(), n);
    const auto [m2, v2] = mean_var(x.data() + n, n);
    const double w = 0.5 * (v1 + v2);
    if (w <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double gm = 0.5 * (m1 + m2);
    const double b = static_cast<double>(n) * ((m1 - gm) * (m1 - gm) + (m2 - gm) * (m2 - gm));
    const double var_hat = (static_cast<double>(n - 1) / n) * w + b / static_cast<double>(n);
    return std::sqrt(var_hat / w);
}

}  // namespace

ParamSummary summarize_scalar(const std::string& name, const std::vector<double>& draws) {
    if (draws.empty()) throw std::invalid_argument("summarize_scalar: empty draw vector");
    ParamSummary s;
    s.name = name;
    const std::size_t n = draws.size();
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : draws) ss += (v - mean) * (v - mean);
    s.mean = mean;
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    s.q05 = quantile_type7(sorted, 0.05);
    s.q95 = quantile_type7(sorted, 0.95);
    s.ess = effective_sample_size(draws, mean, s.sd * s.sd);
    s.rhat = s.sd > 0.0 ? split_rhat(draws) : std::numeric_limits<double>::quiet_NaN();
    return s;
}

Diagnostics diagnostics(const PosteriorChain& chain) {
    if (chain.draws.empty()) throw std::runtime_error("diagnostics: empty chain");
    const auto names = parameter_names(chain.n_years, chain.station_ids);
    const std::size_t n_params = names.size();
    Diagnostics d;
    d.acceptance = chain.acceptance;
    std::vector<std::vector<double>> cols(n_params);
    for (auto& c : cols) c.reserve(chain.draws.size());
    for (const auto& draw : chain.draws) {
        const auto vals = parameter_values(draw);
        for (std::size_t j = 0; j < n_params; ++j) cols[j].push_back(vals[j]);
    }
    for (std::size_t j = 0; j < n_params; ++j)
        d.params.push_back(summarize_scalar(names[j], cols[j]));
    return d;
}

}  // namespace ehe
