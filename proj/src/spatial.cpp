#include "ehe/spatial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ehe/dist.hpp"

namespace ehe {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
}  // namespace

double decay_from_effective_range(double range_km) {
    if (!(range_km > 0.0)) throw std::invalid_argument("effective range must be positive");
    return 3.0 / range_km;
}

double distance_km(const Site& a, const Site& b) {
    const double phi1 = deg2rad(a.latitude), phi2 = deg2rad(b.latitude);
    const double dphi = phi2 - phi1;
    const double dlam = deg2rad(b.longitude - a.longitude);
    const double s1 = std::sin(0.5 * dphi), s2 = std::sin(0.5 * dlam);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double exp_cov(double d_km, const GpHyper& hyper) {
    if (!(d_km >= 0.0)) throw std::invalid_argument("distance must be non-negative");
    return hyper.tau2 * std::exp(-hyper.decay * d_km);
}

Eigen::MatrixXd build_corr(const std::vector<Site>& sites, double decay) {
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double c = std::exp(-decay * distance_km(sites[i], sites[j]));
            m(i, j) = c;
            m(j, i) = c;
        }
    }
    return m;
}

Eigen::MatrixXd build_cov(const std::vector<Site>& sites, const GpHyper& hyper) {
    if (sites.empty()) throw std::invalid_argument("build_cov: at least one site required");
    return hyper.tau2 * build_corr(sites, hyper.decay);
}

KrigeMoments krige_moments(const SpatialField& field, const std::vector<Site>& new_sites) {
    if (field.sites.size() != field.values.size())
        throw std::invalid_argument("krige: field values and sites are not aligned");
    const auto n_new = static_cast<Eigen::Index>(new_sites.size());
    KrigeMoments out;
    out.cov = build_cov(new_sites, field.hyper);
    if (field.sites.empty()) {
        out.mean = Eigen::VectorXd::Constant(n_new, field.hyper.mean);
        return out;
    }
    const auto n_obs = static_cast<Eigen::Index>(field.sites.size());
    const Eigen::MatrixXd k11 = build_cov(field.sites, field.hyper);
    Eigen::MatrixXd k21(n_new, n_obs);
    for (Eigen::Index i = 0; i < n_new; ++i)
        for (Eigen::Index j = 0; j < n_obs; ++j)
            k21(i, j) = exp_cov(distance_km(new_sites[i], field.sites[j]), field.hyper);

    const Eigen::MatrixXd l = jittered_cholesky(k11);
    Eigen::VectorXd resid(n_obs);
    for (Eigen::Index j = 0; j < n_obs; ++j) resid[j] = field.values[j] - field.hyper.mean;

    // mean = m + K21 K11^-1 (f - m),  cov = K22 - K21 K11^-1 K12
    const Eigen::VectorXd alpha = l.transpose().triangularView<Eigen::Upper>().solve(
        l.triangularView<Eigen::Lower>().solve(resid));
    const Eigen::MatrixXd v = l.triangularView<Eigen::Lower>().solve(k21.transpose());
    out.mean = Eigen::VectorXd::Constant(n_new, field.hyper.mean) + k21 * alpha;
    out.cov -= v.transpose() * v;
    return out;
}

std::vector<double> krige(const SpatialField& field, const std::vector<Site>& new_sites, Rng& rng) {
    if (new_sites.empty()) return {};
    KrigeMoments m = krige_moments(field, new_sites);
    // Kriging near-interpolates at coincident sites; keep the residual variance legal.
    for (Eigen::Index i = 0; i < m.cov.rows(); ++i)
        if (m.cov(i, i) < 0.0) m.cov(i, i) = 0.0;
    const Eigen::VectorXd draw = mvn_chol_sample(m.mean, m.cov, rng);
    return {draw.data(), draw.data() + draw.size()};
}

}  // namespace ehe
