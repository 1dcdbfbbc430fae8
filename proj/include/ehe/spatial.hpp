#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ehe/rng.hpp"

namespace ehe {

struct Site {
    double longitude = 0;  // degrees
    double latitude = 0;   // degrees
    double elevation = 0;  // meters; enters the mean function, never the distance
};

/// Hyperparameters of one exponential-covariance GP: cov(d) = tau2 * exp(-decay * d).
struct GpHyper {
    double tau2 = 1;
    double decay = 3.0 / 400.0;  // per km; correlation e^-3 at the 400 km effective range
    double mean = 0;             // 0 for intercept fields, estimated for log-variance fields
};

/// decay = 3 / effective_range so correlation at the effective range is e^-3.
double decay_from_effective_range(double range_km);

/// Great-circle distance on a 6371 km sphere.
double distance_km(const Site& a, const Site& b);

double exp_cov(double d_km, const GpHyper& hyper);

/// Pairwise covariance matrix; symmetric, made PD by the shared jitter policy downstream.
Eigen::MatrixXd build_cov(const std::vector<Site>& sites, const GpHyper& hyper);

/// Correlation-only variant (tau2 = 1), reused across fields that share the decay.
Eigen::MatrixXd build_corr(const std::vector<Site>& sites, double decay);

/// One GP effect evaluated at a site set.
struct SpatialField {
    std::vector<Site> sites;
    std::vector<double> values;  // one draw of the field at sites (includes hyper.mean)
    GpHyper hyper;
    std::string role;            // e.g. "beta0_below", "log_sigma2_above", "phi0"
};

/// Conditional mean and covariance of the field at new_sites given field.values.
/// With no observed sites this degenerates to the prior (mean, cov).
struct KrigeMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};
KrigeMoments krige_moments(const SpatialField& field, const std::vector<Site>& new_sites);

/// Draw from the conditional Gaussian at new_sites given one posterior draw of the field.
std::vector<double> krige(const SpatialField& field, const std::vector<Site>& new_sites, Rng& rng);

}  // namespace ehe
