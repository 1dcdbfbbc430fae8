#pragma once

#include <Eigen/Dense>
#include <limits>

#include "ehe/rng.hpp"

namespace ehe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard normal.
double norm_logpdf(double x);
double norm_cdf(double x);
double norm_logcdf(double x);     // robust into the far left tail
double norm_quantile(double p);   // throws outside (0, 1)

/// Probit link and its inverse (Eq.-style eta <-> probability mapping).
inline double probit(double p) { return norm_quantile(p); }
inline double probit_inv(double eta) { return norm_cdf(eta); }

/// log(Phi(zb) - Phi(za)) without cancellation in either tail.
double log_prob_interval(double za, double zb);

// Standard Student t with nu degrees of freedom.
double t_logpdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

/// Regularized incomplete beta I_x(a, b).
double inc_beta_reg(double a, double b, double x);

struct TruncNormalParams {
    double loc = 0;
    double var = 1;             // scale^2
    double lower = -kInf;
    double upper = kInf;
    void validate() const;      // throws std::invalid_argument
};

struct TruncTParams {
    double loc = 0;
    double var = 1;             // scale^2
    double nu = 3;
    double lower = -kInf;
    double upper = kInf;
    void validate() const;
};

/// Inverse-gamma scale variable omega ~ IG(nu/2, nu/2) of the t scale mixture.
struct ScaleAugmentation {
    double omega = 1;
    double shape = 1.5;
    double rate = 1.5;
};

/// Truncated-normal draw: inverse CDF in the body, exponential rejection
/// (Robert) once the region sits >= 5 sd from loc.
double tn_sample(const TruncNormalParams& p, Rng& rng);
double tn_logpdf(double x, const TruncNormalParams& p);
double tn_cdf(double x, const TruncNormalParams& p);

/// Standard-normal truncated to [a, b]; building block for tn_sample.
double tn_sample_std(double a, double b, Rng& rng);

double tt_sample(const TruncTParams& p, Rng& rng);
double tt_logpdf(double x, const TruncTParams& p);
double tt_cdf(double x, const TruncTParams& p);

/// Density ~ x^{-shape-1} exp(-rate/x).
double invgamma_sample(double shape, double rate, Rng& rng);
double invgamma_logpdf(double x, double shape, double rate);

/// Lower Cholesky factor with escalating diagonal jitter:
/// 1e-10 * mean(diag), doubled up to 8 times, then a hard failure.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a);

Eigen::VectorXd mvn_chol_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// Draw using a precomputed lower factor L (cov = L L^T).
Eigen::VectorXd mvn_sample_with_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower,
                                     Rng& rng);

}  // namespace ehe
