#include "ehe/dist.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ehe {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kSqrt1_2 = std::numbers::sqrt2 / 2.0;

// log(1 - exp(d)) for d <= 0.
double log1mexp(double d) {
    if (d >= 0.0) return -kInf;
    return d < -std::numbers::ln2 ? std::log1p(-std::exp(d)) : std::log(-std::expm1(d));
}

// Initial guess for the normal quantile (Acklam); refined below to full precision.
double norm_quantile_approx(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) return -norm_quantile_approx(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double norm_logcdf(double x) {
    if (x > -1.0) return std::log1p(-0.5 * std::erfc(x * kSqrt1_2));
    if (x > -37.0) {
        const double v = 0.5 * std::erfc(-x * kSqrt1_2);
        if (v > 0.0) return std::log(v);
    }
    // Asymptotic tail: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    const double ix2 = 1.0 / (x * x);
    const double s = 1.0 - ix2 * (1.0 - 3.0 * ix2 * (1.0 - 5.0 * ix2 * (1.0 - 7.0 * ix2)));
    return norm_logpdf(x) - std::log(-x) + std::log(s);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_quantile: p must lie in (0, 1)");
    double x = norm_quantile_approx(p);
    if (p >= 0.02425 && p <= 0.97575) {
        // Two Halley steps reach full double precision from the rational start.
        for (int i = 0; i < 2; ++i) {
            const double e = norm_cdf(x) - p;
            const double u = e * std::exp(0.5 * x * x + kLogSqrt2Pi);
            x -= u / (1.0 + 0.5 * x * u);
        }
        return x;
    }
    // Tail: Newton on log Phi, symmetric for the upper tail.
    const bool upper = p > 0.5;
    const double lp = std::log(upper ? 1.0 - p : p);
    if (upper) x = -x;
    for (int i = 0; i < 4; ++i) {
        const double lc = norm_logcdf(x);
        const double step = (lc - lp) * std::exp(lc - norm_logpdf(x));
        x -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) break;
    }
    return upper ? -x : x;
}

double log_prob_interval(double za, double zb) {
    if (!(zb > za)) return -kInf;
    if (za >= 0.0) {
        const double la = norm_logcdf(-za);
        const double lb = zb == kInf ? -kInf : norm_logcdf(-zb);
        return la + log1mexp(lb - la);
    }
    if (zb <= 0.0) {
        const double lb = norm_logcdf(zb);
        const double la = za == -kInf ? -kInf : norm_logcdf(za);
        return lb + log1mexp(la - lb);
    }
    return std::log(norm_cdf(zb) - norm_cdf(za));
}

// ---------------------------------------------------------------------------
// Student t
// ---------------------------------------------------------------------------

namespace {

// lgamma((nu+1)/2) - lgamma(nu/2) - 0.5*log(nu*pi), stable for huge nu.
double t_log_norm_const(double nu) {
    if (nu > 1e8) {
        // lgamma(a+1/2) - lgamma(a) = 0.5*log(a) - 1/(8a) + O(a^-3)
        const double a = 0.5 * nu;
        return 0.5 * std::log(a) - 1.0 / (8.0 * a) - 0.5 * std::log(nu * std::numbers::pi);
    }
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * std::numbers::pi);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double inc_beta_reg(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("inc_beta_reg: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_frac(a, b, x) / a;
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double t_logpdf(double x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("t_logpdf: nu must be positive");
    return t_log_norm_const(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double t_cdf(double x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("t_cdf: nu must be positive");
    if (x == 0.0) return 0.5;
    if (nu > 1e7) return norm_cdf(x);
    const double w = nu / (nu + x * x);
    const double half_tail = 0.5 * inc_beta_reg(0.5 * nu, 0.5, w);
    return x > 0.0 ? 1.0 - half_tail : half_tail;
}

double t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t_quantile: p must lie in (0, 1)");
    if (nu > 1e7) return norm_quantile(p);
    if (p == 0.5) return 0.0;
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;  // lower-tail mass of -|x|

    // Start from the moment-matched normal quantile, or the polynomial tail.
    double x;
    if (tail < 1e-4) {
        // Solve A*x^-nu/nu ~= tail  =>  x = (A/(nu*tail))^(1/nu), A = exp(C)*nu^((nu+1)/2).
        x = -std::exp((t_log_norm_const(nu) + 0.5 * (nu + 1.0) * std::log(nu) - std::log(nu * tail)) / nu);
    } else {
        const double z = norm_quantile(tail);
        x = nu > 2.0 ? z * std::sqrt(nu / (nu - 2.0)) : z * (1.0 + (z * z + 1.0) / (2.0 * nu));
    }
    if (x > -1e-12) x = -1e-12;

    // Safeguarded Newton on the lower tail.
    double lo = -kInf, hi = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double f = t_cdf(x, nu) - tail;
        if (f > 0.0) hi = std::min(hi, x); else lo = std::max(lo, x);
        const double step = f * std::exp(-t_logpdf(x, nu));
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = std::isinf(lo) ? 2.0 * x : 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-14 * std::max(1.0, std::abs(x))) { x = xn; break; }
        x = xn;
    }
    return upper ? -x : x;
}

// ---------------------------------------------------------------------------
// Truncated normal
// ---------------------------------------------------------------------------

void TruncNormalParams::validate() const {
    if (!(var > 0.0)) throw std::invalid_argument("truncated normal: scale^2 must be positive");
    if (!(lower < upper)) throw std::invalid_argument("truncated normal: lower must be < upper");
}

void TruncTParams::validate() const {
    if (!(var > 0.0)) throw std::invalid_argument("truncated t: scale^2 must be positive");
    if (!(nu > 0.0)) throw std::invalid_argument("truncated t: nu must be positive");
    if (!(lower < upper)) throw std::invalid_argument("truncated t: lower must be < upper");
}

namespace {

// One-sided tail rejection for standard normal on [a, b], a >= 5 (Robert 1995).
double robert_tail(double a, double b, Rng& rng) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double z = a + rng.exponential() / alpha;
        if (z > b) continue;
        const double diff = z - alpha;
        if (std::log(rng.uniform()) <= -0.5 * diff * diff) return z;
    }
}

}  // namespace

double tn_sample_std(double a, double b, Rng& rng) {
    if (a >= 5.0) return robert_tail(a, b, rng);
    if (b <= -5.0) return -robert_tail(-b, -a, rng);
    const double u = rng.uniform();
    double z;
    if (a >= 0.0) {
        // Work on the survival scale so the right tail keeps relative precision.
        const double sa = norm_cdf(-a);
        const double sb = b == kInf ? 0.0 : norm_cdf(-b);
        const double s = sa - u * (sa - sb);
        z = -norm_quantile(s);
    } else if (b <= 0.0) {
        const double fb = norm_cdf(b);
        const double fa = a == -kInf ? 0.0 : norm_cdf(a);
        z = norm_quantile(fa + u * (fb - fa));
    } else {
        const double fa = a == -kInf ? 0.0 : norm_cdf(a);
        const double fb = b == kInf ? 1.0 : norm_cdf(b);
        z = norm_quantile(fa + u * (fb - fa));
    }
    return std::clamp(z, a, b);
}

double tn_sample(const TruncNormalParams& p, Rng& rng) {
    p.validate();
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    return p.loc + sd * tn_sample_std(a, b, rng);
}

double tn_logpdf(double x, const TruncNormalParams& p) {
    p.validate();
    if (x < p.lower || x > p.upper) return -kInf;
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    const double z = (x - p.loc) / sd;
    return norm_logpdf(z) - std::log(sd) - log_prob_interval(a, b);
}

double tn_cdf(double x, const TruncNormalParams& p) {
    p.validate();
    if (x <= p.lower) return 0.0;
    if (x >= p.upper) return 1.0;
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    const double z = (x - p.loc) / sd;
    const double v = std::exp(log_prob_interval(a, z) - log_prob_interval(a, b));
    return std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Truncated t
// ---------------------------------------------------------------------------

double tt_sample(const TruncTParams& p, Rng& rng) {
    p.validate();
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    const double fa = a == -kInf ? 0.0 : t_cdf(a, p.nu);
    const double fb = b == kInf ? 1.0 : t_cdf(b, p.nu);
    const double u = fa + rng.uniform() * (fb - fa);
    const double z = std::clamp(t_quantile(std::clamp(u, 1e-300, 1.0 - 1e-16), p.nu), a, b);
    return p.loc + sd * z;
}

double tt_logpdf(double x, const TruncTParams& p) {
    p.validate();
    if (x < p.lower || x > p.upper) return -kInf;
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    const double z = (x - p.loc) / sd;
    const double fa = a == -kInf ? 0.0 : t_cdf(a, p.nu);
    const double fb = b == kInf ? 1.0 : t_cdf(b, p.nu);
    return t_logpdf(z, p.nu) - std::log(sd) - std::log(fb - fa);
}

double tt_cdf(double x, const TruncTParams& p) {
    p.validate();
    if (x <= p.lower) return 0.0;
    if (x >= p.upper) return 1.0;
    const double sd = std::sqrt(p.var);
    const double a = p.lower == -kInf ? -kInf : (p.lower - p.loc) / sd;
    const double b = p.upper == kInf ? kInf : (p.upper - p.loc) / sd;
    const double z = (x - p.loc) / sd;
    const double fa = a == -kInf ? 0.0 : t_cdf(a, p.nu);
    const double fb = b == kInf ? 1.0 : t_cdf(b, p.nu);
    return std::clamp((t_cdf(z, p.nu) - fa) / (fb - fa), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Inverse gamma
// ---------------------------------------------------------------------------

double invgamma_sample(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("invgamma_sample: shape and rate must be positive");
    return 1.0 / rng.gamma(shape, rate);
}

double invgamma_logpdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return -kInf;
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

// ---------------------------------------------------------------------------
// Multivariate normal
// ---------------------------------------------------------------------------

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a) {
    const double base = 1e-10 * a.diagonal().mean();
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 9; ++attempt) {
        Eigen::MatrixXd m = a;
        if (jitter > 0.0) m.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter = jitter == 0.0 ? base : 2.0 * jitter;
    }
    throw std::runtime_error("jittered_cholesky: matrix not positive definite after max jitter");
}

Eigen::VectorXd mvn_chol_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw std::invalid_argument("mvn_chol_sample: dimension mismatch");
    return mvn_sample_with_chol(mean, jittered_cholesky(cov), rng);
}

Eigen::VectorXd mvn_sample_with_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower,
                                     Rng& rng) {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + chol_lower * z;
}

}  // namespace ehe
