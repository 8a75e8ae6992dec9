#include "bsgm/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bsgm {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// Acklam's rational approximation, refined below with one Halley step.
double quantile_initial(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double Rng::uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 are excluded
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return std_normal_(engine_); }

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
  return -std::log(uniform()) / rate;
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: parameters must be positive");
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

double Rng::inverse_gaussian(double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("inverse_gaussian: parameters must be positive");
  const double nu = normal();
  const double y = nu * nu;
  const double mu_y = mu * y;
  // mu + mu^2 y / (2 lambda) - mu / (2 lambda) sqrt(4 mu lambda y + mu^2 y^2), rewritten
  // as mu - 2 mu (mu y) / (mu y + sqrt(...)) to avoid cancellation when mu y >> lambda
  const double root = mu_y + std::sqrt(mu_y * mu_y + 4.0 * mu_y * lambda);
  const double x = (root > 0.0) ? mu - 2.0 * mu * mu_y / root : mu;
  const double candidate = std::max(x, std::numeric_limits<double>::min());
  if (uniform() <= mu / (mu + candidate)) return candidate;
  return mu * mu / candidate;
}

double Rng::truncated_normal_lower(double mean, double sd, double lower) {
  if (!(sd > 0.0)) throw std::invalid_argument("truncated_normal_lower: sd must be positive");
  const double a = (lower - mean) / sd;
  const double x = normal_upper_quantile_log(log_normal_sf(a) + std::log(uniform()));
  const double z = (x > a) ? x : std::nextafter(a, std::numeric_limits<double>::infinity());
  const double value = mean + sd * z;
  return (value > lower) ? value : std::nextafter(lower, std::numeric_limits<double>::infinity());
}

double normal_log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double log_normal_sf(double x) {
  if (x < 35.0) return std::log(0.5 * std::erfc(x / kSqrt2));
  // asymptotic expansion of the Mills ratio
  const double x2 = x * x, inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * x2 - std::log(x) - kLogSqrt2Pi + std::log(series);
}

double log_normal_cdf(double x) { return log_normal_sf(-x); }

double normal_quantile(double p) {
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();
  double x = quantile_initial(p);
  const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double normal_upper_quantile_log(double log_p) {
  if (!(log_p < 0.0)) return -std::numeric_limits<double>::infinity();
  double x;
  if (log_p > -690.0) {
    x = (log_p < -0.6931471805599453) ? -normal_quantile(std::exp(log_p))
                                      : normal_quantile(-std::expm1(log_p));
    if (x < 5.0) return x;
  } else {
    x = std::sqrt(-2.0 * log_p);
  }
  // Newton on log(1 - Phi(x)) = log_p
  for (int it = 0; it < 60; ++it) {
    const double f = log_normal_sf(x) - log_p;
    const double log_hazard = -0.5 * x * x - kLogSqrt2Pi - log_normal_sf(x);
    const double step = f / std::exp(log_hazard);
    x += step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double log_logistic(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace bsgm
