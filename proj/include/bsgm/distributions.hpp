#pragma once

#include <cstdint>
#include <random>

namespace bsgm {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

/// Random stream owned by exactly one chain / worker.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                  // (0, 1), never exactly 0
  double normal();                   // N(0, 1)
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double rate);   // mean 1 / rate
  double gamma(double shape, double rate);
  double inverse_gamma(double shape, double scale);
  /// Inverse-Gaussian with mean mu and shape lambda (Michael, Schucany & Haas).
  double inverse_gaussian(double mu, double lambda);
  /// N(mean, sd^2) truncated to (lower, inf).
  double truncated_normal_lower(double mean, double sd, double lower);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

double normal_log_density(double x, double mean, double variance);
double normal_cdf(double x);
/// log(1 - Phi(x)), accurate in both tails.
double log_normal_sf(double x);
/// log Phi(x)
double log_normal_cdf(double x);
double normal_quantile(double p);
/// Smallest x with 1 - Phi(x) = exp(log_p), for log_p in (-inf, 0).
double normal_upper_quantile_log(double log_p);

/// log(1 / (1 + exp(-x))), stable for large |x|.
double log_logistic(double x);

}  // namespace bsgm
