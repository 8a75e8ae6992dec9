#include "bsgm/distributions.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace bsgm;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0, se = 0.0;
};

template <typename Fn>
Moments moments(long n, Fn&& draw) {
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.mean = s / n;
  m.var = s2 / n - m.mean * m.mean;
  m.se = std::sqrt(m.var / n);
  return m;
}

/// Upper tail of the standard normal by Simpson quadrature of the density on [x, x + 40].
double quadrature_sf(double x) {
  const int n = 200000;
  const double h = 40.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = x + i * h;
    const double f = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    s += f * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("normal log density") {
  CHECK(normal_log_density(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
  CHECK(normal_log_density(3.0, 1.0, 4.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI * 4.0) - 0.5 * 4.0 / 4.0));
}

TEST_CASE("normal tail functions agree with quadrature") {
  for (double x : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.5, 4.0}) {
    CHECK(std::exp(log_normal_sf(x)) == doctest::Approx(quadrature_sf(x)).epsilon(1e-8));
    CHECK(normal_cdf(x) == doctest::Approx(1.0 - quadrature_sf(x)).epsilon(1e-8));
  }
  CHECK(std::exp(log_normal_sf(1.0)) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("log_normal_sf is continuous across the asymptotic switch") {
  const double below = log_normal_sf(34.999999), above = log_normal_sf(35.0);
  CHECK(std::abs(below - above) < 1e-4);
  // leading-order Mills ratio: log(phi(x) / x)
  const double x = 60.0;
  CHECK(log_normal_sf(x) == doctest::Approx(-0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * M_PI)).epsilon(1e-6));
  CHECK(std::isfinite(log_normal_sf(1e3)));
}

TEST_CASE("normal quantiles invert the cdf") {
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-6})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  for (double lp : {-1e-3, -0.5, -3.0, -50.0, -700.0, -5000.0})
    CHECK(log_normal_sf(normal_upper_quantile_log(lp)) == doctest::Approx(lp).epsilon(1e-9));
}

TEST_CASE("log_logistic") {
  CHECK(log_logistic(0.0) == doctest::Approx(std::log(0.5)));
  CHECK(log_logistic(2.0) == doctest::Approx(std::log(1.0 / (1.0 + std::exp(-2.0)))));
  CHECK(log_logistic(-800.0) == doctest::Approx(-800.0));
  CHECK(log_logistic(800.0) == doctest::Approx(0.0));
}

TEST_CASE("uniform excludes the endpoints") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("sampler moments") {
  Rng rng(2024);
  const long n = 200000;

  auto e = moments(n, [&] { return rng.exponential(2.5); });
  CHECK(std::abs(e.mean - 0.4) < 4.0 * e.se);

  auto g = moments(n, [&] { return rng.gamma(3.0, 2.0); });
  CHECK(std::abs(g.mean - 1.5) < 4.0 * g.se);
  CHECK(g.var == doctest::Approx(0.75).epsilon(0.03));

  auto ig = moments(n, [&] { return rng.inverse_gamma(5.0, 2.0); });
  CHECK(std::abs(ig.mean - 0.5) < 4.0 * ig.se);

  // inverse-Gaussian(mu, lambda): mean mu, variance mu^3 / lambda
  auto w = moments(n, [&] { return rng.inverse_gaussian(1.5, 4.0); });
  CHECK(std::abs(w.mean - 1.5) < 4.0 * w.se);
  CHECK(w.var == doctest::Approx(1.5 * 1.5 * 1.5 / 4.0).epsilon(0.05));

  auto small = moments(n, [&] { return rng.inverse_gaussian(1e3, 1e-2); });
  CHECK(std::isfinite(small.mean));
}

TEST_CASE("truncated normal respects the bound and matches the mean identity") {
  Rng rng(7);
  const double mu = 0.3, sd = 1.7;
  // lower bound at the mean: E = mu + sd phi(0) / (1 - Phi(0)) = mu + sd * 0.79788...
  auto m = moments(100000, [&] {
    const double x = rng.truncated_normal_lower(mu, sd, mu);
    REQUIRE(x > mu);
    return x;
  });
  CHECK(std::abs(m.mean - (mu + sd * std::sqrt(2.0 / M_PI))) < 3.5 * m.se);

  // deep tail: bound 12 sd above the mean
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.truncated_normal_lower(0.0, 1.0, 12.0);
    REQUIRE(x > 12.0);
    REQUIRE(x < 13.5);
  }
  // bound far below the mean behaves like the untruncated normal
  auto far = moments(100000, [&] { return rng.truncated_normal_lower(2.0, 1.0, -20.0); });
  CHECK(std::abs(far.mean - 2.0) < 4.0 * far.se);
}

TEST_CASE("streams are reproducible") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(0.7, 1.3) == b.gamma(0.7, 1.3));
    CHECK(a.truncated_normal_lower(0.0, 1.0, 0.5) == b.truncated_normal_lower(0.0, 1.0, 0.5));
  }
}
