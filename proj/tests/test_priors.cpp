#include "bsgm/priors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace bsgm;

namespace {

IndicatorMatrix random_indicators(Index rows, Index cols, Rng& rng) {
  IndicatorMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(0.5) ? 1 : 0;
  return m;
}

double laplace_cdf(double x, double lambda) {
  return x < 0.0 ? 0.5 * std::exp(lambda * x) : 1.0 - 0.5 * std::exp(-lambda * x);
}

}  // namespace

TEST_CASE("spike_slab_log_density examples") {
  CHECK(spike_slab_log_density(0.0, 0, 10.0) == 0.0);
  CHECK(spike_slab_log_density(0.0, 1, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
  CHECK(spike_slab_log_density(1.7, 1, 3.0) == spike_slab_log_density(-1.7, 1, 3.0));
  CHECK_THROWS_AS(spike_slab_log_density(0.1, 0, 1.0), InputError);
}

TEST_CASE("mrf_log_unnormalized examples") {
  Rng rng(1);
  const MrfPrior flat = MrfPrior::from_edges(4, {{0, 1}, {1, 2}}, 0.0, 0.0);
  for (int t = 0; t < 20; ++t)
    CHECK(mrf_log_unnormalized(random_indicators(2, 4, rng), random_indicators(3, 4, rng), flat) == 0.0);

  const MrfPrior p = MrfPrior::from_edges(4, {{0, 1}, {1, 2}}, -0.7, 1.3);
  CHECK(mrf_log_unnormalized(IndicatorMatrix::Zero(2, 4), IndicatorMatrix::Zero(1, 4), p) == 0.0);

  // single node: normalizing the two-point law gives odds exp(mu)
  const MrfPrior single = MrfPrior::from_edges(1, {}, std::log(3.0), 0.0);
  const IndicatorMatrix on = IndicatorMatrix::Ones(1, 1), off = IndicatorMatrix::Zero(1, 1);
  const IndicatorMatrix none(0, 1);
  const double l1 = mrf_log_unnormalized(on, none, single), l0 = mrf_log_unnormalized(off, none, single);
  const double prob_on = std::exp(l1) / (std::exp(l1) + std::exp(l0));
  CHECK(prob_on / (1.0 - prob_on) == doctest::Approx(3.0));

  // brute-force sum
  const IndicatorMatrix g = random_indicators(2, 4, rng), tau = random_indicators(1, 4, rng);
  double brute = -0.7 * (g.sum() + tau.sum());
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}) {
    for (Index j = 0; j < 2; ++j) brute += 1.3 * g(j, a) * g(j, b);
    brute += 1.3 * tau(0, a) * tau(0, b);
  }
  CHECK(mrf_log_unnormalized(g, tau, p) == doctest::Approx(brute));
}

TEST_CASE("MrfPrior construction errors") {
  CHECK_THROWS_AS(MrfPrior::from_edges(3, {{1, 1}}, 0.0, 0.0), InputError);
  CHECK_THROWS_AS(MrfPrior::from_edges(3, {{0, 3}}, 0.0, 0.0), InputError);
  CHECK_THROWS_AS(MrfPrior::from_edges(3, {}, 0.0, -1.0), InputError);
  const MrfPrior p = MrfPrior::from_edges(3, {{0, 1}, {1, 0}, {0, 1}}, 0.0, 1.0);
  CHECK(p.neighbors[0].size() == 1);
  CHECK(p.neighbors[1].size() == 1);
}

TEST_CASE("indicator_conditional_logit examples") {
  const MrfPrior flat = MrfPrior::from_edges(4, {{0, 1}}, 0.0, 0.0);
  CHECK(indicator_conditional_logit(IndicatorMatrix::Ones(1, 4), 0, 0, flat) == 0.0);

  const MrfPrior p = MrfPrior::from_edges(4, {{0, 1}, {0, 2}}, 0.0, 1.0);
  IndicatorMatrix g = IndicatorMatrix::Zero(1, 4);
  g(0, 1) = g(0, 2) = 1;
  CHECK(indicator_conditional_logit(g, 0, 0, p) == doctest::Approx(2.0));

  const MrfPrior q = MrfPrior::from_edges(4, {{0, 1}}, -1.25, 2.0);
  CHECK(indicator_conditional_logit(IndicatorMatrix::Ones(2, 4), 1, 3, q) == -1.25);
  CHECK(indicator_conditional_logit(IndicatorMatrix::Zero(2, 4), 0, 3, q) == -1.25);
}

TEST_CASE("conditional logit equals the flip difference of the joint") {
  Rng rng(42);
  const MrfPrior p = MrfPrior::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {0, 5}, {3, 5}, {4, 5}}, -0.4, 0.9);
  const MrfPrior indep = MrfPrior::from_edges(6, {}, 0.3, 0.0);
  for (int t = 0; t < 1000; ++t) {
    IndicatorMatrix g = random_indicators(2, 6, rng), tau = random_indicators(3, 6, rng);
    const bool outcome = rng.bernoulli(0.5);
    const Index row = outcome ? static_cast<Index>(rng.uniform() * 2) : static_cast<Index>(rng.uniform() * 3);
    const Index r = static_cast<Index>(rng.uniform() * 6);
    for (const MrfPrior* prior : {&p, &indep}) {
      IndicatorMatrix& target = outcome ? g : tau;
      target(row, r) = 1;
      const double on = mrf_log_unnormalized(g, tau, *prior);
      target(row, r) = 0;
      const double off = mrf_log_unnormalized(g, tau, *prior);
      const double logit =
          indicator_conditional_logit(outcome ? Side::Outcome : Side::Exposure, row, r, g, tau, *prior);
      REQUIRE(logit == doctest::Approx(on - off).epsilon(1e-12));
      REQUIRE(logit == indicator_conditional_logit(target, row, r, *prior));
      if (prior == &indep) REQUIRE(logit == 0.3);
    }
  }
}

TEST_CASE("Laplace scale mixture") {
  Rng rng(2023);
  const double lambda = 1.5;
  const long n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double psi = laplace_scale_mixture_draw(lambda, rng);
    REQUIRE(psi > 0.0);
    s += psi;
    s2 += psi * psi;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 2.0 / (lambda * lambda)) < 3.0 * se);

  const long m = 100000;
  std::vector<double> omega(m);
  for (long i = 0; i < m; ++i) omega[i] = std::sqrt(laplace_scale_mixture_draw(lambda, rng)) * rng.normal();
  std::sort(omega.begin(), omega.end());
  double ks = 0.0;
  for (long i = 0; i < m; ++i) {
    const double f = laplace_cdf(omega[i], lambda);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / m), std::abs(f - static_cast<double>(i + 1) / m)});
  }
  CHECK(ks < 0.01);

  CHECK_THROWS_AS(laplace_scale_mixture_draw(0.0, rng), InputError);
  CHECK(laplace_mixing_log_density(0.8, lambda) == doctest::Approx(std::log(lambda * lambda / 2.0) - lambda * lambda / 2.0 * 0.8));
}

TEST_CASE("inverse_gamma_log_density") {
  const double shape = 2.0, scale = 1.0;
  // Simpson quadrature of the density on (0, 400] with a substitution-free fine grid
  const int n = 2000000;
  const double hi = 400.0, h = hi / n;
  double s = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double x = i * h;
    s += std::exp(inverse_gamma_log_density(x, shape, scale)) * ((i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  s *= h / 3.0;
  const double tail = scale / hi;  // upper tail of IG(2, 1) beyond hi is about (scale/hi)^2 / 2 + ...
  CHECK(std::abs(s - 1.0) < 1e-5 + tail * tail);

  const double mode = scale / (shape + 1.0), eps = 1e-5;
  CHECK(inverse_gamma_log_density(mode - eps, shape, scale) < inverse_gamma_log_density(mode, shape, scale));
  CHECK(inverse_gamma_log_density(mode + eps, shape, scale) < inverse_gamma_log_density(mode, shape, scale));
  const double left = inverse_gamma_log_density(mode - 2 * eps, shape, scale) - inverse_gamma_log_density(mode - eps, shape, scale);
  const double right = inverse_gamma_log_density(mode + 2 * eps, shape, scale) - inverse_gamma_log_density(mode + eps, shape, scale);
  CHECK(left < 0.0);
  CHECK(right < 0.0);

  CHECK(std::isfinite(inverse_gamma_log_density(1.0, 0.01, 0.01)));
  CHECK_THROWS_AS(inverse_gamma_log_density(0.0, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(inverse_gamma_log_density(1.0, -1.0, 1.0), InputError);
}

TEST_CASE("log_prior is finite for a valid state and rejects breaches") {
  Hyperparameters hyper;
  hyper.H = hyper.J = 1;
  hyper.K = 1;
  ParameterState s = make_state(2, 3, 2, 1, 1, 1);
  s.psi_omega << 1.0;
  s.psi_eta << 1.0;
  const MrfPrior mrf = make_mrf_prior(hyper, 3);
  CHECK(std::isfinite(log_prior(s, hyper, mrf)));
  s.beta(0, 1) = 0.5;
  CHECK_THROWS_AS(log_prior(s, hyper, mrf), InputError);
}
