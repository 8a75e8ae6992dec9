#include "bsgm/oracle.hpp"
#include "bsgm/likelihood.hpp"
#include "bsgm/sampler.hpp"
#include "bsgm/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace bsgm;

namespace {

ParameterState hand_state() {
  ParameterState s = make_state(0, 3, 1, 1, 1, 1);
  s.omega << 2.0;
  s.gamma.row(0) << 1, 1, 0;
  s.beta.row(0) << 1, 1, 0;
  s.eta << 0.5;
  s.tau.row(0) << 1, 1, 0;
  s.alpha.row(0) << 1, 1, 0;
  s.beta_z = 1.4;
  s.sigma0_sq = 0.4;
  s.sigma1_sq = 0.4;
  return s;
}

}  // namespace

TEST_CASE("make_report applies the bound") {
  const OracleReport r = make_report("x", 1.0, 1.2, 0.1, 0.3);
  CHECK(r.pass);
  CHECK(r.z() == doctest::Approx(2.0));
  CHECK(!make_report("y", 1.0, 1.5, 0.1, 0.3).pass);
  CHECK(make_report("z", 1.0, 1.0, 0.0, 0.0).z() == 0.0);
}

TEST_CASE("Monte Carlo effect oracle examples") {
  Rng rng(1);
  const Vector x = Vector::Ones(1);
  const ParameterState s = hand_state();
  const MonteCarloEffects mc = mc_effect_oracle(s, x, 100000, rng);
  CHECK(std::abs(mc.nie - 2.0) < 3.0 * mc.nie_se);
  CHECK(std::abs(mc.nde - 1.4) < 3.0 * mc.nde_se);
  CHECK(std::abs(mc.te - 3.4) < 3.0 * mc.te_se);
  CHECK(std::abs(mc.nie_log_expected - 2.0) < 3.0 * mc.nie_log_expected_se);

  ParameterState zero = s;
  zero.omega.setZero();
  zero.eta.setZero();
  const MonteCarloEffects z = mc_effect_oracle(zero, x, 100000, rng);
  CHECK(std::abs(z.nie) < 3.0 * z.nie_se);
}

TEST_CASE("Monte Carlo SE shrinks like one over root n") {
  Rng rng(2);
  const ParameterState s = hand_state();
  const Vector x = Vector::Ones(1);
  const MonteCarloEffects small = mc_effect_oracle(s, x, 10000, rng);
  const MonteCarloEffects large = mc_effect_oracle(s, x, 160000, rng);
  CHECK(small.nie_se / large.nie_se == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("effect oracle reports pass on random states") {
  Rng rng(3);
  for (int t = 0; t < 3; ++t) {
    const ParameterState s = random_effect_state(5, rng);
    Vector x(4);
    x << 1.0, rng.normal(), rng.normal(), 1.0;
    for (const auto& r : effect_oracle_reports(s, x, 20000, rng)) {
      INFO(r.statistic << " oracle " << r.oracle << " engine " << r.engine << " se " << r.se);
      CHECK(r.pass);
    }
  }
  CHECK_THROWS_AS(random_effect_state(1, rng), InputError);
}

TEST_CASE("joint_log_density properties") {
  Rng rng(4);
  SimulationConfig c;
  c.N = 20;
  c.R = 5;
  c.sparsity = 0.4;
  const Dataset d = generate_dataset(build_truth(c, rng), c.N, rng);
  Hyperparameters hyper;
  hyper.H = hyper.J = hyper.K = 2;
  for (int t = 0; t < 20; ++t) {
    const ParameterState s = random_initial_state(d, hyper, rng);
    CHECK(std::isfinite(joint_log_density(s, d, hyper)));
  }

  // shifting latent log-times changes only the AFT term
  ParameterState s = random_initial_state(d, hyper, rng);
  ParameterState shifted = s;
  for (Index i = 0; i < d.size(); ++i)
    if (!d.records[i].event) shifted.latent_log_times[i] += 0.3;
  const LinearPredictors lp = linear_predictors(s, d);
  double aft_before = 0.0, aft_after = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    aft_before += normal_log_density(s.latent_log_times[i], lp.aft_mean[i], s.sigma0_sq);
    aft_after += normal_log_density(shifted.latent_log_times[i], lp.aft_mean[i], s.sigma0_sq);
  }
  CHECK(joint_log_density(shifted, d, hyper) - joint_log_density(s, d, hyper) ==
        doctest::Approx(aft_after - aft_before).epsilon(1e-10));

  ParameterState broken = s;
  broken.gamma.setZero();
  broken.beta.setConstant(0.2);
  CHECK_THROWS_AS(joint_log_density(broken, d, hyper), InputError);

  ParameterState below = s;
  for (Index i = 0; i < d.size(); ++i)
    if (!d.records[i].event) below.latent_log_times[i] = std::log(d.records[i].time) - 1.0;
  CHECK_THROWS_AS(joint_log_density(below, d, hyper), InputError);
}

TEST_CASE("sample_from_prior respects dimensions and indicator zeros") {
  Hyperparameters hyper;
  hyper.H = 2;
  hyper.J = 1;
  hyper.K = 2;
  Rng rng(5);
  const ParameterState s = sample_from_prior(hyper, 10, 4, 3, rng);
  CHECK(s.beta.rows() == 1);
  CHECK(s.alpha.rows() == 2);
  CHECK(s.tensor.covariate_factors.cols() == 3);
  for (Index r = 0; r < 4; ++r)
    if (!s.gamma(0, r)) CHECK(s.beta(0, r) == 0.0);
  hyper.mrf_nu = 1.0;
  CHECK_THROWS_AS(sample_from_prior(hyper, 10, 4, 3, rng), InputError);
}

TEST_CASE("Geweke test is deterministic and passes at small scale") {
  GewekeConfig c;
  c.samples = 1500;
  c.seed = 7;
  const auto a = geweke_test(c), b = geweke_test(c);
  REQUIRE(a.size() == 6);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].statistic == b[k].statistic);
    CHECK(a[k].engine == b[k].engine);
    CHECK(a[k].oracle == b[k].oracle);
    INFO(a[k].statistic << " z = " << a[k].z());
    CHECK(std::abs(a[k].z()) < 4.0);
  }
}

TEST_CASE("grid posterior oracle") {
  // Normal mean with N(0, 4) prior and 5 unit-variance observations
  const std::vector<double> y{0.3, 1.1, -0.4, 0.8, 1.6};
  auto log_post = [&](const Vector& v) {
    double lp = -0.5 * v[0] * v[0] / 4.0;
    for (double yi : y) lp += -0.5 * (yi - v[0]) * (yi - v[0]);
    return lp;
  };
  double sum = 0.0;
  for (double yi : y) sum += yi;
  const double precision = 1.0 / 4.0 + 5.0;
  const GridPosterior g = grid_posterior_oracle(log_post, {{-3.0, 3.0, 601}});
  CHECK(g.mean[0] == doctest::Approx(sum / precision).epsilon(1e-3));
  CHECK(g.covariance(0, 0) == doctest::Approx(1.0 / precision).epsilon(1e-3));
  CHECK(g.box_mass > 0.999);

  // symmetric two-parameter density
  auto sym = [](const Vector& v) { return -0.5 * (v[0] * v[0] + v[1] * v[1] + v[0] * v[1]); };
  const GridPosterior s = grid_posterior_oracle(sym, {{-8.0, 8.0, 161}, {-8.0, 8.0, 161}});
  CHECK(std::abs(s.mean[0]) < 1e-6);
  CHECK(std::abs(s.mean[1]) < 1e-6);
  CHECK(s.covariance(0, 1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-3));

  CHECK_THROWS_AS(grid_posterior_oracle(log_post, {{-0.2, 0.2, 101}}), std::runtime_error);
}
