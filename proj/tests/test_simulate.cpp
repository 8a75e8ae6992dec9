#include "bsgm/simulate.hpp"
#include "bsgm/effects.hpp"

#include <doctest.h>

#include <cmath>

using namespace bsgm;

namespace {

Index active(const Vector& weights) {
  Index n = 0;
  for (Index i = 0; i < weights.size(); ++i) n += weights[i] != 0.0;
  return n;
}

IndicatorMatrix mask(Index R, const std::vector<Edge>& edges) {
  IndicatorMatrix m = IndicatorMatrix::Zero(R, R);
  for (auto [a, b] : edges) m(a, b) = m(b, a) = 1;
  return m;
}

}  // namespace

TEST_CASE("rich and simple truths have the designed graph weights") {
  Rng rng(1);
  SimulationConfig rich;
  rich.setting = Setting::Rich;
  const SimulationTruth t = build_truth(rich, rng);
  CHECK(t.state.eta.size() == 3);
  CHECK(t.state.omega.size() == 3);
  CHECK(active(t.state.eta) == 2);
  CHECK(active(t.state.omega) == 1);
  CHECK(t.state.eta[0] == 0.8);
  CHECK(t.state.eta[2] == 0.9);
  CHECK(t.state.omega[0] == 1.2);
  CHECK(t.effects.nde == 1.4);
  CHECK(t.effects.te() == t.effects.nie + t.effects.nde);

  Rng rng2(1);
  const SimulationTruth s = build_truth(SimulationConfig{}, rng2);
  CHECK(s.state.eta.size() == 1);
  CHECK(s.state.omega.size() == 1);
  CHECK(s.state.eta[0] == 0.8);
  CHECK(s.state.omega[0] == 1.2);

  // 15% of 30 nodes, magnitudes in [0.5, 1], forced overlap
  CHECK(s.state.gamma.sum() == 5);
  CHECK(s.state.tau.sum() == 5);
  for (Index r = 0; r < 30; ++r) {
    if (s.state.gamma(0, r)) CHECK(std::abs(s.state.beta(0, r)) >= 0.5);
    if (s.state.gamma(0, r)) CHECK(std::abs(s.state.beta(0, r)) <= 1.0);
  }
  CHECK((s.state.gamma.array() * s.state.tau.array()).sum() >= 2);
  CHECK(s.mediating_mask.sum() > 0);
  CHECK(s.mediating_mask == true_mediating_mask(s.state));
  CHECK(s.effects.nie == doctest::Approx(effects_from_state(s.state).nie));
  CHECK(s.effects.nie != 0.0);
}

TEST_CASE("build_truth is reproducible and rejects infeasible sparsity") {
  Rng a(9), b(9);
  const SimulationTruth x = build_truth(SimulationConfig{}, a), y = build_truth(SimulationConfig{}, b);
  CHECK(x.state.beta == y.state.beta);
  CHECK(x.state.alpha == y.state.alpha);
  CHECK(x.state.tensor.node_factors == y.state.tensor.node_factors);

  SimulationConfig small;
  small.R = 6;  // round(0.9) = 1 nonzero entry
  Rng rng(1);
  CHECK_THROWS_AS(build_truth(small, rng), InputError);
  SimulationConfig bad;
  bad.N = 0;
  CHECK_THROWS_AS(validate(bad), InputError);
}

TEST_CASE("generated datasets are valid and reproducible") {
  Rng t(2);
  const SimulationTruth truth = build_truth(SimulationConfig{}, t);
  Rng a(5), b(5);
  const Dataset d = generate_dataset(truth, 100, a), e = generate_dataset(truth, 100, b);
  CHECK(validate(d).ok());
  REQUIRE(d.size() == 100);
  CHECK(d.nodes() == 30);
  CHECK(d.covariates() == 4);
  for (Index i = 0; i < d.size(); ++i) {
    CHECK(d.records[i].time == e.records[i].time);
    CHECK(d.networks[i] == e.networks[i]);
    CHECK(d.networks[i] == d.networks[i].transpose());
    CHECK(d.networks[i].diagonal().isZero(0));
    const double bin = d.records[i].covariates[3];
    CHECK((bin == 0.0 || bin == 1.0));
  }
}

TEST_CASE("degenerate truth gives pure-noise log times") {
  Rng rng(3);
  SimulationTruth truth = build_truth(SimulationConfig{}, rng);
  ParameterState& s = truth.state;
  s.beta.setZero();
  s.gamma.setZero();
  s.alpha.setZero();
  s.tau.setZero();
  s.beta_x.setZero();
  s.beta_z = 0.0;
  s.tensor.covariate_factors.setZero();
  // draw_log_time directly: no censoring involved
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vector x = draw_covariates(rng);
    const ConnectivityMatrix a = draw_network(s, x, i % 2, rng);
    const double y = draw_log_time(s, x, i % 2, a, rng);
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(0.4 / n));
  CHECK(var == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("network generator mean matches the model") {
  Rng rng(4);
  const SimulationTruth truth = build_truth(SimulationConfig{}, rng);
  Vector x(4);
  x << 1.0, 0.3, -0.5, 1.0;
  SurvivalRecord rec;
  rec.covariates = x;
  rec.exposure = 1;
  Matrix mean = Matrix::Zero(30, 30);
  const int n = 4000;
  for (int i = 0; i < n; ++i) mean += draw_network(truth.state, x, 1, rng);
  mean /= n;
  // oracle: hollow of the tensor contraction plus the exposure term
  Matrix expected = tensor_covariate_contraction(truth.state.tensor, x);
  for (Index h = 0; h < truth.state.alpha.rows(); ++h)
    expected += truth.state.eta[h] * truth.state.alpha.row(h).transpose() * truth.state.alpha.row(h);
  expected = hollow(expected);
  const double se = std::sqrt(0.4 / n);
  CHECK((mean - expected).cwiseAbs().maxCoeff() < 4.5 * se);
}

TEST_CASE("scenario A censoring proportion is stable across seeds") {
  Rng t(6);
  const SimulationTruth truth = build_truth(SimulationConfig{}, t);
  std::vector<double> fractions;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    const Dataset d = generate_dataset(truth, 100, rng);
    double censored = 0.0;
    for (const auto& r : d.records) censored += r.event == 0;
    fractions.push_back(censored / 100.0);
  }
  double mean = 0.0;
  for (double f : fractions) mean += f;
  mean /= fractions.size();
  MESSAGE("scenario A censoring proportion " << mean);
  int outside = 0;
  for (double f : fractions) outside += std::abs(f - mean) > 0.15;
  CHECK(outside <= 5);
  CHECK(mean > 0.0);
  CHECK(mean < 0.6);
}

TEST_CASE("scenario A censoring is independent of the covariates") {
  Rng t(7);
  SimulationConfig c;
  c.N = 4000;
  const SimulationTruth truth = build_truth(c, t);
  Rng rng(8);
  GenerationLog log;
  const Dataset d = generate_dataset(truth, c.N, rng, &log);
  CHECK(log.resampled_covariates == 0);
  double low = 0.0, high = 0.0;
  double nl = 0.0, nh = 0.0;
  for (const auto& r : d.records) {
    if (r.event) continue;
    if (r.covariates[3] == 1.0)
      high += r.time, ++nh;
    else
      low += r.time, ++nl;
  }
  REQUIRE(nl > 50);
  REQUIRE(nh > 50);
  // censored times are Exp(0.4) draws conditioned on C < T, so both group means sit below 1 / 0.4
  CHECK(low / nl < 2.5);
  CHECK(high / nh < 2.5);
}

TEST_CASE("scenario B resamples nonpositive rates and records xi") {
  Rng t(9);
  SimulationConfig c;
  c.scenario = Scenario::B;
  const SimulationTruth truth = build_truth(c, t);
  CHECK(truth.scenario == Scenario::B);
  CHECK(truth.censor_rate_params == c.xi);
  Rng rng(10);
  GenerationLog log;
  const Dataset d = generate_dataset(truth, 500, rng, &log);
  CHECK(log.resampled_covariates > 0);
  for (const auto& r : d.records) CHECK(r.covariates.tail(3).dot(c.xi) > 0.0);
}

TEST_CASE("evaluate_selection examples") {
  const IndicatorMatrix truth = mask(4, {{0, 1}, {1, 2}});
  SelectionAccuracy same = evaluate_selection(truth, truth);
  CHECK(same.sensitivity == 1.0);
  CHECK(same.specificity == 1.0);

  SelectionAccuracy none = evaluate_selection(IndicatorMatrix::Zero(4, 4), truth);
  CHECK(none.sensitivity == 0.0);
  CHECK(none.specificity == 1.0);

  // 1 TP (0,1), 1 FN (1,2), 1 FP (2,3); of the 4 true negatives, 3 are kept
  const IndicatorMatrix est = mask(4, {{0, 1}, {2, 3}});
  SelectionAccuracy mixed = evaluate_selection(est, truth);
  CHECK(*mixed.sensitivity == doctest::Approx(0.5));
  CHECK(*mixed.specificity == doctest::Approx(3.0 / 4.0));

  SelectionAccuracy empty_truth = evaluate_selection(est, IndicatorMatrix::Zero(4, 4));
  CHECK(!empty_truth.sensitivity.has_value());
  CHECK(*empty_truth.specificity == doctest::Approx(4.0 / 6.0));

  CHECK_THROWS_AS(evaluate_selection(IndicatorMatrix::Zero(3, 3), truth), InputError);
}

TEST_CASE("replication study aggregates replicates") {
  StudyConfig c;
  c.simulation.N = 40;
  c.simulation.R = 14;
  c.hyper.H = c.hyper.J = 1;
  c.hyper.K = 2;
  c.chain.iterations = 300;
  c.chain.burn_in = 150;
  c.replicates = 3;
  c.seed = 5;
  const StudyReport r = run_replication_study(c);
  CHECK(r.replicates == 3);
  CHECK(r.completed + r.failures == 3);
  CHECK(r.details.size() == 3);
  CHECK(r.truth.effects.nde == 1.4);
  CHECK(r.nie.coverage >= 0.0);
  CHECK(r.nie.coverage <= 1.0);
  // determinism
  const StudyReport again = run_replication_study(c);
  CHECK(again.nie.mean == r.nie.mean);
  CHECK(again.te.bias_pct == r.te.bias_pct);
}
