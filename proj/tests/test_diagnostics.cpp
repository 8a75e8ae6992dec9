#include "bsgm/diagnostics.hpp"
#include "bsgm/likelihood.hpp"
#include "bsgm/sampler.hpp"
#include "bsgm/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bsgm;

namespace {

std::vector<double> normal_chain(Rng& rng, long n, double mean = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = mean + rng.normal();
  return x;
}

Dataset small_dataset(std::uint64_t seed) {
  Rng rng(seed);
  SimulationConfig c;
  c.N = 30;
  c.R = 6;
  c.sparsity = 0.34;
  return generate_dataset(build_truth(c, rng), c.N, rng);
}

}  // namespace

TEST_CASE("gelman_rubin examples") {
  Rng rng(1);
  const double same = gelman_rubin({normal_chain(rng, 10000), normal_chain(rng, 10000), normal_chain(rng, 10000)});
  CHECK(same > 0.99);
  CHECK(same < 1.05);

  CHECK(gelman_rubin({normal_chain(rng, 1000, 0.0), normal_chain(rng, 1000, 100.0)}) > 1.2);

  const double mixed = gelman_rubin({std::vector<double>(100, 2.0), normal_chain(rng, 100, 2.0)});
  CHECK(std::isfinite(mixed));

  CHECK_THROWS_AS(gelman_rubin({std::vector<double>(100, 1.0), std::vector<double>(100, 1.0)}), InputError);
  CHECK_THROWS_AS(gelman_rubin({normal_chain(rng, 100)}), InputError);
  CHECK_THROWS_AS(gelman_rubin({normal_chain(rng, 100), normal_chain(rng, 99)}), InputError);
}

TEST_CASE("gelman_rubin approaches one with longer chains") {
  double shorter = 0.0, longer = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(100 + rep);
    shorter += gelman_rubin({normal_chain(rng, 100), normal_chain(rng, 100), normal_chain(rng, 100)});
    longer += gelman_rubin({normal_chain(rng, 10000), normal_chain(rng, 10000), normal_chain(rng, 10000)});
  }
  CHECK(std::abs(longer / 20 - 1.0) < std::abs(shorter / 20 - 1.0));
}

TEST_CASE("gelman_rubin matches a direct evaluation of the split-chain formula") {
  Rng rng(2);
  const std::vector<double> a = normal_chain(rng, 20, 0.0), b = normal_chain(rng, 20, 0.7);
  std::vector<std::vector<double>> halves{{a.begin(), a.begin() + 10}, {a.begin() + 10, a.end()},
                                          {b.begin(), b.begin() + 10}, {b.begin() + 10, b.end()}};
  double w = 0.0, grand = 0.0;
  std::vector<double> means;
  for (const auto& h : halves) {
    double m = 0.0;
    for (double v : h) m += v;
    m /= 10.0;
    double s = 0.0;
    for (double v : h) s += (v - m) * (v - m);
    w += s / 9.0;
    means.push_back(m);
    grand += m;
  }
  w /= 4.0;
  grand /= 4.0;
  double b_over_n = 0.0;
  for (double m : means) b_over_n += (m - grand) * (m - grand);
  b_over_n /= 3.0;
  const double expected = std::sqrt((9.0 / 10.0 * w + b_over_n) / w);
  CHECK(gelman_rubin({a, b}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("effective_sample_size examples") {
  Rng rng(3);
  const long n = 10000;
  const EssResult iid = effective_sample_size(normal_chain(rng, n));
  CHECK(iid.ess > 0.8 * n);
  CHECK(iid.ess <= n);
  CHECK(!iid.degenerate);

  std::vector<double> ar(static_cast<std::size_t>(n));
  const double phi = 0.9;
  ar[0] = rng.normal() / std::sqrt(1.0 - phi * phi);
  for (long t = 1; t < n; ++t) ar[t] = phi * ar[t - 1] + rng.normal();
  const double expected = n * (1.0 - phi) / (1.0 + phi);
  CHECK(effective_sample_size(ar).ess == doctest::Approx(expected).epsilon(0.3));

  const EssResult flat = effective_sample_size(std::vector<double>(50, 3.0));
  CHECK(flat.degenerate);
  CHECK(flat.ess == 50.0);

  CHECK_THROWS_AS(effective_sample_size(std::vector<double>(5, 1.0)), InputError);
}

TEST_CASE("diagnose covers every monitored scalar") {
  const Dataset d = small_dataset(4);
  Hyperparameters hyper;
  hyper.H = 2;
  hyper.J = 1;
  hyper.K = 2;
  ChainConfig c;
  c.iterations = 200;
  c.burn_in = 100;
  const auto chains = run_chains(d, hyper, c, 2, 1);
  const std::vector<const DrawStore*> ptrs{&chains[0], &chains[1]};
  const auto diag = diagnose(ptrs);
  const std::vector<std::string> expected{"nie", "nde", "te", "sigma0_sq", "sigma1_sq", "omega_1", "eta_1", "eta_2"};
  REQUIRE(diag.size() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    CHECK(diag[k].name == expected[k]);
    CHECK(diag[k].rhat.has_value());
    CHECK(diag[k].ess > 0.0);
  }
  CHECK(monitored_trace(chains[0], "eta_2")[5] == chains[0].states[5].eta[1]);
  CHECK_THROWS_AS(monitored_trace(chains[0], "eta_3"), InputError);

  const auto single = diagnose({&chains[0]});
  CHECK(!single[0].rhat.has_value());
}

TEST_CASE("BIC of a point-mass posterior equals the likelihood oracle") {
  const Dataset d = small_dataset(5);
  Hyperparameters hyper;
  hyper.H = hyper.J = 1;
  hyper.K = 2;
  Rng rng(6);
  ParameterState s = random_initial_state(d, hyper, rng);
  DrawStore store;
  for (int t = 0; t < 5; ++t) store.states.push_back(s);
  const Index N = d.size(), R = d.nodes(), Q = d.covariates();
  const double ll = aft_log_likelihood(s, d) + mediator_log_likelihood(s, d);
  const Index selected = s.gamma.sum() + s.tau.sum();
  const Index graphs = (s.gamma.sum() > 0) + (s.tau.sum() > 0);
  const Index p = Q + 1 + hyper.K * (R + Q) + 2 + selected + graphs;
  CHECK(bic_score(store, d) == doctest::Approx(-2.0 * ll + p * std::log(static_cast<double>(N))).epsilon(1e-10));
  CHECK(posterior_mean_fit({&store}, d).parameters == p);
}

TEST_CASE("BIC penalty grows with retained zero-effect nodes and ignores draw order") {
  const Dataset d = small_dataset(7);
  Hyperparameters hyper;
  hyper.H = hyper.J = 1;
  hyper.K = 1;
  Rng rng(8);
  ParameterState s = random_initial_state(d, hyper, rng);
  s.gamma.setZero();
  s.beta.setZero();
  s.gamma(0, 0) = 1;
  s.beta(0, 0) = 0.8;
  s.gamma(0, 1) = 1;
  s.beta(0, 1) = -0.5;
  ParameterState extra = s;
  extra.gamma(0, 3) = 1;  // retained with a zero coefficient: same likelihood, one more parameter
  DrawStore a, b;
  for (int t = 0; t < 4; ++t) a.states.push_back(s), b.states.push_back(extra);
  CHECK(bic_score(b, d) == doctest::Approx(bic_score(a, d) + std::log(static_cast<double>(d.size()))));
  CHECK(bic_score(b, d) > bic_score(a, d));

  DrawStore varied;
  for (int t = 0; t < 6; ++t) {
    ParameterState v = s;
    v.beta(0, 0) = 0.5 + 0.1 * t;
    v.sigma0_sq = 0.3 + 0.05 * t;
    varied.states.push_back(v);
  }
  DrawStore reversed = varied;
  std::reverse(reversed.states.begin(), reversed.states.end());
  CHECK(bic_score(reversed, d) == doctest::Approx(bic_score(varied, d)).epsilon(1e-12));
}

TEST_CASE("tune") {
  const Dataset d = small_dataset(9);
  ChainConfig c;
  c.iterations = 120;
  c.burn_in = 60;
  c.seed = 3;
  TuningGrid single;
  single.H = {1};
  single.J = {1};
  single.base.K = 2;
  const TuningResult one = tune(d, single, c);
  REQUIRE(one.cells.size() == 1);
  CHECK(one.best_index == 0);
  CHECK(one.best.H == 1);
  CHECK(one.cells[0].ok);

  TuningGrid twice = single;
  twice.H = {2, 2};
  const TuningResult dup = tune(d, twice, c);
  REQUIRE(dup.cells.size() == 2);
  CHECK(std::isfinite(dup.cells[0].bic));
  CHECK(dup.cells[1].bic == dup.cells[0].bic);
  CHECK(dup.best_index == 0);

  TuningGrid grid = single;
  grid.H = {1, 2};
  grid.J = {1, 2};
  const TuningResult full = tune(d, grid, c);
  REQUIRE(full.cells.size() == 4);
  for (const auto& cell : full.cells) CHECK(cell.bic >= full.cells[full.best_index].bic);
  CHECK(tune(d, grid, c).cells[3].bic == full.cells[3].bic);

  TuningGrid empty = single;
  empty.H = {};
  CHECK_THROWS_AS(tune(d, empty, c), InputError);
}
