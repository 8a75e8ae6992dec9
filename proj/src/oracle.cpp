#include "bsgm/oracle.hpp"

#include "bsgm/diagnostics.hpp"
#include "bsgm/likelihood.hpp"
#include "bsgm/priors.hpp"
#include "bsgm/sampler.hpp"
#include "bsgm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bsgm {

double OracleReport::z() const { return se > 0.0 ? (engine - oracle) / se : 0.0; }

OracleReport make_report(std::string statistic, double oracle, double engine, double se, double bound) {
  OracleReport r;
  r.statistic = std::move(statistic);
  r.oracle = oracle;
  r.engine = engine;
  r.se = se;
  r.bound = bound;
  r.pass = std::abs(oracle - engine) <= bound;
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo effect oracle
// ---------------------------------------------------------------------------

namespace {

struct WorldSample {
  double mean = 0.0;
  double var_of_mean = 0.0;
  double log_mean_exp = 0.0;
  double var_of_log_mean_exp = 0.0;
};

WorldSample simulate_world(const ParameterState& state, const Vector& x, int z_outcome, int z_mediator, long draws,
                           Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(draws));
  for (auto& value : v) {
    const ConnectivityMatrix a = draw_network(state, x, z_mediator, rng);
    value = draw_log_time(state, x, z_outcome, a, rng);
  }
  const double n = static_cast<double>(draws);
  WorldSample w;
  w.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double value : v) ss += (value - w.mean) * (value - w.mean);
  w.var_of_mean = ss / (n - 1.0) / n;

  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double value : v) sum += std::exp(value - top);
  const double scaled_mean = sum / n;
  w.log_mean_exp = top + std::log(scaled_mean);
  double ss_exp = 0.0;
  for (double value : v) {
    const double ratio = std::exp(value - top) / scaled_mean - 1.0;
    ss_exp += ratio * ratio;
  }
  w.var_of_log_mean_exp = ss_exp / (n - 1.0) / n;  // delta method: var(m-hat) / m^2
  return w;
}

}  // namespace

MonteCarloEffects mc_effect_oracle(const ParameterState& state, const Vector& x, long draws, Rng& rng, int z,
                                   int z_star) {
  if (draws < 2) throw InputError("mc_effect_oracle: need at least 2 draws");
  if (x.size() != state.beta_x.size()) throw InputError("mc_effect_oracle: covariate length mismatch");
  const WorldSample both = simulate_world(state, x, z, z, draws, rng);
  const WorldSample cross = simulate_world(state, x, z, z_star, draws, rng);
  const WorldSample ref = simulate_world(state, x, z_star, z_star, draws, rng);
  MonteCarloEffects m;
  m.nie = both.mean - cross.mean;
  m.nde = cross.mean - ref.mean;
  m.te = both.mean - ref.mean;
  m.nie_se = std::sqrt(both.var_of_mean + cross.var_of_mean);
  m.nde_se = std::sqrt(cross.var_of_mean + ref.var_of_mean);
  m.te_se = std::sqrt(both.var_of_mean + ref.var_of_mean);
  m.nie_log_expected = both.log_mean_exp - cross.log_mean_exp;
  m.nde_log_expected = cross.log_mean_exp - ref.log_mean_exp;
  m.te_log_expected = both.log_mean_exp - ref.log_mean_exp;
  m.nie_log_expected_se = std::sqrt(both.var_of_log_mean_exp + cross.var_of_log_mean_exp);
  m.nde_log_expected_se = std::sqrt(cross.var_of_log_mean_exp + ref.var_of_log_mean_exp);
  m.te_log_expected_se = std::sqrt(both.var_of_log_mean_exp + ref.var_of_log_mean_exp);
  return m;
}

ParameterState random_effect_state(Index R, Rng& rng) {
  if (R < 2) throw InputError("random_effect_state: R must be at least 2");
  ParameterState s = make_state(0, R, 4, 2, 2, 2);
  auto sign = [&] { return rng.bernoulli(0.5) ? 1.0 : -1.0; };
  auto fill = [&](Matrix& coef, IndicatorMatrix& ind, Index row) {
    std::vector<Index> nodes;
    for (Index r = 0; r < R; ++r)
      if (rng.bernoulli(0.6)) nodes.push_back(r);
    while (nodes.size() < 2) {
      const auto r = static_cast<Index>(rng.uniform() * static_cast<double>(R));
      if (std::find(nodes.begin(), nodes.end(), r) == nodes.end()) nodes.push_back(r);
    }
    for (Index r : nodes) {
      ind(row, r) = 1;
      coef(row, r) = sign() * (0.3 + 0.5 * rng.uniform());
    }
  };
  for (Index j = 0; j < 2; ++j) {
    fill(s.beta, s.gamma, j);
    s.omega[j] = sign() * (0.5 + rng.uniform());
  }
  for (Index h = 0; h < 2; ++h) {
    fill(s.alpha, s.tau, h);
    s.eta[h] = sign() * (0.5 + rng.uniform());
  }
  s.psi_omega.setOnes();
  s.psi_eta.setOnes();
  for (Index q = 0; q < 4; ++q) s.beta_x[q] = rng.normal(0.0, 0.7);
  s.beta_z = 0.5 + 1.5 * rng.uniform();
  for (Index i = 0; i < s.tensor.node_factors.size(); ++i) s.tensor.node_factors.data()[i] = rng.normal(0.0, 0.5);
  for (Index i = 0; i < s.tensor.covariate_factors.size(); ++i)
    s.tensor.covariate_factors.data()[i] = rng.normal(0.0, 0.5);
  s.sigma0_sq = 0.4;
  s.sigma1_sq = 0.2;
  return s;
}

std::vector<OracleReport> effect_oracle_reports(const ParameterState& state, const Vector& x, long draws, Rng& rng) {
  const MonteCarloEffects m = mc_effect_oracle(state, x, draws, rng);
  const EffectDraw e = effects_from_state(state);
  return {
      make_report("nie", m.nie, e.nie, m.nie_se, 3.0 * m.nie_se),
      make_report("nde", m.nde, e.nde, m.nde_se, 3.0 * m.nde_se),
      make_report("te", m.te, e.te(), m.te_se, 3.0 * m.te_se),
      make_report("nie_log_expected", m.nie_log_expected, e.nie, m.nie_log_expected_se, 3.0 * m.nie_log_expected_se),
      make_report("nde_log_expected", m.nde_log_expected, e.nde, m.nde_log_expected_se, 3.0 * m.nde_log_expected_se),
      make_report("te_log_expected", m.te_log_expected, e.te(), m.te_log_expected_se, 3.0 * m.te_log_expected_se),
  };
}

// ---------------------------------------------------------------------------
// Joint density
// ---------------------------------------------------------------------------

double joint_log_density(const ParameterState& state, const Dataset& data, const Hyperparameters& hyper) {
  check_state(state, data);
  double aft = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const auto& rec = data.records[i];
    const double bound = std::log(rec.time);
    const double y = state.latent_log_times[i];
    if (rec.event ? y != bound : !(y >= bound))
      throw InputError("joint_log_density: latent log-time " + std::to_string(i) + " violates its censoring bound");
    aft += normal_log_density(y, aft_linear_predictor(state, rec, data.networks[i]), state.sigma0_sq);
  }
  return aft + mediator_log_likelihood(state, data) + log_prior(state, hyper, make_mrf_prior(hyper, data.nodes()));
}

ParameterState sample_from_prior(const Hyperparameters& hyper, Index N, Index R, Index Q, Rng& rng) {
  if (hyper.mrf_nu != 0.0) throw InputError("sample_from_prior: requires mrf_nu == 0");
  ParameterState s = make_state(N, R, Q, hyper.H, hyper.J, hyper.K);
  const double p_include = std::exp(log_logistic(hyper.mrf_mu));
  for (Index q = 0; q < Q; ++q) s.beta_x[q] = rng.normal(0.0, std::sqrt(hyper.sigma_x_sq));
  s.beta_z = rng.normal(0.0, std::sqrt(hyper.sigma_z_sq));
  for (Index j = 0; j < hyper.J; ++j) {
    for (Index r = 0; r < R; ++r) {
      s.gamma(j, r) = rng.uniform() < p_include ? 1 : 0;
      s.beta(j, r) = s.gamma(j, r) ? rng.normal(0.0, std::sqrt(hyper.upsilon1)) : 0.0;
    }
    s.psi_omega[j] = laplace_scale_mixture_draw(hyper.lambda_omega, rng);
    s.omega[j] = rng.normal(0.0, std::sqrt(s.psi_omega[j]));
  }
  for (Index h = 0; h < hyper.H; ++h) {
    for (Index r = 0; r < R; ++r) {
      s.tau(h, r) = rng.uniform() < p_include ? 1 : 0;
      s.alpha(h, r) = s.tau(h, r) ? rng.normal(0.0, std::sqrt(hyper.upsilon2)) : 0.0;
    }
    s.psi_eta[h] = laplace_scale_mixture_draw(hyper.lambda_eta, rng);
    s.eta[h] = rng.normal(0.0, std::sqrt(s.psi_eta[h]));
  }
  const double sa = std::sqrt(hyper.sigma_a_sq);
  for (Index i = 0; i < s.tensor.node_factors.size(); ++i) s.tensor.node_factors.data()[i] = rng.normal(0.0, sa);
  for (Index i = 0; i < s.tensor.covariate_factors.size(); ++i)
    s.tensor.covariate_factors.data()[i] = rng.normal(0.0, sa);
  s.sigma0_sq = rng.inverse_gamma(hyper.ig_shape, hyper.ig_scale);
  s.sigma1_sq = rng.inverse_gamma(hyper.ig_shape, hyper.ig_scale);
  return s;
}

// ---------------------------------------------------------------------------
// Conditional-ratio identity
// ---------------------------------------------------------------------------

std::vector<RatioCheck> conditional_ratio_check(const Dataset& data, const Hyperparameters& hyper, long pairs,
                                                Rng& rng, double tolerance) {
  const std::vector<std::string> blocks{"latent",   "regression", "outcome_pair",   "exposure_pair",
                                        "omega",    "psi_omega",  "eta",            "psi_eta",
                                        "node_factor", "covariate_factor", "sigma0_sq", "sigma1_sq"};
  std::vector<RatioCheck> checks(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) checks[b].block = blocks[b];

  std::vector<Index> censored;
  for (Index i = 0; i < data.size(); ++i)
    if (!data.records[i].event) censored.push_back(i);
  const Index R = data.nodes(), Q = data.covariates();
  auto pick = [&](Index n) { return std::min(n - 1, static_cast<Index>(rng.uniform() * static_cast<double>(n))); };

  for (long p = 0; p < pairs; ++p) {
    ParameterState init = random_initial_state(data, hyper, rng);
    for (Index i : censored) init.latent_log_times[i] += rng.exponential(1.0);
    init.sigma0_sq = 0.3 + 2.0 * rng.uniform();
    init.sigma1_sq = 0.3 + 2.0 * rng.uniform();
    GibbsSampler g(data, hyper, std::move(init));
    g.sweep(rng);  // exercise the incremental caches before checking
    const ParameterState& s = g.state();

    auto record = [&](std::size_t b, double cond_diff, const ParameterState& a, const ParameterState& c) {
      const double joint_diff = joint_log_density(a, data, hyper) - joint_log_density(c, data, hyper);
      checks[b].max_error = std::max(checks[b].max_error, std::abs(cond_diff - joint_diff));
      ++checks[b].pairs;
    };
    ParameterState a = s, c = s;

    if (!censored.empty()) {
      const Index i = censored[pick(static_cast<Index>(censored.size()))];
      const auto cond = g.latent_conditional(i);
      const double v1 = cond.lower + rng.exponential(1.0), v2 = cond.lower + rng.exponential(1.0);
      a = s, c = s;
      a.latent_log_times[i] = v1;
      c.latent_log_times[i] = v2;
      record(0, cond.log_density(v1) - cond.log_density(v2), a, c);
    }
    {
      const auto cond = g.regression_conditional();
      Vector v1 = cond.mean, v2 = cond.mean;
      for (Index k = 0; k <= Q; ++k) v1[k] += rng.normal(), v2[k] += rng.normal();
      a = s, c = s;
      a.beta_x = v1.head(Q), a.beta_z = v1[Q];
      c.beta_x = v2.head(Q), c.beta_z = v2[Q];
      record(1, cond.log_density(v1) - cond.log_density(v2), a, c);
    }
    auto pair_check = [&](std::size_t b, bool outcome) {
      const Index row = pick(outcome ? s.beta.rows() : s.alpha.rows());
      const Index r = pick(R);
      const auto cond = outcome ? g.outcome_conditional(row, r) : g.exposure_conditional(row, r);
      const double v1 = rng.normal();
      const bool second_included = rng.bernoulli(0.5);
      const double v2 = second_included ? rng.normal() : 0.0;
      a = s, c = s;
      if (outcome) {
        a.gamma(row, r) = 1, a.beta(row, r) = v1;
        c.gamma(row, r) = second_included, c.beta(row, r) = v2;
      } else {
        a.tau(row, r) = 1, a.alpha(row, r) = v1;
        c.tau(row, r) = second_included, c.alpha(row, r) = v2;
      }
      record(b, cond.log_density(1, v1) - cond.log_density(second_included, v2), a, c);
    };
    pair_check(2, true);
    pair_check(3, false);
    {
      const Index j = pick(s.omega.size());
      const auto cond = g.omega_conditional(j);
      const double v1 = rng.normal(), v2 = rng.normal();
      a = s, c = s;
      a.omega[j] = v1, c.omega[j] = v2;
      record(4, cond.log_density(v1) - cond.log_density(v2), a, c);
      const auto mix = g.psi_omega_conditional(j);
      const double p1 = rng.exponential(1.0), p2 = rng.exponential(1.0);
      a = s, c = s;
      a.psi_omega[j] = p1, c.psi_omega[j] = p2;
      record(5, mix.log_density(p1) - mix.log_density(p2), a, c);
    }
    {
      const Index h = pick(s.eta.size());
      const auto cond = g.eta_conditional(h);
      const double v1 = rng.normal(), v2 = rng.normal();
      a = s, c = s;
      a.eta[h] = v1, c.eta[h] = v2;
      record(6, cond.log_density(v1) - cond.log_density(v2), a, c);
      const auto mix = g.psi_eta_conditional(h);
      const double p1 = rng.exponential(1.0), p2 = rng.exponential(1.0);
      a = s, c = s;
      a.psi_eta[h] = p1, c.psi_eta[h] = p2;
      record(7, mix.log_density(p1) - mix.log_density(p2), a, c);
    }
    if (s.tensor.rank() > 0) {
      const Index k = pick(s.tensor.rank());
      const Index w = pick(R);
      const auto cond = g.node_factor_conditional(k, w);
      const double v1 = rng.normal(), v2 = rng.normal();
      a = s, c = s;
      a.tensor.node_factors(k, w) = v1, c.tensor.node_factors(k, w) = v2;
      record(8, cond.log_density(v1) - cond.log_density(v2), a, c);
      const Index q = pick(Q);
      const auto cq = g.covariate_factor_conditional(k, q);
      const double u1 = rng.normal(), u2 = rng.normal();
      a = s, c = s;
      a.tensor.covariate_factors(k, q) = u1, c.tensor.covariate_factors(k, q) = u2;
      record(9, cq.log_density(u1) - cq.log_density(u2), a, c);
    }
    {
      const auto c0 = g.sigma0_conditional();
      const double v1 = 0.2 + 3.0 * rng.uniform(), v2 = 0.2 + 3.0 * rng.uniform();
      a = s, c = s;
      a.sigma0_sq = v1, c.sigma0_sq = v2;
      record(10, c0.log_density(v1) - c0.log_density(v2), a, c);
      const auto c1 = g.sigma1_conditional();
      a = s, c = s;
      a.sigma1_sq = v1, c.sigma1_sq = v2;
      record(11, c1.log_density(v1) - c1.log_density(v2), a, c);
    }
  }
  for (auto& chk : checks) chk.pass = chk.pairs > 0 && chk.max_error <= tolerance;
  return checks;
}

// ---------------------------------------------------------------------------
// Geweke
// ---------------------------------------------------------------------------

Hyperparameters GewekeConfig::default_hyper() {
  Hyperparameters h;
  h.upsilon1 = h.upsilon2 = 1.0;
  h.lambda_omega = h.lambda_eta = 2.0;
  h.sigma_x_sq = h.sigma_z_sq = 1.0;
  h.sigma_a_sq = 0.5;
  h.ig_shape = 3.0;
  h.ig_scale = 2.0;
  return h;
}

namespace {

struct Design {
  std::vector<Vector> x;
  std::vector<int> z;
};

Dataset regenerate(ParameterState& state, const Design& design, double censor_rate, Rng& rng) {
  Dataset d;
  const auto N = static_cast<Index>(design.x.size());
  for (Index i = 0; i < N; ++i) {
    SurvivalRecord rec;
    rec.covariates = design.x[i];
    rec.exposure = design.z[i];
    ConnectivityMatrix a = draw_network(state, rec.covariates, rec.exposure, rng);
    const double log_t = draw_log_time(state, rec.covariates, rec.exposure, a, rng);
    const double log_c = std::log(rng.exponential(censor_rate));
    const double observed = std::min(log_t, log_c);
    if (observed < -700.0) throw std::runtime_error("geweke: simulated log-time underflows");
    rec.event = log_t <= log_c ? 1 : 0;
    rec.time = std::exp(observed);
    state.latent_log_times[i] = rec.event ? std::log(rec.time) : log_t;
    d.records.push_back(std::move(rec));
    d.networks.push_back(std::move(a));
  }
  return d;
}

std::vector<double> test_functions(const ParameterState& s) {
  return {s.beta_z, s.sigma0_sq, s.sigma1_sq, s.omega[0], s.eta[0], effects_from_state(s).nie};
}

}  // namespace

std::vector<OracleReport> geweke_test(const GewekeConfig& config) {
  if (config.samples < 10) throw InputError("geweke_test: need at least 10 samples");
  Hyperparameters hyper = config.hyper;
  hyper.H = config.H;
  hyper.J = config.J;
  hyper.K = config.K;
  validate(hyper, config.R);
  const Index N = config.N, R = config.R, Q = 4;
  Rng rng(config.seed);

  Design design;
  for (Index i = 0; i < N; ++i) {
    design.x.push_back(draw_covariates(rng));
    design.z.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }

  const std::vector<std::string> names{"beta_z", "sigma0_sq", "sigma1_sq", "omega_1", "eta_1", "nie"};
  const std::size_t F = names.size();
  std::vector<std::vector<double>> marginal(F), successive(F);

  for (long m = 0; m < config.samples; ++m) {
    const auto g = test_functions(sample_from_prior(hyper, N, R, Q, rng));
    for (std::size_t f = 0; f < F; ++f) marginal[f].push_back(g[f]);
  }

  ParameterState state = sample_from_prior(hyper, N, R, Q, rng);
  Dataset data = regenerate(state, design, config.censor_rate, rng);
  for (long m = 0; m < config.samples; ++m) {
    {
      GibbsSampler sampler(data, hyper, state, {config.variance_shape_offset});
      sampler.sweep(rng);
      state = sampler.state();
    }
    const auto g = test_functions(state);
    for (std::size_t f = 0; f < F; ++f) successive[f].push_back(g[f]);
    data = regenerate(state, design, config.censor_rate, rng);
  }

  std::vector<OracleReport> reports;
  for (std::size_t f = 0; f < F; ++f) {
    const auto stats = [](const std::vector<double>& v) {
      const double n = static_cast<double>(v.size());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::pair<double, double>{mean, ss / (n - 1.0)};
    };
    const auto [m_mean, m_var] = stats(marginal[f]);
    const auto [s_mean, s_var] = stats(successive[f]);
    const double ess = effective_sample_size(successive[f]).ess;
    const double se = std::sqrt(m_var / static_cast<double>(config.samples) + s_var / ess);
    reports.push_back(make_report(names[f], m_mean, s_mean, se, 3.0 * se));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Grid posterior
// ---------------------------------------------------------------------------

GridPosterior grid_posterior_oracle(const std::function<double(const Vector&)>& log_density,
                                    const std::vector<GridAxis>& axes) {
  if (axes.empty() || axes.size() > 2) throw InputError("grid_posterior_oracle: supports one or two parameters");
  std::vector<std::vector<double>> nodes(axes.size());
  std::vector<std::vector<bool>> inside(axes.size());
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& ax = axes[d];
    if (!(ax.upper > ax.lower) || ax.points < 3) throw InputError("grid_posterior_oracle: invalid axis");
    const double step = (ax.upper - ax.lower) / (ax.points - 1);
    const double half = 0.5 * (ax.upper - ax.lower);
    const int extra = static_cast<int>(std::ceil(half / step));
    for (int k = -extra; k < ax.points + extra; ++k) {
      nodes[d].push_back(ax.lower + k * step);
      inside[d].push_back(k >= 0 && k < ax.points);
    }
  }
  const std::size_t n0 = nodes[0].size(), n1 = axes.size() == 2 ? nodes[1].size() : 1;
  std::vector<double> logs(n0 * n1);
  double top = -std::numeric_limits<double>::infinity();
  Vector theta(static_cast<Index>(axes.size()));
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = 0; b < n1; ++b) {
      theta[0] = nodes[0][a];
      if (axes.size() == 2) theta[1] = nodes[1][b];
      const double v = log_density(theta);
      logs[a * n1 + b] = v;
      if (v > top) top = v;
    }
  if (!std::isfinite(top)) throw std::runtime_error("grid_posterior_oracle: density is not finite on the grid");

  const Index D = static_cast<Index>(axes.size());
  double total = 0.0, in_box = 0.0;
  Vector first = Vector::Zero(D);
  Matrix second = Matrix::Zero(D, D);
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = 0; b < n1; ++b) {
      const double w = std::exp(logs[a * n1 + b] - top);
      theta[0] = nodes[0][a];
      if (D == 2) theta[1] = nodes[1][b];
      total += w;
      if (inside[0][a] && (D == 1 || inside[1][b])) in_box += w;
      first += w * theta;
      second += w * theta * theta.transpose();
    }
  GridPosterior out;
  out.mean = first / total;
  out.covariance = second / total - out.mean * out.mean.transpose();
  out.box_mass = in_box / total;
  if (out.box_mass < 0.999)
    throw std::runtime_error("grid_posterior_oracle: box holds only " + std::to_string(out.box_mass) +
                             " of the posterior mass; widen the grid");
  return out;
}

}  // namespace bsgm
