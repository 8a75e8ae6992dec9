#include "bsgm/simulate.hpp"

#include "bsgm/likelihood.hpp"
#include "bsgm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bsgm {

std::string to_string(Scenario s) { return s == Scenario::A ? "A" : "B"; }
std::string to_string(Setting s) { return s == Setting::Simple ? "simple" : "rich"; }

Scenario parse_scenario(const std::string& s) {
  if (s == "A" || s == "a") return Scenario::A;
  if (s == "B" || s == "b") return Scenario::B;
  throw InputError("scenario must be A or B, got '" + s + "'");
}

Setting parse_setting(const std::string& s) {
  if (s == "simple") return Setting::Simple;
  if (s == "rich") return Setting::Rich;
  throw InputError("setting must be simple or rich, got '" + s + "'");
}

void validate(const SimulationConfig& c) {
  if (c.N < 1) throw InputError("simulation: N must be positive");
  if (c.R < 2) throw InputError("simulation: R must be at least 2");
  if (!(c.sparsity > 0.0 && c.sparsity <= 1.0)) throw InputError("simulation: sparsity must be in (0, 1]");
  if (!(c.nonzero_low > 0.0 && c.nonzero_low <= c.nonzero_high))
    throw InputError("simulation: need 0 < nonzero_low <= nonzero_high");
  if (c.min_overlap < 0) throw InputError("simulation: min_overlap must be nonnegative");
  if (c.beta_x.size() != 4) throw InputError("simulation: beta_x must have 4 entries (intercept first)");
  if (c.tensor_rank < 1) throw InputError("simulation: tensor_rank must be positive");
  if (!(c.tensor_factor_variance > 0.0) || !(c.sigma0_sq > 0.0) || !(c.sigma1_sq > 0.0))
    throw InputError("simulation: variances must be positive");
  if (!(c.exposure_probability > 0.0 && c.exposure_probability < 1.0))
    throw InputError("simulation: exposure_probability must be in (0, 1)");
  if (!(c.binary_covariate_probability >= 0.0 && c.binary_covariate_probability <= 1.0))
    throw InputError("simulation: binary_covariate_probability must be in [0, 1]");
  if (!(c.censor_rate > 0.0)) throw InputError("simulation: censor_rate must be positive");
  if (c.xi.size() != 3) throw InputError("simulation: xi must have 3 entries");
}

namespace {

std::vector<Index> permutation(Index n, Rng& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(p[i], p[std::min(j, i)]);
  }
  return p;
}

std::vector<Index> support_of(const Matrix& m, Index row) {
  std::vector<Index> s;
  for (Index r = 0; r < m.cols(); ++r)
    if (m(row, r) != 0.0) s.push_back(r);
  return s;
}

}  // namespace

IndicatorMatrix true_mediating_mask(const ParameterState& state) {
  const Index R = state.nodes();
  EdgeSet mediating;
  for (Index j = 0; j < state.beta.rows(); ++j) {
    if (state.omega[j] == 0.0) continue;
    const EdgeSet oc = clique_edges(support_of(state.beta, j));
    for (Index h = 0; h < state.alpha.rows(); ++h) {
      if (state.eta[h] == 0.0) continue;
      const EdgeSet ec = clique_edges(support_of(state.alpha, h));
      std::set_intersection(oc.begin(), oc.end(), ec.begin(), ec.end(),
                            std::inserter(mediating, mediating.end()));
    }
  }
  return map_edges_to_matrix(mediating, R);
}

SimulationTruth build_truth(const SimulationConfig& c, Rng& rng) {
  validate(c);
  const Index support = std::lround(c.sparsity * static_cast<double>(c.R));
  if (support < 2) throw InputError("simulation: sparsity * R rounds below 2 nonzero entries per subgraph");
  const Index overlap = std::min(c.min_overlap, support);

  const bool rich = c.setting == Setting::Rich;
  const int graphs = rich ? 3 : 1;
  const Index Q = c.beta_x.size();
  SimulationTruth t;
  t.scenario = c.scenario;
  t.setting = c.setting;
  t.exposure_probability = c.exposure_probability;
  t.binary_covariate_probability = c.binary_covariate_probability;
  t.censor_rate_params = c.scenario == Scenario::A ? (Vector(1) << c.censor_rate).finished() : c.xi;

  ParameterState& s = t.state;
  s = make_state(0, c.R, Q, graphs, graphs, c.tensor_rank);
  s.beta_x = c.beta_x;
  s.beta_z = c.beta_z;
  if (rich) {
    s.omega << 1.2, 0.0, 0.0;
    s.eta << 0.8, 0.0, 0.9;
  } else {
    s.omega << 1.2;
    s.eta << 0.8;
  }
  s.psi_omega.setOnes();
  s.psi_eta.setOnes();

  auto magnitude = [&] { return c.nonzero_low + (c.nonzero_high - c.nonzero_low) * rng.uniform(); };
  auto fill = [&](Matrix& coef, IndicatorMatrix& ind, Index row, const std::vector<Index>& nodes) {
    for (Index r : nodes) {
      ind(row, r) = 1;
      coef(row, r) = magnitude();
    }
  };

  // Outcome graphs: independent random supports.
  for (int j = 0; j < graphs; ++j) {
    const auto p = permutation(c.R, rng);
    fill(s.beta, s.gamma, j, std::vector<Index>(p.begin(), p.begin() + support));
  }
  // Exposure graphs: active ones share `overlap` nodes with the active outcome graph.
  const std::vector<Index> anchor = support_of(s.beta, 0);
  for (int h = 0; h < graphs; ++h) {
    std::vector<Index> nodes;
    if (s.eta[h] != 0.0 && overlap > 0) {
      const auto p = permutation(static_cast<Index>(anchor.size()), rng);
      for (Index k = 0; k < overlap; ++k) nodes.push_back(anchor[p[k]]);
    }
    for (Index r : permutation(c.R, rng)) {
      if (static_cast<Index>(nodes.size()) == support) break;
      if (std::find(nodes.begin(), nodes.end(), r) == nodes.end()) nodes.push_back(r);
    }
    std::sort(nodes.begin(), nodes.end());
    fill(s.alpha, s.tau, h, nodes);
  }

  const double sd = std::sqrt(c.tensor_factor_variance);
  for (Index i = 0; i < s.tensor.node_factors.size(); ++i) s.tensor.node_factors.data()[i] = rng.normal(0.0, sd);
  for (Index i = 0; i < s.tensor.covariate_factors.size(); ++i)
    s.tensor.covariate_factors.data()[i] = rng.normal(0.0, sd);
  s.sigma0_sq = c.sigma0_sq;
  s.sigma1_sq = c.sigma1_sq;

  t.effects = effects_from_state(s);
  t.mediating_mask = true_mediating_mask(s);
  return t;
}

Vector draw_covariates(Rng& rng, double binary_p) {
  Vector x(4);
  x[0] = 1.0;
  x[1] = rng.normal();
  x[2] = rng.normal();
  x[3] = rng.bernoulli(binary_p) ? 1.0 : 0.0;
  return x;
}

ConnectivityMatrix draw_network(const ParameterState& state, const Vector& x, int z, Rng& rng) {
  SurvivalRecord rec;
  rec.covariates = x;
  rec.exposure = z;
  Matrix a = mediator_mean(state, rec);
  const double sd = std::sqrt(state.sigma1_sq);
  for (Index l = 1; l < a.cols(); ++l)
    for (Index w = 0; w < l; ++w) {
      a(w, l) += sd * rng.normal();
      a(l, w) = a(w, l);
    }
  return a;
}

double draw_log_time(const ParameterState& state, const Vector& x, int z, const ConnectivityMatrix& network,
                     Rng& rng) {
  SurvivalRecord rec;
  rec.covariates = x;
  rec.exposure = z;
  return aft_linear_predictor(state, rec, network) + std::sqrt(state.sigma0_sq) * rng.normal();
}

Dataset generate_dataset(const SimulationTruth& truth, Index N, Rng& rng, GenerationLog* log) {
  if (N < 1) throw InputError("generate_dataset: N must be positive");
  Dataset d;
  d.covariate_names = {"intercept", "cov_1", "cov_2", "cov_3"};
  d.records.reserve(static_cast<std::size_t>(N));
  d.networks.reserve(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) {
    SurvivalRecord rec;
    rec.exposure = rng.bernoulli(truth.exposure_probability) ? 1 : 0;
    rec.covariates = draw_covariates(rng, truth.binary_covariate_probability);
    double rate = truth.censor_rate_params[0];
    if (truth.scenario == Scenario::B) {
      rate = truth.censor_rate_params.dot(rec.covariates.tail(3));
      while (!(rate > 0.0)) {
        if (log) ++log->resampled_covariates;
        rec.covariates = draw_covariates(rng, truth.binary_covariate_probability);
        rate = truth.censor_rate_params.dot(rec.covariates.tail(3));
      }
    }
    ConnectivityMatrix a = draw_network(truth.state, rec.covariates, rec.exposure, rng);
    const double log_t = draw_log_time(truth.state, rec.covariates, rec.exposure, a, rng);
    const double log_c = std::log(rng.exponential(rate));
    rec.event = log_t <= log_c ? 1 : 0;
    rec.time = std::exp(std::min(log_t, log_c));
    if (!(rec.time > 0.0) || !std::isfinite(rec.time))
      rec.time = std::clamp(rec.time, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
    d.records.push_back(std::move(rec));
    d.networks.push_back(std::move(a));
  }
  return d;
}

SelectionAccuracy evaluate_selection(const IndicatorMatrix& estimated, const IndicatorMatrix& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols() || truth.rows() != truth.cols())
    throw InputError("evaluate_selection: masks must be square with equal dimensions");
  double tp = 0, fn = 0, tn = 0, fp = 0;
  for (Index l = 1; l < truth.cols(); ++l)
    for (Index w = 0; w < l; ++w) {
      const bool t = truth(w, l) != 0, e = estimated(w, l) != 0;
      if (t && e) ++tp;
      else if (t) ++fn;
      else if (e) ++fp;
      else ++tn;
    }
  SelectionAccuracy acc;
  if (tp + fn > 0) acc.sensitivity = tp / (tp + fn);
  if (tn + fp > 0) acc.specificity = tn / (tn + fp);
  return acc;
}

ReplicateResult fit_and_evaluate(const Dataset& data, const SimulationTruth& truth, const StudyConfig& config,
                                 std::uint64_t chain_seed) {
  ReplicateResult out;
  ChainConfig chain = config.chain;
  chain.seed = chain_seed;
  const std::vector<DrawStore> stores = run_chains(data, config.hyper, chain, config.chains, 1);
  std::vector<const DrawStore*> ptrs;
  std::vector<EffectDraw> pooled;
  for (const auto& s : stores) {
    ptrs.push_back(&s);
    pooled.insert(pooled.end(), s.effects.begin(), s.effects.end());
    out.zero_regressor_events += s.zero_regressor_events;
  }
  out.effects = summarize_effects(pooled, config.level);
  const SelectionResult sel =
      select_subgraphs(inclusion_frequencies(ptrs), graph_weight_summary(ptrs, config.level), config.cutoff);
  out.retained_outcome = static_cast<Index>(sel.retained_outcome_graphs.size());
  out.retained_exposure = static_cast<Index>(sel.retained_exposure_graphs.size());
  out.accuracy = evaluate_selection(map_edges_to_matrix(sel.mediating_edges, data.nodes()), truth.mediating_mask);
  double censored = 0.0;
  for (const auto& r : data.records) censored += r.event ? 0.0 : 1.0;
  out.censored_fraction = censored / static_cast<double>(data.size());
  out.ok = true;
  return out;
}

namespace {

MetricSummary aggregate(const std::vector<const EffectSummary*>& est, double truth) {
  MetricSummary m;
  if (est.empty()) return m;
  double covered = 0.0;
  for (const auto* e : est) {
    m.mean += e->mean;
    covered += e->contains(truth) ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(est.size());
  m.mean /= n;
  m.coverage = covered / n;
  if (truth == 0.0) {
    m.bias_absolute = true;
    m.bias_pct = m.mean - truth;
  } else {
    m.bias_pct = 100.0 * (m.mean - truth) / truth;
  }
  return m;
}

}  // namespace

StudyReport run_replication_study(const StudyConfig& config) {
  if (config.replicates < 1) throw InputError("study: replicates must be positive");
  validate(config.simulation);
  validate(config.hyper, config.simulation.R);

  StudyReport report;
  report.config = config;
  Rng truth_rng(derive_seed(config.seed, 0));
  report.truth = build_truth(config.simulation, truth_rng);
  report.replicates = config.replicates;
  report.details.resize(static_cast<std::size_t>(config.replicates));
  std::vector<long> resampled(static_cast<std::size_t>(config.replicates), 0);

  const std::uint64_t data_master = derive_seed(config.seed, 1);
  const std::uint64_t chain_master = derive_seed(config.seed, 2);
  parallel_for(report.details.size(), config.workers, [&](std::size_t r) {
    Rng rng(derive_seed(data_master, r));
    GenerationLog log;
    const Dataset data = generate_dataset(report.truth, config.simulation.N, rng, &log);
    resampled[r] = log.resampled_covariates;
    try {
      report.details[r] = fit_and_evaluate(data, report.truth, config, derive_seed(chain_master, r));
    } catch (const SamplerError& e) {
      report.details[r].ok = false;
      report.details[r].error = e.what();
    }
  });

  std::vector<const EffectSummary*> nie, nde, te;
  double sens = 0.0, spec = 0.0, n_sens = 0.0, n_spec = 0.0;
  for (std::size_t r = 0; r < report.details.size(); ++r) {
    report.resampled_covariates += resampled[r];
    const auto& d = report.details[r];
    if (!d.ok) {
      ++report.failures;
      continue;
    }
    ++report.completed;
    nie.push_back(&d.effects.nie);
    nde.push_back(&d.effects.nde);
    te.push_back(&d.effects.te);
    if (d.accuracy.sensitivity) sens += *d.accuracy.sensitivity, n_sens += 1.0;
    if (d.accuracy.specificity) spec += *d.accuracy.specificity, n_spec += 1.0;
  }
  report.nie = aggregate(nie, report.truth.effects.nie);
  report.nde = aggregate(nde, report.truth.effects.nde);
  report.te = aggregate(te, report.truth.effects.te());
  if (n_sens > 0) report.sensitivity = sens / n_sens;
  if (n_spec > 0) report.specificity = spec / n_spec;
  return report;
}

}  // namespace bsgm
