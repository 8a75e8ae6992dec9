#include "bsgm/effects.hpp"

#include "bsgm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsgm {

EffectDraw effects_from_state(const ParameterState& state, int z, int z_star) {
  const double contrast = static_cast<double>(z - z_star);
  double nie = 0.0;
  for (Index j = 0; j < state.beta.rows(); ++j) {
    if (state.omega[j] == 0.0) continue;
    const Vector b = state.beta.row(j).transpose();
    for (Index h = 0; h < state.alpha.rows(); ++h) {
      if (state.eta[h] == 0.0) continue;
      const Vector a = state.alpha.row(h).transpose();
      // <b b^T, hollow(a a^T)>_F = (b . a)^2 - sum_r b_r^2 a_r^2
      const double ba = b.dot(a);
      const double diag = (b.array().square() * a.array().square()).sum();
      nie += state.omega[j] * state.eta[h] * (ba * ba - diag);
    }
  }
  return {contrast * nie, contrast * state.beta_z};
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile: probability must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EffectSummary summarize(const std::vector<double>& values, double level) {
  if (values.empty()) throw InputError("summarize: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw InputError("summarize: level must be in (0, 1)");
  EffectSummary s;
  s.level = level;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const double tail = 0.5 * (1.0 - level);
  s.lower = quantile(values, tail);
  s.upper = quantile(values, 1.0 - tail);
  return s;
}

EffectsReport summarize_effects(const std::vector<EffectDraw>& draws, double level) {
  if (draws.empty()) throw InputError("summarize_effects: no draws");
  std::vector<double> nie, nde, te;
  nie.reserve(draws.size());
  nde.reserve(draws.size());
  te.reserve(draws.size());
  for (const auto& d : draws) {
    nie.push_back(d.nie);
    nde.push_back(d.nde);
    te.push_back(d.te());
  }
  return {summarize(nie, level), summarize(nde, level), summarize(te, level)};
}

EffectsReport summarize_effects(const DrawStore& store, double level) { return summarize_effects(store.effects, level); }

InclusionFrequencies inclusion_frequencies(const std::vector<const DrawStore*>& stores) {
  InclusionFrequencies f;
  double count = 0.0;
  for (const DrawStore* store : stores) {
    for (const auto& s : store->states) {
      if (count == 0.0) {
        f.outcome = Matrix::Zero(s.gamma.rows(), s.gamma.cols());
        f.exposure = Matrix::Zero(s.tau.rows(), s.tau.cols());
      }
      f.outcome += s.gamma.cast<double>();
      f.exposure += s.tau.cast<double>();
      count += 1.0;
    }
  }
  if (count == 0.0) throw InputError("inclusion_frequencies: no draws");
  f.outcome /= count;
  f.exposure /= count;
  return f;
}

GraphWeightSummary graph_weight_summary(const std::vector<const DrawStore*>& stores, double level) {
  std::vector<std::vector<double>> omega, eta;
  for (const DrawStore* store : stores) {
    for (const auto& s : store->states) {
      omega.resize(static_cast<std::size_t>(s.omega.size()));
      eta.resize(static_cast<std::size_t>(s.eta.size()));
      for (Index j = 0; j < s.omega.size(); ++j) omega[j].push_back(s.omega[j]);
      for (Index h = 0; h < s.eta.size(); ++h) eta[h].push_back(s.eta[h]);
    }
  }
  if (omega.empty() && eta.empty()) throw InputError("graph_weight_summary: no draws");
  GraphWeightSummary g;
  for (const auto& v : omega) g.omega.push_back(summarize(v, level));
  for (const auto& v : eta) g.eta.push_back(summarize(v, level));
  return g;
}

EdgeSet clique_edges(const std::vector<Index>& nodes) {
  EdgeSet edges;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (nodes[a] != nodes[b]) edges.insert(std::minmax(nodes[a], nodes[b]));
  return edges;
}

SelectionResult select_subgraphs(const InclusionFrequencies& freqs, const GraphWeightSummary& weights, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw InputError("select_subgraphs: cutoff must be in (0, 1)");
  if (static_cast<Index>(weights.omega.size()) != freqs.outcome.rows() ||
      static_cast<Index>(weights.eta.size()) != freqs.exposure.rows())
    throw InputError("select_subgraphs: weight summaries do not match inclusion frequencies");
  SelectionResult out;
  out.cutoff = cutoff;
  auto nodes_of = [cutoff](const Matrix& f, Index row) {
    std::vector<Index> nodes;
    for (Index r = 0; r < f.cols(); ++r)
      if (f(row, r) > cutoff) nodes.push_back(r);
    return nodes;
  };
  std::vector<EdgeSet> outcome_cliques, exposure_cliques;
  for (Index j = 0; j < freqs.outcome.rows(); ++j) {
    out.outcome_nodes.push_back(nodes_of(freqs.outcome, j));
    if (weights.omega[j].contains(0.0)) continue;
    out.retained_outcome_graphs.push_back(j);
    outcome_cliques.push_back(clique_edges(out.outcome_nodes.back()));
    out.outcome_edges.insert(outcome_cliques.back().begin(), outcome_cliques.back().end());
  }
  for (Index h = 0; h < freqs.exposure.rows(); ++h) {
    out.exposure_nodes.push_back(nodes_of(freqs.exposure, h));
    if (weights.eta[h].contains(0.0)) continue;
    out.retained_exposure_graphs.push_back(h);
    exposure_cliques.push_back(clique_edges(out.exposure_nodes.back()));
    out.exposure_edges.insert(exposure_cliques.back().begin(), exposure_cliques.back().end());
  }
  for (const auto& oc : outcome_cliques)
    for (const auto& ec : exposure_cliques)
      std::set_intersection(oc.begin(), oc.end(), ec.begin(), ec.end(),
                            std::inserter(out.mediating_edges, out.mediating_edges.end()));
  return out;
}

IndicatorMatrix map_edges_to_matrix(const EdgeSet& edges, Index nodes) {
  IndicatorMatrix mask = IndicatorMatrix::Zero(nodes, nodes);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= nodes || b >= nodes) throw InputError("map_edges_to_matrix: node out of range");
    if (a == b) throw InputError("map_edges_to_matrix: self-pair");
    mask(a, b) = 1;
    mask(b, a) = 1;
  }
  return mask;
}

}  // namespace bsgm
