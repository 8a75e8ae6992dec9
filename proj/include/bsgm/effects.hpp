#pragma once

#include "bsgm/core.hpp"

#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace bsgm {

struct DrawStore;

/// Natural indirect / direct effects on the log-survival-time scale.
struct EffectDraw {
  double nie = 0.0;
  double nde = 0.0;
  double te() const { return nie + nde; }
};

/// Closed-form effects for the exposure contrast (z, z_star):
///   NIE = (z - z*) sum_j sum_h < omega_j beta_j beta_j^T, eta_h hollow(alpha_h alpha_h^T) >_F
///   NDE = beta_z (z - z*)
EffectDraw effects_from_state(const ParameterState& state, int z = 1, int z_star = 0);

struct EffectSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  bool contains(double value) const { return lower <= value && value <= upper; }
};

struct EffectsReport {
  EffectSummary nie, nde, te;
};

/// Empirical quantile with linear interpolation between order statistics:
/// position (n - 1) p in the sorted sample.
double quantile(std::vector<double> values, double p);

/// Mean and equal-tailed `level` interval of a sample.
EffectSummary summarize(const std::vector<double>& values, double level);

EffectsReport summarize_effects(const std::vector<EffectDraw>& draws, double level);
EffectsReport summarize_effects(const DrawStore& store, double level);

/// Posterior inclusion frequencies of gamma (J x R) and tau (H x R).
struct InclusionFrequencies {
  Matrix outcome;
  Matrix exposure;
};

/// Credible intervals of the graph-level weights omega_j and eta_h.
struct GraphWeightSummary {
  std::vector<EffectSummary> omega;
  std::vector<EffectSummary> eta;
};

InclusionFrequencies inclusion_frequencies(const std::vector<const DrawStore*>& stores);
GraphWeightSummary graph_weight_summary(const std::vector<const DrawStore*>& stores, double level = 0.95);

using Edge = std::pair<Index, Index>;  // (smaller, larger), 0-based
using EdgeSet = std::set<Edge>;

struct SelectionResult {
  std::vector<std::vector<Index>> outcome_nodes;   // per outcome graph j
  std::vector<std::vector<Index>> exposure_nodes;  // per exposure graph h
  std::vector<Index> retained_outcome_graphs;
  std::vector<Index> retained_exposure_graphs;
  EdgeSet outcome_edges;
  EdgeSet exposure_edges;
  EdgeSet mediating_edges;
  double cutoff = 0.5;
};

/// Median-probability selection: node r enters graph j iff its inclusion
/// frequency exceeds `cutoff`; graphs whose weight interval contains zero are
/// dropped; edges are cliques over each retained node set; mediating edges are
/// the union over (j, h) of outcome-clique / exposure-clique intersections.
SelectionResult select_subgraphs(const InclusionFrequencies& freqs, const GraphWeightSummary& weights,
                                 double cutoff = 0.5);

/// Binary symmetric hollow mask with ones at every edge in `edges`.
IndicatorMatrix map_edges_to_matrix(const EdgeSet& edges, Index nodes);

/// Clique over a node set.
EdgeSet clique_edges(const std::vector<Index>& nodes);

}  // namespace bsgm
