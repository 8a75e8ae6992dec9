#pragma once

#include "bsgm/core.hpp"
#include "bsgm/distributions.hpp"

#include <vector>

namespace bsgm {

/// Markov random field prior over the inclusion indicators of both sides.
struct MrfPrior {
  double mu = 0.0;  // sparsity
  double nu = 0.0;  // smoothness over the knowledge graph
  std::vector<std::vector<Index>> neighbors;

  Index nodes() const { return static_cast<Index>(neighbors.size()); }

  /// Builds the adjacency from an undirected 0-based edge list. Duplicate edges
  /// collapse; self-loops, out-of-range nodes and negative nu throw InputError.
  static MrfPrior from_edges(Index nodes, const std::vector<std::pair<Index, Index>>& edges, double mu,
                             double nu);
};

MrfPrior make_mrf_prior(const Hyperparameters& hyper, Index nodes);

enum class Side { Outcome, Exposure };

/// Point-mass / Normal-slab mixture; the atom at zero contributes log 1.
double spike_slab_log_density(double value, int included, double slab_variance);

/// mu * (#active) + nu * sum over knowledge-graph edges of co-activations;
/// the normalizing constant is never formed.
double mrf_log_unnormalized(const IndicatorMatrix& gamma, const IndicatorMatrix& tau, const MrfPrior& prior);

/// Prior log-odds of indicator (row, r) being 1 given every other indicator.
double indicator_conditional_logit(const IndicatorMatrix& indicators, Index row, Index r, const MrfPrior& prior);
double indicator_conditional_logit(Side side, Index row, Index r, const IndicatorMatrix& gamma,
                                   const IndicatorMatrix& tau, const MrfPrior& prior);

/// Mixing variance psi^2 ~ Exponential(rate lambda^2 / 2); N(0, psi^2) then
/// compounds to Laplace(lambda).
double laplace_scale_mixture_draw(double lambda, Rng& rng);
double laplace_mixing_log_density(double psi_sq, double lambda);

double inverse_gamma_log_density(double x, double shape, double scale);

/// Sum of every prior log-density term for a state (MRF term unnormalized).
double log_prior(const ParameterState& state, const Hyperparameters& hyper, const MrfPrior& mrf);

}  // namespace bsgm
