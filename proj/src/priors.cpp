#include "bsgm/priors.hpp"

#include <algorithm>
#include <cmath>

namespace bsgm {

MrfPrior MrfPrior::from_edges(Index nodes, const std::vector<std::pair<Index, Index>>& edges, double mu,
                              double nu) {
  if (nu < 0.0) throw InputError("MRF smoothness nu must be nonnegative");
  MrfPrior prior;
  prior.mu = mu;
  prior.nu = nu;
  prior.neighbors.assign(static_cast<std::size_t>(nodes), {});
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= nodes || b >= nodes) throw InputError("MRF edge references an invalid node");
    if (a == b) throw InputError("MRF edge is a self-loop");
    auto& na = prior.neighbors[a];
    if (std::find(na.begin(), na.end(), b) != na.end()) continue;
    na.push_back(b);
    prior.neighbors[b].push_back(a);
  }
  for (auto& n : prior.neighbors) std::sort(n.begin(), n.end());
  return prior;
}

MrfPrior make_mrf_prior(const Hyperparameters& hyper, Index nodes) {
  return MrfPrior::from_edges(nodes, hyper.knowledge_graph, hyper.mrf_mu, hyper.mrf_nu);
}

double spike_slab_log_density(double value, int included, double slab_variance) {
  if (included == 0) {
    if (value != 0.0) throw InputError("spike_slab_log_density: excluded coefficient must be zero");
    return 0.0;
  }
  if (!(slab_variance > 0.0)) throw InputError("spike_slab_log_density: slab variance must be positive");
  return normal_log_density(value, 0.0, slab_variance);
}

namespace {

double mrf_side(const IndicatorMatrix& ind, const MrfPrior& prior) {
  if (ind.size() > 0 && ind.cols() != prior.nodes()) throw InputError("MRF prior: node count mismatch");
  double active = 0.0, pairs = 0.0;
  for (Index row = 0; row < ind.rows(); ++row) {
    for (Index r = 0; r < ind.cols(); ++r) {
      if (!ind(row, r)) continue;
      active += 1.0;
      for (Index s : prior.neighbors[r])
        if (s > r && ind(row, s)) pairs += 1.0;
    }
  }
  return prior.mu * active + prior.nu * pairs;
}

}  // namespace

double mrf_log_unnormalized(const IndicatorMatrix& gamma, const IndicatorMatrix& tau, const MrfPrior& prior) {
  return mrf_side(gamma, prior) + mrf_side(tau, prior);
}

double indicator_conditional_logit(const IndicatorMatrix& indicators, Index row, Index r, const MrfPrior& prior) {
  double active_neighbors = 0.0;
  for (Index s : prior.neighbors[r])
    if (indicators(row, s)) active_neighbors += 1.0;
  return prior.mu + prior.nu * active_neighbors;
}

double indicator_conditional_logit(Side side, Index row, Index r, const IndicatorMatrix& gamma,
                                   const IndicatorMatrix& tau, const MrfPrior& prior) {
  return indicator_conditional_logit(side == Side::Outcome ? gamma : tau, row, r, prior);
}

double laplace_scale_mixture_draw(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw InputError("laplace_scale_mixture_draw: lambda must be positive");
  return rng.exponential(0.5 * lambda * lambda);
}

double laplace_mixing_log_density(double psi_sq, double lambda) {
  if (!(psi_sq > 0.0) || !(lambda > 0.0)) throw InputError("laplace_mixing_log_density: invalid argument");
  const double rate = 0.5 * lambda * lambda;
  return std::log(rate) - rate * psi_sq;
}

double inverse_gamma_log_density(double x, double shape, double scale) {
  if (!(x > 0.0) || !(shape > 0.0) || !(scale > 0.0))
    throw InputError("inverse_gamma_log_density: arguments must be positive");
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_prior(const ParameterState& s, const Hyperparameters& hyper, const MrfPrior& mrf) {
  double lp = 0.0;
  for (Index q = 0; q < s.beta_x.size(); ++q) lp += normal_log_density(s.beta_x[q], 0.0, hyper.sigma_x_sq);
  lp += normal_log_density(s.beta_z, 0.0, hyper.sigma_z_sq);
  for (Index j = 0; j < s.beta.rows(); ++j) {
    for (Index r = 0; r < s.beta.cols(); ++r) lp += spike_slab_log_density(s.beta(j, r), s.gamma(j, r), hyper.upsilon1);
    lp += normal_log_density(s.omega[j], 0.0, s.psi_omega[j]);
    lp += laplace_mixing_log_density(s.psi_omega[j], hyper.lambda_omega);
  }
  for (Index h = 0; h < s.alpha.rows(); ++h) {
    for (Index r = 0; r < s.alpha.cols(); ++r) lp += spike_slab_log_density(s.alpha(h, r), s.tau(h, r), hyper.upsilon2);
    lp += normal_log_density(s.eta[h], 0.0, s.psi_eta[h]);
    lp += laplace_mixing_log_density(s.psi_eta[h], hyper.lambda_eta);
  }
  lp += mrf_log_unnormalized(s.gamma, s.tau, mrf);
  const auto& t = s.tensor;
  for (Index i = 0; i < t.node_factors.size(); ++i)
    lp += normal_log_density(t.node_factors.data()[i], 0.0, hyper.sigma_a_sq);
  for (Index i = 0; i < t.covariate_factors.size(); ++i)
    lp += normal_log_density(t.covariate_factors.data()[i], 0.0, hyper.sigma_a_sq);
  lp += inverse_gamma_log_density(s.sigma0_sq, hyper.ig_shape, hyper.ig_scale);
  lp += inverse_gamma_log_density(s.sigma1_sq, hyper.ig_shape, hyper.ig_scale);
  return lp;
}

}  // namespace bsgm
