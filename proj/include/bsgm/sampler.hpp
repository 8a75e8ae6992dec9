#pragma once

#include "bsgm/core.hpp"
#include "bsgm/distributions.hpp"
#include "bsgm/effects.hpp"
#include "bsgm/priors.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsgm {

/// A Gibbs block produced a non-finite value or an impossible posterior.
class SamplerError : public std::runtime_error {
 public:
  SamplerError(std::string block, const std::string& message)
      : std::runtime_error(block + ": " + message), block_(std::move(block)) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

// ---------------------------------------------------------------------------
// Full-conditional distributions
// ---------------------------------------------------------------------------

struct Normal1D {
  double mean = 0.0;
  double variance = 1.0;

  double log_density(double x) const { return normal_log_density(x, mean, variance); }
  double draw(Rng& rng) const;
};

/// Posterior of a coefficient b with Gaussian likelihood exp(-(S b^2 - 2 b s) / 2)
/// (S = data precision, s = score) and a N(0, prior_variance) prior.
Normal1D conjugate_normal(double data_precision, double score, double prior_variance);

/// Joint conditional of an (indicator, coefficient) pair with the slab integrated out.
struct SpikeSlabConditional {
  double prior_logit = 0.0;       // MRF log-odds of inclusion
  double log_bayes_factor = 0.0;  // integrated likelihood ratio, included vs excluded
  Normal1D slab;                  // coefficient posterior given inclusion

  double inclusion_log_odds() const { return prior_logit + log_bayes_factor; }
  double inclusion_probability() const;
  /// log p(indicator, value | rest); value must be 0 when indicator is 0.
  double log_density(int included, double value) const;
};

struct TruncatedNormal1D {
  double mean = 0.0;
  double sd = 1.0;
  double lower = 0.0;

  double log_density(double x) const;
  double draw(Rng& rng) const { return rng.truncated_normal_lower(mean, sd, lower); }
};

struct MultivariateNormal {
  Vector mean;
  Matrix precision;

  double log_density(const Vector& x) const;
  Vector draw(Rng& rng) const;
};

struct InverseGamma1D {
  double shape = 1.0;
  double scale = 1.0;

  double log_density(double x) const;
  double draw(Rng& rng) const { return rng.inverse_gamma(shape, scale); }
};

/// psi^2 | w for w ~ N(0, psi^2), psi^2 ~ Exp(lambda^2 / 2): 1 / psi^2 is
/// inverse-Gaussian(lambda / |w|, lambda^2). At w == 0, psi^2 ~ Gamma(1/2, lambda^2/2).
struct MixingVarianceConditional {
  double weight = 0.0;
  double lambda = 1.0;

  double log_density(double psi_sq) const;
  double draw(Rng& rng) const;
};

// ---------------------------------------------------------------------------
// Chain configuration and storage
// ---------------------------------------------------------------------------

/// Starting point of a chain when no explicit state is supplied.
enum class InitStrategy {
  Moment,  // least-squares moments of the networks for the tensor and exposure side
  Random   // every block from random_initial_state
};

struct ChainConfig {
  long iterations = 10000;
  long burn_in = 5000;
  long thin = 1;
  std::uint64_t seed = 1;
  std::optional<ParameterState> init;  // generated from `strategy` when empty
  InitStrategy strategy = InitStrategy::Moment;
  bool random_scan = false;
  int exposure = 1;       // z in the effect contrast
  int reference = 0;      // z* in the effect contrast
  long refresh_interval = 50;  // sweeps between full cache rebuilds
  double variance_shape_offset = 0.0;  // test hook: perturbs the variance updates
};

struct DrawStore {
  std::uint64_t seed = 0;
  std::vector<long> iterations;
  std::vector<ParameterState> states;
  std::vector<EffectDraw> effects;
  std::vector<double> log_density;
  long zero_regressor_events = 0;  // omega/eta drawn from the prior because the regressor vanished

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
};

// ---------------------------------------------------------------------------
// Gibbs sampler
// ---------------------------------------------------------------------------

struct SamplerOptions {
  double variance_shape_offset = 0.0;  // test hook: added to both variance shapes
};

/**
 * @brief Gibbs sampler over the joint AFT / matrix-response model.
 *
 * Keeps running residual caches so each scalar update costs O(N R). Every block
 * update has a public full-conditional accessor so tests can check it against
 * the joint log-density, and a setter that keeps the caches consistent.
 *
 * Censored log-times are augmented as latent truncated-normal variables, which
 * makes every AFT block conjugate. Each (indicator, coefficient) pair is updated
 * jointly with the slab integrated out: hollow networks make the linear
 * predictors linear in any single beta_jr, alpha_hr or a1_k[w].
 */
class GibbsSampler {
 public:
  using Options = SamplerOptions;

  GibbsSampler(const Dataset& data, const Hyperparameters& hyper, ParameterState init,
               Options options = {});

  const ParameterState& state() const { return state_; }
  const Dataset& data() const { return data_; }
  const Hyperparameters& hyper() const { return hyper_; }
  long zero_regressor_events() const { return zero_regressor_events_; }

  // Blocks, in sweep order.
  void impute_censored_log_times(Rng& rng);
  void update_regression_coefficients(Rng& rng);
  void update_outcome_subgraphs(Rng& rng);
  void update_exposure_subgraphs(Rng& rng);
  void update_graph_weights(Rng& rng);
  void update_tensor_factors(Rng& rng);
  void update_variances(Rng& rng);

  /// One full sweep; with random_scan the seven blocks run in shuffled order.
  void sweep(Rng& rng, bool random_scan = false);

  // Full conditionals given the current state.
  TruncatedNormal1D latent_conditional(Index i) const;
  MultivariateNormal regression_conditional() const;  // (beta_x, beta_z)
  SpikeSlabConditional outcome_conditional(Index j, Index r) const;
  SpikeSlabConditional exposure_conditional(Index h, Index r) const;
  Normal1D omega_conditional(Index j) const;
  Normal1D eta_conditional(Index h) const;
  MixingVarianceConditional psi_omega_conditional(Index j) const;
  MixingVarianceConditional psi_eta_conditional(Index h) const;
  Normal1D node_factor_conditional(Index k, Index w) const;
  Normal1D covariate_factor_conditional(Index k, Index q) const;
  InverseGamma1D sigma0_conditional() const;
  InverseGamma1D sigma1_conditional() const;

  // Cache-preserving setters.
  void set_latent(Index i, double value);
  void set_regression(const Vector& coefficients);
  void set_outcome(Index j, Index r, int included, double value);
  void set_exposure(Index h, Index r, int included, double value);
  void set_omega(Index j, double value);
  void set_eta(Index h, double value);
  void set_psi_omega(Index j, double value);
  void set_psi_eta(Index h, double value);
  void set_node_factor(Index k, Index w, double value);
  void set_covariate_factor(Index k, Index q, double value);
  void set_sigma0_sq(double value);
  void set_sigma1_sq(double value);

  /// Joint log-density evaluated from the caches.
  double log_density() const;

  /// Rebuilds every cache from the state, discarding accumulated rounding.
  void refresh();

 private:
  Normal1D covariate_factor_conditional(Index k, Index q, const Vector& contraction, double weight_sq) const;
  double residual_ss0() const;
  double residual_ss1() const;
  void add_row_to_residuals(Index i, Index w, const Vector& delta);

  const Dataset& data_;
  Hyperparameters hyper_;
  MrfPrior mrf_;
  Options options_;
  ParameterState state_;

  Index N_ = 0, R_ = 0, Q_ = 0;
  Matrix design_;           // N x (Q + 1): covariates then exposure
  Matrix design_gram_;      // design^T design
  Vector log_time_;         // log observed times
  std::vector<Index> exposed_;

  Vector aft_mean_;                 // N
  Matrix quad_;                     // N x J: beta_j^T A_i beta_j
  std::vector<Matrix> abeta_;       // J matrices, R x N: columns A_i beta_j
  Matrix covariate_weights_;        // N x K: a2_k . x_i
  std::vector<Matrix> residuals_;   // N hollow matrices A_i - hollow(G_i)
  Matrix exposed_residual_sum_;     // sum of residuals_ over exposed subjects

  long zero_regressor_events_ = 0;
};

/// Coefficients N(0, 0.5), indicators Bernoulli(0.5), variances 1, mixing
/// variances from their priors, latent log-times at the observed bounds.
ParameterState random_initial_state(const Dataset& data, const Hyperparameters& hyper, Rng& rng);

/**
 * @brief Random start with the mediator-side factors placed near the data.
 *
 * Each connection is regressed on (x, z) by least squares. The exposure
 * coefficients form a hollow matrix whose leading H eigenpairs (diagonal
 * imputed iteratively) give alpha_h = sqrt(|lambda_h|) v_h with every node
 * included and eta_h = sign(lambda_h). The covariate slices are unfolded into
 * an R x RQ matrix whose leading K left singular vectors give a1_k; a2_k then
 * follows by least squares and each pair is rebalanced to equal scale. Both
 * sides are jittered multiplicatively by exp(0.1 Z). Remaining blocks come
 * from random_initial_state.
 */
ParameterState moment_initial_state(const Dataset& data, const Hyperparameters& hyper, Rng& rng);

/// Runs one chain; kept draws are post burn-in, thinned.
DrawStore run_chain(const Dataset& data, const Hyperparameters& hyper, const ChainConfig& config);

/// Runs `chains` chains with seeds derived from config.seed, on up to `workers` threads.
std::vector<DrawStore> run_chains(const Dataset& data, const Hyperparameters& hyper, const ChainConfig& config,
                                  int chains, int workers);

}  // namespace bsgm
