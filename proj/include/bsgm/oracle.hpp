#pragma once

#include "bsgm/core.hpp"
#include "bsgm/distributions.hpp"
#include "bsgm/effects.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bsgm {

/// One oracle-versus-engine comparison. pass == |oracle - engine| <= bound,
/// where bound is 3 SE for Monte Carlo checks or a stated tolerance.
struct OracleReport {
  std::string statistic;
  double oracle = 0.0;
  double engine = 0.0;
  double se = 0.0;     // Monte Carlo SE, 0 for deterministic checks
  double bound = 0.0;  // allowed |oracle - engine|
  bool pass = false;

  double z() const;  // (engine - oracle) / se, or 0 when se == 0
};

OracleReport make_report(std::string statistic, double oracle, double engine, double se, double bound);

// ---------------------------------------------------------------------------
// Monte Carlo effect oracle
// ---------------------------------------------------------------------------

struct MonteCarloEffects {
  // Contrasts of E[log T]: the closed-form effect definitions.
  double nie = 0.0, nde = 0.0, te = 0.0;
  double nie_se = 0.0, nde_se = 0.0, te_se = 0.0;
  // Contrasts of log E[T] (delta-method SEs).
  double nie_log_expected = 0.0, nde_log_expected = 0.0, te_log_expected = 0.0;
  double nie_log_expected_se = 0.0, nde_log_expected_se = 0.0, te_log_expected_se = 0.0;
};

/**
 * @brief Brute-force counterfactual effects at covariates x.
 *
 * Simulates the three worlds (z, A(z)), (z, A(z*)) and (z*, A(z*)) from the two
 * structural models with independent draws per world, then forms
 *   NIE = E log T(z, A(z)) - E log T(z, A(z*)),
 *   NDE = E log T(z, A(z*)) - E log T(z*, A(z*)),
 * and the same contrasts of log E[T].
 */
MonteCarloEffects mc_effect_oracle(const ParameterState& state, const Vector& x, long draws, Rng& rng, int z = 1,
                                   int z_star = 0);

/// Small random generating state for effect checks: J = H = 2, K = 2, Q = 4.
ParameterState random_effect_state(Index R, Rng& rng);

/// Compares effects_from_state against the oracle: NIE, NDE, TE and the three
/// log-expected-time variants, each within 3 SE.
std::vector<OracleReport> effect_oracle_reports(const ParameterState& state, const Vector& x, long draws, Rng& rng);

// ---------------------------------------------------------------------------
// Joint density and conditional-ratio identity
// ---------------------------------------------------------------------------

/// Complete-data AFT likelihood of the latent log-times, mediator likelihood and
/// every prior term, computed from scratch. Throws InputError for states that
/// break an invariant (including censoring bounds on latent log-times).
double joint_log_density(const ParameterState& state, const Dataset& data, const Hyperparameters& hyper);

/// Draws a state from the prior. Requires mrf_nu == 0 (independent indicators).
ParameterState sample_from_prior(const Hyperparameters& hyper, Index N, Index R, Index Q, Rng& rng);

struct RatioCheck {
  std::string block;
  long pairs = 0;
  double max_error = 0.0;
  bool pass = false;
};

/// For every Gibbs block, draws `pairs` random (state, candidate pair)
/// combinations and compares conditional log-density differences with
/// joint_log_density differences.
std::vector<RatioCheck> conditional_ratio_check(const Dataset& data, const Hyperparameters& hyper, long pairs,
                                                Rng& rng, double tolerance = 1e-8);

// ---------------------------------------------------------------------------
// Geweke joint-distribution test
// ---------------------------------------------------------------------------

struct GewekeConfig {
  Index N = 20;
  Index R = 5;
  int H = 1, J = 1, K = 1;
  long samples = 10000;
  double censor_rate = 0.3;
  double variance_shape_offset = 0.0;  // fault injection in the sampler
  std::uint64_t seed = 1;
  Hyperparameters hyper = default_hyper();

  /// Proper, moderate priors: IG(3, 2) variances, unit coefficient variances.
  static Hyperparameters default_hyper();
};

/// Marginal-conditional versus successive-conditional means of beta_z,
/// sigma0_sq, sigma1_sq, omega_1, eta_1 and NIE. The SE combines the
/// independent-sample variance and the ESS-corrected chain variance.
std::vector<OracleReport> geweke_test(const GewekeConfig& config);

// ---------------------------------------------------------------------------
// Grid posterior
// ---------------------------------------------------------------------------

struct GridAxis {
  double lower = -1.0;
  double upper = 1.0;
  int points = 201;
};

struct GridPosterior {
  Vector mean;
  Matrix covariance;
  double box_mass = 1.0;  // fraction of the doubled-box mass inside the requested box
};

/// Normalized posterior moments of a density over one or two parameters by
/// quadrature on a box twice as wide as requested. Throws std::runtime_error
/// if the requested box holds less than 0.999 of the mass.
GridPosterior grid_posterior_oracle(const std::function<double(const Vector&)>& log_density,
                                    const std::vector<GridAxis>& axes);

}  // namespace bsgm
