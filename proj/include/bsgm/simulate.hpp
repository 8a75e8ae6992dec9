#pragma once

#include "bsgm/core.hpp"
#include "bsgm/distributions.hpp"
#include "bsgm/effects.hpp"
#include "bsgm/sampler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bsgm {

enum class Scenario { A, B };   // independent / covariate-dependent censoring
enum class Setting { Simple, Rich };

std::string to_string(Scenario s);
std::string to_string(Setting s);
Scenario parse_scenario(const std::string& s);
Setting parse_setting(const std::string& s);

/// Data-generating design. Defaults reproduce the simulation recipe; the
/// simple setting has one graph per side, the rich setting three per side
/// with eta = (0.8, 0, 0.9) and omega = (1.2, 0, 0).
struct SimulationConfig {
  Index N = 100;
  Index R = 30;
  Scenario scenario = Scenario::A;
  Setting setting = Setting::Simple;
  double sparsity = 0.15;           // fraction of nonzero alpha_h / beta_j entries
  double nonzero_low = 0.5;         // nonzero magnitudes ~ Uniform(low, high)
  double nonzero_high = 1.0;
  Index min_overlap = 2;            // forced shared support of active alpha and beta graphs
  double beta_z = 1.4;
  Vector beta_x = (Vector(4) << 0.0, 1.4, 0.8, 0.5).finished();  // intercept first
  int tensor_rank = 3;
  double tensor_factor_variance = 0.4;
  double sigma0_sq = 0.4;
  double sigma1_sq = 0.4;
  double exposure_probability = 0.5;
  double binary_covariate_probability = 0.65;
  double censor_rate = 0.4;                                        // scenario A
  Vector xi = (Vector(3) << 0.5, 0.2, 0.4).finished();             // scenario B
};

void validate(const SimulationConfig& config);

struct SimulationTruth {
  ParameterState state;           // generating parameters (latent_log_times empty)
  EffectDraw effects;             // true NIE / NDE for z = 1 vs z* = 0
  IndicatorMatrix mediating_mask; // true mediating edges
  Scenario scenario = Scenario::A;
  Setting setting = Setting::Simple;
  Vector censor_rate_params;      // (rate) for A, xi for B
  double exposure_probability = 0.5;
  double binary_covariate_probability = 0.65;
};

/// Builds a reproducible truth. Throws InputError if round(sparsity * R) < 2.
SimulationTruth build_truth(const SimulationConfig& config, Rng& rng);

/// Intercept, two standard normals and one Bernoulli(binary_p).
Vector draw_covariates(Rng& rng, double binary_p = 0.65);

/// Network from the matrix-response model: hollow mean plus one N(0, sigma1^2)
/// residual per undirected connection.
ConnectivityMatrix draw_network(const ParameterState& state, const Vector& x, int z, Rng& rng);

/// log T from the AFT model given the network.
double draw_log_time(const ParameterState& state, const Vector& x, int z, const ConnectivityMatrix& network,
                     Rng& rng);

struct GenerationLog {
  long resampled_covariates = 0;  // scenario B subjects whose censoring rate was nonpositive
};

Dataset generate_dataset(const SimulationTruth& truth, Index N, Rng& rng, GenerationLog* log = nullptr);

/// Edge-level accuracy over the strictly upper triangle. Sensitivity is absent
/// when the truth has no positive edge; specificity when it has no negative edge.
struct SelectionAccuracy {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

SelectionAccuracy evaluate_selection(const IndicatorMatrix& estimated, const IndicatorMatrix& truth);

/// Mediating edges implied by a generating state: cliques of the beta_j supports
/// with omega_j != 0 intersected with cliques of the alpha_h supports with eta_h != 0.
IndicatorMatrix true_mediating_mask(const ParameterState& state);

// ---------------------------------------------------------------------------
// Replication study
// ---------------------------------------------------------------------------

struct StudyConfig {
  SimulationConfig simulation;
  Hyperparameters hyper;   // fitted model (H, J, K, priors)
  ChainConfig chain;       // iterations / burn-in / thin; seeds are derived
  int replicates = 50;
  int chains = 1;
  std::uint64_t seed = 1;
  double level = 0.95;
  double cutoff = 0.5;
  int workers = 1;
};

struct ReplicateResult {
  bool ok = false;
  std::string error;
  EffectsReport effects;
  SelectionAccuracy accuracy;
  Index retained_outcome = 0;
  Index retained_exposure = 0;
  double censored_fraction = 0.0;
  long zero_regressor_events = 0;
};

struct MetricSummary {
  double mean = 0.0;        // mean of posterior means
  double bias_pct = 0.0;    // 100 (mean - truth) / truth; absolute bias when truth == 0
  bool bias_absolute = false;
  double coverage = 0.0;    // fraction of intervals containing the truth
};

struct StudyReport {
  SimulationTruth truth;
  StudyConfig config;
  MetricSummary nie, nde, te;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  int replicates = 0;
  int completed = 0;
  int failures = 0;
  long resampled_covariates = 0;
  std::vector<ReplicateResult> details;
};

/// Fits every replicate dataset and aggregates Mean, Bias, Coverage and edge
/// selection accuracy. Replicates whose sampler aborts are counted as failures.
StudyReport run_replication_study(const StudyConfig& config);

/// Per-replicate fit and evaluation, shared by the study driver and the CLI.
ReplicateResult fit_and_evaluate(const Dataset& data, const SimulationTruth& truth, const StudyConfig& config,
                                 std::uint64_t chain_seed);

}  // namespace bsgm
