#pragma once

#include "bsgm/core.hpp"
#include "bsgm/sampler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bsgm {

/**
 * @brief Split-chain potential scale reduction factor.
 *
 * Each chain is cut into two halves (the middle draw of an odd chain is
 * dropped), giving m sequences of length n. With W the mean within-sequence
 * variance and B / n the variance of the sequence means,
 *   var+ = (n - 1) / n * W + B / n,   R-hat = sqrt(var+ / W).
 * Throws InputError for fewer than 2 chains, unequal lengths, chains shorter
 * than 4, or W == 0.
 */
double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant sequence; ess is the length
};

/// Geyer initial monotone sequence estimator; ess <= length. Requires length >= 10.
EssResult effective_sample_size(const std::vector<double>& sequence);

/// Monitored scalar traces of a draw store: nie, nde, te, sigma0_sq, sigma1_sq,
/// omega_<j>, eta_<h> (1-based suffixes).
std::vector<std::string> monitored_names(const DrawStore& store);
std::vector<double> monitored_trace(const DrawStore& store, const std::string& name);

struct ScalarDiagnostic {
  std::string name;
  std::optional<double> rhat;  // absent with a single chain or degenerate chains
  double ess = 0.0;            // summed over chains
  bool degenerate = false;
};

/// R-hat (two or more chains of equal length >= 4) and summed ESS of one scalar.
ScalarDiagnostic diagnose_scalar(const std::string& name, const std::vector<std::vector<double>>& traces);

std::vector<ScalarDiagnostic> diagnose(const std::vector<const DrawStore*>& stores);

/// Posterior summary used by the BIC: identifiable matrices averaged over draws.
/// Outcome graph j contributes omega_j beta_j beta_j^T, exposure graph h
/// eta_h alpha_h alpha_h^T, covariate slice q sum_k a1_k a1_k^T a2_k[q]; each is
/// restricted to the nodes whose inclusion frequency exceeds 0.5.
struct PosteriorMeanFit {
  Vector beta_x;
  double beta_z = 0.0;
  std::vector<Matrix> outcome;   // J
  std::vector<Matrix> exposure;  // H
  std::vector<Matrix> slices;    // Q
  double sigma0_sq = 1.0;
  double sigma1_sq = 1.0;
  Index parameters = 0;          // p in the BIC penalty
  double log_likelihood = 0.0;   // observed-data AFT + mediator
};

PosteriorMeanFit posterior_mean_fit(const std::vector<const DrawStore*>& stores, const Dataset& data);

/// -2 log L(posterior-mean fit) + p log N.
double bic_score(const std::vector<const DrawStore*>& stores, const Dataset& data);
double bic_score(const DrawStore& store, const Dataset& data);

struct TuningGrid {
  std::vector<int> H{1, 2, 3};
  std::vector<int> J{1, 2, 3};
  std::vector<double> mrf_mu{0.0};
  std::vector<double> mrf_nu{0.0};
  Hyperparameters base;  // remaining hyperparameters
};

void validate(const TuningGrid& grid);

struct TuningCell {
  int H = 1, J = 1;
  double mrf_mu = 0.0, mrf_nu = 0.0;
  double bic = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the failure message
};

struct TuningResult {
  Hyperparameters best;
  Index best_index = -1;
  std::vector<TuningCell> cells;  // grid order: H, then J, then mu, then nu
};

/// One chain per cell with seed derive_seed(config.seed, index of the first identical cell); argmin BIC
/// with ties broken toward smaller H + J, then smaller cell index. Throws
/// std::runtime_error if every cell fails.
TuningResult tune(const Dataset& data, const TuningGrid& grid, const ChainConfig& config, int workers = 1);

}  // namespace bsgm
