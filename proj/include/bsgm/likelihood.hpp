#pragma once

#include "bsgm/core.hpp"

#include <vector>

namespace bsgm {

/// Mean structure of both structural models for every subject.
struct LinearPredictors {
  Vector aft_mean;                    // N, mean of log T_i
  std::vector<Matrix> mediator_mean;  // N symmetric hollow R x R matrices
};

/// x^T beta_x + sum_j omega_j beta_j^T A beta_j + beta_z z
double aft_linear_predictor(const ParameterState& state, const SurvivalRecord& record,
                            const ConnectivityMatrix& network);

double lognormal_log_density(double t, double mu, double sigma);
double lognormal_survival(double t, double mu, double sigma);
/// log of lognormal_survival, evaluated without forming the probability.
double lognormal_log_survival(double t, double mu, double sigma);

/// Observed-data log-likelihood of the AFT model: log density for events, log
/// survival for censored records.
double aft_log_likelihood(const ParameterState& state, const Dataset& data);

/// hollow(M x_3 x + z sum_h eta_h alpha_h alpha_h^T)
Matrix mediator_mean(const ParameterState& state, const SurvivalRecord& record);

/// Gaussian log-likelihood of the strictly-upper-triangle network entries, one
/// N(0, sigma1^2) residual per undirected connection.
double mediator_log_likelihood(const ParameterState& state, const Dataset& data);

LinearPredictors linear_predictors(const ParameterState& state, const Dataset& data);

}  // namespace bsgm
