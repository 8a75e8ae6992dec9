#include "bsgm/likelihood.hpp"

#include "bsgm/distributions.hpp"

#include <cmath>

namespace bsgm {

namespace {

void require_positive(double t, double sigma, const char* what) {
  if (!(t > 0.0) || !(sigma > 0.0))
    throw InputError(std::string(what) + ": time and sigma must be positive");
}

}  // namespace

double aft_linear_predictor(const ParameterState& state, const SurvivalRecord& record,
                            const ConnectivityMatrix& network) {
  if (record.covariates.size() != state.beta_x.size())
    throw InputError("aft_linear_predictor: covariate length mismatch");
  if (network.rows() != state.beta.cols() || network.cols() != state.beta.cols())
    throw InputError("aft_linear_predictor: network dimension mismatch");
  double mu = record.covariates.dot(state.beta_x) + state.beta_z * record.exposure;
  for (Index j = 0; j < state.beta.rows(); ++j) {
    if (state.omega[j] == 0.0) continue;
    const Vector b = state.beta.row(j).transpose();
    mu += state.omega[j] * b.dot(network * b);
  }
  return mu;
}

double lognormal_log_density(double t, double mu, double sigma) {
  require_positive(t, sigma, "lognormal_log_density");
  const double lt = std::log(t);
  const double z = (lt - mu) / sigma;
  return -lt - std::log(sigma) - kLogSqrt2Pi - 0.5 * z * z;
}

double lognormal_log_survival(double t, double mu, double sigma) {
  require_positive(t, sigma, "lognormal_log_survival");
  return log_normal_sf((std::log(t) - mu) / sigma);
}

double lognormal_survival(double t, double mu, double sigma) {
  return std::exp(lognormal_log_survival(t, mu, sigma));
}

double aft_log_likelihood(const ParameterState& state, const Dataset& data) {
  const double sigma = std::sqrt(state.sigma0_sq);
  double ll = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const auto& rec = data.records[i];
    const double mu = aft_linear_predictor(state, rec, data.networks[i]);
    ll += rec.event ? lognormal_log_density(rec.time, mu, sigma)
                    : lognormal_log_survival(rec.time, mu, sigma);
  }
  return ll;
}

Matrix mediator_mean(const ParameterState& state, const SurvivalRecord& record) {
  Matrix g = tensor_covariate_contraction(state.tensor, record.covariates);
  if (g.rows() != state.alpha.cols()) throw InputError("mediator_mean: node count mismatch");
  if (record.exposure != 0) {
    for (Index h = 0; h < state.alpha.rows(); ++h) {
      if (state.eta[h] == 0.0) continue;
      g.noalias() += rank1_symmetric(state.alpha.row(h).transpose(), state.eta[h] * record.exposure);
    }
  }
  g.triangularView<Eigen::StrictlyLower>() = g.transpose();
  g.diagonal().setZero();
  return g;
}

double mediator_log_likelihood(const ParameterState& state, const Dataset& data) {
  if (!(state.sigma1_sq > 0.0)) throw InputError("mediator_log_likelihood: sigma1_sq must be positive");
  double ss = 0.0;
  double count = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const Matrix g = mediator_mean(state, data.records[i]);
    const auto& a = data.networks[i];
    for (Index l = 1; l < a.cols(); ++l)
      for (Index w = 0; w < l; ++w) {
        const double e = a(w, l) - g(w, l);
        ss += e * e;
        count += 1.0;
      }
  }
  return -count * (kLogSqrt2Pi + 0.5 * std::log(state.sigma1_sq)) - 0.5 * ss / state.sigma1_sq;
}

LinearPredictors linear_predictors(const ParameterState& state, const Dataset& data) {
  LinearPredictors out;
  out.aft_mean.resize(data.size());
  out.mediator_mean.reserve(data.records.size());
  for (Index i = 0; i < data.size(); ++i) {
    out.aft_mean[i] = aft_linear_predictor(state, data.records[i], data.networks[i]);
    out.mediator_mean.push_back(mediator_mean(state, data.records[i]));
  }
  return out;
}

}  // namespace bsgm
