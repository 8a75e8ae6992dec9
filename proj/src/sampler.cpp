#include "bsgm/sampler.hpp"

#include "bsgm/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace bsgm {

namespace {

SpikeSlabConditional spike_slab(double prior_logit, double data_precision, double score, double slab_variance) {
  SpikeSlabConditional c;
  c.prior_logit = prior_logit;
  c.slab = conjugate_normal(data_precision, score, slab_variance);
  // log of  int N(b; 0, v) L(b) db / L(0)  =  m^2 P / 2 - log(1 + v S) / 2
  c.log_bayes_factor = 0.5 * c.slab.mean * c.slab.mean / c.slab.variance - 0.5 * std::log1p(slab_variance * data_precision);
  return c;
}

// Sign of the first nonzero entry other than `skip`; +1 if there is none.
// Drawing b = m + s * sd * Z keeps updates equivariant under v -> -v.
double orientation(const Matrix& m, Index row, Index skip) {
  for (Index l = 0; l < m.cols(); ++l) {
    if (l == skip) continue;
    const double v = m(row, l);
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
  }
  return 1.0;
}

// Adds delta to row and column w of a symmetric hollow matrix; delta[w] is ignored.
void shift_row(Matrix& m, Index w, const Vector& delta) {
  m.col(w) += delta;
  m.row(w) += delta.transpose();
  m(w, w) = 0.0;
}

// sum_{w<l} (a_w a_l)^2
double upper_square_norm(const Vector& a) {
  const double s2 = a.squaredNorm();
  return 0.5 * (s2 * s2 - a.array().pow(4).sum());
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace

// ---------------------------------------------------------------------------
// Conditional distributions
// ---------------------------------------------------------------------------

double Normal1D::draw(Rng& rng) const { return mean + std::sqrt(variance) * rng.normal(); }

Normal1D conjugate_normal(double data_precision, double score, double prior_variance) {
  const double precision = data_precision + 1.0 / prior_variance;
  return {score / precision, 1.0 / precision};
}

double SpikeSlabConditional::inclusion_probability() const { return std::exp(log_logistic(inclusion_log_odds())); }

double SpikeSlabConditional::log_density(int included, double value) const {
  const double odds = inclusion_log_odds();
  if (!included) {
    if (value != 0.0) throw InputError("SpikeSlabConditional: excluded coefficient must be zero");
    return log_logistic(-odds);
  }
  return log_logistic(odds) + slab.log_density(value);
}

double TruncatedNormal1D::log_density(double x) const {
  if (x < lower) return -std::numeric_limits<double>::infinity();
  return normal_log_density(x, mean, sd * sd) - log_normal_sf((lower - mean) / sd);
}

double MultivariateNormal::log_density(const Vector& x) const {
  const Eigen::LLT<Matrix> llt(precision);
  const Vector d = x - mean;
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -static_cast<double>(d.size()) * kLogSqrt2Pi + 0.5 * log_det - 0.5 * d.dot(precision * d);
}

Vector MultivariateNormal::draw(Rng& rng) const {
  const Eigen::LLT<Matrix> llt(precision);
  Vector z(mean.size());
  for (Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixU().solve(z);
}

double InverseGamma1D::log_density(double x) const { return inverse_gamma_log_density(x, shape, scale); }

double MixingVarianceConditional::log_density(double psi_sq) const {
  if (!(psi_sq > 0.0)) return -std::numeric_limits<double>::infinity();
  const double rate = 0.5 * lambda * lambda;
  if (weight == 0.0) return 0.5 * std::log(rate) - std::lgamma(0.5) - 0.5 * std::log(psi_sq) - rate * psi_sq;
  const double u = 1.0 / psi_sq;
  const double mu = lambda / std::abs(weight);
  const double shape = lambda * lambda;
  const double log_ig = 0.5 * std::log(shape / (2.0 * M_PI * u * u * u)) - shape * (u - mu) * (u - mu) / (2.0 * mu * mu * u);
  return log_ig - 2.0 * std::log(psi_sq);
}

double MixingVarianceConditional::draw(Rng& rng) const {
  if (weight == 0.0) return rng.gamma(0.5, 0.5 * lambda * lambda);
  return 1.0 / rng.inverse_gaussian(lambda / std::abs(weight), lambda * lambda);
}

// ---------------------------------------------------------------------------
// GibbsSampler: construction and caches
// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(const Dataset& data, const Hyperparameters& hyper, ParameterState init, Options options)
    : data_(data),
      hyper_(hyper),
      mrf_(make_mrf_prior(hyper, data.nodes())),
      options_(options),
      state_(std::move(init)),
      N_(data.size()),
      R_(data.nodes()),
      Q_(data.covariates()) {
  check_state(state_, data_);
  design_.resize(N_, Q_ + 1);
  log_time_.resize(N_);
  for (Index i = 0; i < N_; ++i) {
    const auto& rec = data_.records[i];
    design_.row(i).head(Q_) = rec.covariates.transpose();
    design_(i, Q_) = rec.exposure;
    log_time_[i] = std::log(rec.time);
    if (rec.exposure) exposed_.push_back(i);
    double& y = state_.latent_log_times[i];
    if (rec.event || !(y >= log_time_[i])) y = log_time_[i];
  }
  design_gram_ = design_.transpose() * design_;
  refresh();
}

void GibbsSampler::refresh() {
  const Index J = state_.beta.rows(), K = state_.tensor.rank();
  quad_.resize(N_, J);
  abeta_.assign(static_cast<std::size_t>(J), Matrix(R_, N_));
  for (Index j = 0; j < J; ++j) {
    const Vector b = state_.beta.row(j).transpose();
    for (Index i = 0; i < N_; ++i) {
      abeta_[j].col(i).noalias() = data_.networks[i] * b;
      quad_(i, j) = b.dot(abeta_[j].col(i));
    }
  }
  Vector coef(Q_ + 1);
  coef << state_.beta_x, state_.beta_z;
  aft_mean_ = design_ * coef + quad_ * state_.omega;

  covariate_weights_ = design_.leftCols(Q_) * state_.tensor.covariate_factors.transpose();  // N x K
  const Matrix& a1 = state_.tensor.node_factors;
  Matrix exposure_effect = Matrix::Zero(R_, R_);
  for (Index h = 0; h < state_.alpha.rows(); ++h)
    exposure_effect += rank1_symmetric(state_.alpha.row(h).transpose(), state_.eta[h]);

  residuals_.resize(static_cast<std::size_t>(N_));
  exposed_residual_sum_ = Matrix::Zero(R_, R_);
  for (Index i = 0; i < N_; ++i) {
    Matrix& res = residuals_[i];
    res = data_.networks[i];
    if (K > 0) res.noalias() -= a1.transpose() * covariate_weights_.row(i).transpose().asDiagonal() * a1;
    if (data_.records[i].exposure) res -= exposure_effect;
    res.diagonal().setZero();
    if (data_.records[i].exposure) exposed_residual_sum_ += res;
  }
}

double GibbsSampler::residual_ss0() const { return (state_.latent_log_times - aft_mean_).squaredNorm(); }

double GibbsSampler::residual_ss1() const {
  double ss = 0.0;
  for (const auto& res : residuals_) ss += res.squaredNorm();
  return 0.5 * ss;
}

void GibbsSampler::add_row_to_residuals(Index i, Index w, const Vector& delta) {
  shift_row(residuals_[i], w, delta);
  if (data_.records[i].exposure) shift_row(exposed_residual_sum_, w, delta);
}

double GibbsSampler::log_density() const {
  const double s0 = state_.sigma0_sq, s1 = state_.sigma1_sq;
  const double n_aft = static_cast<double>(N_);
  const double n_med = static_cast<double>(N_) * static_cast<double>(R_ * (R_ - 1)) / 2.0;
  const double aft = -n_aft * (kLogSqrt2Pi + 0.5 * std::log(s0)) - 0.5 * residual_ss0() / s0;
  const double med = -n_med * (kLogSqrt2Pi + 0.5 * std::log(s1)) - 0.5 * residual_ss1() / s1;
  return aft + med + log_prior(state_, hyper_, mrf_);
}

// ---------------------------------------------------------------------------
// Conditionals
// ---------------------------------------------------------------------------

TruncatedNormal1D GibbsSampler::latent_conditional(Index i) const {
  const double sd = std::sqrt(state_.sigma0_sq);
  if (data_.records[i].event)
    throw InputError("latent_conditional: record has an observed event; its log-time is fixed");
  return {aft_mean_[i], sd, log_time_[i]};
}

MultivariateNormal GibbsSampler::regression_conditional() const {
  Vector coef(Q_ + 1);
  coef << state_.beta_x, state_.beta_z;
  const Vector response = state_.latent_log_times - aft_mean_ + design_ * coef;
  MultivariateNormal post;
  post.precision = design_gram_ / state_.sigma0_sq;
  for (Index q = 0; q < Q_; ++q) post.precision(q, q) += 1.0 / hyper_.sigma_x_sq;
  post.precision(Q_, Q_) += 1.0 / hyper_.sigma_z_sq;
  const Eigen::LLT<Matrix> llt(post.precision);
  if (llt.info() != Eigen::Success)
    throw SamplerError("regression", "posterior precision is singular; covariates may be collinear");
  post.mean = llt.solve(design_.transpose() * response / state_.sigma0_sq);
  return post;
}

SpikeSlabConditional GibbsSampler::outcome_conditional(Index j, Index r) const {
  const double w = state_.omega[j];
  const double b_old = state_.beta(j, r);
  double S = 0.0, s = 0.0;
  if (w != 0.0) {
    for (Index i = 0; i < N_; ++i) {
      const double d = 2.0 * w * abeta_[j](r, i);
      const double e = state_.latent_log_times[i] - aft_mean_[i] + b_old * d;
      S += d * d;
      s += d * e;
    }
  }
  const double logit = indicator_conditional_logit(state_.gamma, j, r, mrf_);
  return spike_slab(logit, S / state_.sigma0_sq, s / state_.sigma0_sq, hyper_.upsilon1);
}

SpikeSlabConditional GibbsSampler::exposure_conditional(Index h, Index r) const {
  const double eta = state_.eta[h];
  const double b_old = state_.alpha(h, r);
  const Vector a = state_.alpha.row(h).transpose();
  const double nz = static_cast<double>(exposed_.size());
  const double norm_minus = a.squaredNorm() - a[r] * a[r];
  const double S = nz * eta * eta * norm_minus;
  const double s = eta * exposed_residual_sum_.col(r).dot(a) + b_old * S;
  const double logit = indicator_conditional_logit(state_.tau, h, r, mrf_);
  return spike_slab(logit, S / state_.sigma1_sq, s / state_.sigma1_sq, hyper_.upsilon2);
}

Normal1D GibbsSampler::omega_conditional(Index j) const {
  const auto x = quad_.col(j);
  const double S = x.squaredNorm();
  const double s = x.dot(state_.latent_log_times - aft_mean_) + state_.omega[j] * S;
  return conjugate_normal(S / state_.sigma0_sq, s / state_.sigma0_sq, state_.psi_omega[j]);
}

Normal1D GibbsSampler::eta_conditional(Index h) const {
  const Vector a = state_.alpha.row(h).transpose();
  const double S = static_cast<double>(exposed_.size()) * upper_square_norm(a);
  const double s = 0.5 * a.dot(exposed_residual_sum_ * a) + state_.eta[h] * S;
  return conjugate_normal(S / state_.sigma1_sq, s / state_.sigma1_sq, state_.psi_eta[h]);
}

MixingVarianceConditional GibbsSampler::psi_omega_conditional(Index j) const {
  return {state_.omega[j], hyper_.lambda_omega};
}

MixingVarianceConditional GibbsSampler::psi_eta_conditional(Index h) const {
  return {state_.eta[h], hyper_.lambda_eta};
}

Normal1D GibbsSampler::node_factor_conditional(Index k, Index w) const {
  const Vector a = state_.tensor.node_factors.row(k).transpose();
  const auto c = covariate_weights_.col(k);
  const double b_old = a[w];
  const double norm_minus = a.squaredNorm() - b_old * b_old;
  const double S = c.squaredNorm() * norm_minus;
  double s = b_old * S;
  for (Index i = 0; i < N_; ++i) s += c[i] * residuals_[i].col(w).dot(a);
  return conjugate_normal(S / state_.sigma1_sq, s / state_.sigma1_sq, hyper_.sigma_a_sq);
}

Normal1D GibbsSampler::covariate_factor_conditional(Index k, Index q) const {
  const Vector a = state_.tensor.node_factors.row(k).transpose();
  Vector contraction(N_);
  for (Index i = 0; i < N_; ++i) contraction[i] = 0.5 * a.dot(residuals_[i] * a);
  return covariate_factor_conditional(k, q, contraction, upper_square_norm(a));
}

Normal1D GibbsSampler::covariate_factor_conditional(Index k, Index q, const Vector& contraction,
                                                    double weight_sq) const {
  // contraction[i] = <hollow(a a^T), residual_i>_upper, weight_sq = ||hollow(a a^T)||^2_upper
  const auto x = design_.col(q);
  const double b_old = state_.tensor.covariate_factors(k, q);
  const double S = x.squaredNorm() * weight_sq;
  const double s = x.dot(contraction) + b_old * S;
  return conjugate_normal(S / state_.sigma1_sq, s / state_.sigma1_sq, hyper_.sigma_a_sq);
}

InverseGamma1D GibbsSampler::sigma0_conditional() const {
  return {hyper_.ig_shape + 0.5 * static_cast<double>(N_) + options_.variance_shape_offset,
          hyper_.ig_scale + 0.5 * residual_ss0()};
}

InverseGamma1D GibbsSampler::sigma1_conditional() const {
  const double entries = static_cast<double>(N_) * static_cast<double>(R_ * (R_ - 1)) / 2.0;
  return {hyper_.ig_shape + 0.5 * entries + options_.variance_shape_offset, hyper_.ig_scale + 0.5 * residual_ss1()};
}

// ---------------------------------------------------------------------------
// Setters
// ---------------------------------------------------------------------------

void GibbsSampler::set_latent(Index i, double value) {
  if (data_.records[i].event) {
    if (value != log_time_[i]) throw InputError("set_latent: event log-times are fixed");
  } else if (!(value >= log_time_[i])) {
    throw InputError("set_latent: censored log-time below its bound");
  }
  state_.latent_log_times[i] = value;
}

void GibbsSampler::set_regression(const Vector& coefficients) {
  if (coefficients.size() != Q_ + 1) throw InputError("set_regression: expected Q + 1 coefficients");
  Vector old(Q_ + 1);
  old << state_.beta_x, state_.beta_z;
  aft_mean_.noalias() += design_ * (coefficients - old);
  state_.beta_x = coefficients.head(Q_);
  state_.beta_z = coefficients[Q_];
}

void GibbsSampler::set_outcome(Index j, Index r, int included, double value) {
  if (!included && value != 0.0) throw InputError("set_outcome: excluded coefficient must be zero");
  state_.gamma(j, r) = included ? 1 : 0;
  const double delta = value - state_.beta(j, r);
  if (delta == 0.0) return;
  const double w = state_.omega[j];
  Matrix& ab = abeta_[j];
  for (Index i = 0; i < N_; ++i) {
    const double change = 2.0 * delta * ab(r, i);  // A_i(r, r) == 0
    quad_(i, j) += change;
    aft_mean_[i] += w * change;
    ab.col(i) += delta * data_.networks[i].col(r);
  }
  state_.beta(j, r) = value;
}

void GibbsSampler::set_exposure(Index h, Index r, int included, double value) {
  if (!included && value != 0.0) throw InputError("set_exposure: excluded coefficient must be zero");
  state_.tau(h, r) = included ? 1 : 0;
  const double delta = value - state_.alpha(h, r);
  if (delta == 0.0) return;
  const double eta = state_.eta[h];
  if (eta != 0.0 && !exposed_.empty()) {
    Vector shift = -delta * eta * state_.alpha.row(h).transpose();
    shift[r] = 0.0;
    for (Index i : exposed_) shift_row(residuals_[i], r, shift);
    shift_row(exposed_residual_sum_, r, static_cast<double>(exposed_.size()) * shift);
  }
  state_.alpha(h, r) = value;
}

void GibbsSampler::set_omega(Index j, double value) {
  aft_mean_.noalias() += (value - state_.omega[j]) * quad_.col(j);
  state_.omega[j] = value;
}

void GibbsSampler::set_eta(Index h, double value) {
  const double delta = value - state_.eta[h];
  if (delta != 0.0 && !exposed_.empty()) {
    Matrix m = rank1_symmetric(state_.alpha.row(h).transpose(), delta);
    m.diagonal().setZero();
    for (Index i : exposed_) residuals_[i] -= m;
    exposed_residual_sum_ -= static_cast<double>(exposed_.size()) * m;
  }
  state_.eta[h] = value;
}

void GibbsSampler::set_psi_omega(Index j, double value) {
  if (!(value > 0.0)) throw InputError("set_psi_omega: mixing variance must be positive");
  state_.psi_omega[j] = value;
}

void GibbsSampler::set_psi_eta(Index h, double value) {
  if (!(value > 0.0)) throw InputError("set_psi_eta: mixing variance must be positive");
  state_.psi_eta[h] = value;
}

void GibbsSampler::set_node_factor(Index k, Index w, double value) {
  const double delta = value - state_.tensor.node_factors(k, w);
  if (delta != 0.0) {
    Vector a = state_.tensor.node_factors.row(k).transpose();
    a[w] = 0.0;
    for (Index i = 0; i < N_; ++i) {
      const double c = covariate_weights_(i, k);
      if (c != 0.0) add_row_to_residuals(i, w, -delta * c * a);
    }
  }
  state_.tensor.node_factors(k, w) = value;
}

void GibbsSampler::set_covariate_factor(Index k, Index q, double value) {
  const double delta = value - state_.tensor.covariate_factors(k, q);
  if (delta != 0.0) {
    Matrix m = rank1_symmetric(state_.tensor.node_factors.row(k).transpose(), 1.0);
    m.diagonal().setZero();
    double exposed_shift = 0.0;
    for (Index i = 0; i < N_; ++i) {
      const double dc = delta * design_(i, q);
      if (dc == 0.0) continue;
      covariate_weights_(i, k) += dc;
      residuals_[i] -= dc * m;
      if (data_.records[i].exposure) exposed_shift += dc;
    }
    exposed_residual_sum_ -= exposed_shift * m;
  }
  state_.tensor.covariate_factors(k, q) = value;
}

void GibbsSampler::set_sigma0_sq(double value) {
  if (!(value > 0.0)) throw InputError("set_sigma0_sq: variance must be positive");
  state_.sigma0_sq = value;
}

void GibbsSampler::set_sigma1_sq(double value) {
  if (!(value > 0.0)) throw InputError("set_sigma1_sq: variance must be positive");
  state_.sigma1_sq = value;
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

void GibbsSampler::impute_censored_log_times(Rng& rng) {
  for (Index i = 0; i < N_; ++i) {
    if (data_.records[i].event) continue;
    state_.latent_log_times[i] = latent_conditional(i).draw(rng);
  }
}

void GibbsSampler::update_regression_coefficients(Rng& rng) { set_regression(regression_conditional().draw(rng)); }

void GibbsSampler::update_outcome_subgraphs(Rng& rng) {
  for (Index j = 0; j < state_.beta.rows(); ++j) {
    for (Index r = 0; r < R_; ++r) {
      const SpikeSlabConditional c = outcome_conditional(j, r);
      const bool include = rng.uniform() < c.inclusion_probability();
      double value = 0.0;
      if (include) {
        const double s = orientation(state_.beta, j, r);
        value = c.slab.mean + s * std::sqrt(c.slab.variance) * rng.normal();
      }
      set_outcome(j, r, include, value);
    }
  }
}

void GibbsSampler::update_exposure_subgraphs(Rng& rng) {
  for (Index h = 0; h < state_.alpha.rows(); ++h) {
    for (Index r = 0; r < R_; ++r) {
      const SpikeSlabConditional c = exposure_conditional(h, r);
      const bool include = rng.uniform() < c.inclusion_probability();
      double value = 0.0;
      if (include) {
        const double s = orientation(state_.alpha, h, r);
        value = c.slab.mean + s * std::sqrt(c.slab.variance) * rng.normal();
      }
      set_exposure(h, r, include, value);
    }
  }
}

void GibbsSampler::update_graph_weights(Rng& rng) {
  for (Index j = 0; j < state_.omega.size(); ++j) {
    if (quad_.col(j).squaredNorm() == 0.0) ++zero_regressor_events_;
    set_omega(j, omega_conditional(j).draw(rng));
    set_psi_omega(j, psi_omega_conditional(j).draw(rng));
  }
  for (Index h = 0; h < state_.eta.size(); ++h) {
    if (exposed_.empty() || upper_square_norm(state_.alpha.row(h).transpose()) == 0.0) ++zero_regressor_events_;
    set_eta(h, eta_conditional(h).draw(rng));
    set_psi_eta(h, psi_eta_conditional(h).draw(rng));
  }
}

void GibbsSampler::update_tensor_factors(Rng& rng) {
  const Index K = state_.tensor.rank();
  const auto covariates = design_.leftCols(Q_);
  for (Index k = 0; k < K; ++k) {
    for (Index w = 0; w < R_; ++w) {
      const Normal1D c = node_factor_conditional(k, w);
      const double s = orientation(state_.tensor.node_factors, k, w);
      set_node_factor(k, w, c.mean + s * std::sqrt(c.variance) * rng.normal());
    }

    // Covariate factors: the running contraction avoids an O(N R^2) pass per element.
    const Vector a = state_.tensor.node_factors.row(k).transpose();
    Matrix m = rank1_symmetric(a, 1.0);
    m.diagonal().setZero();
    const double weight_sq = upper_square_norm(a);
    Vector contraction(N_);
    for (Index i = 0; i < N_; ++i) contraction[i] = 0.5 * a.dot(residuals_[i] * a);
    const Vector weights_before = covariate_weights_.col(k);
    for (Index q = 0; q < Q_; ++q) {
      const double value = covariate_factor_conditional(k, q, contraction, weight_sq).draw(rng);
      const double delta = value - state_.tensor.covariate_factors(k, q);
      state_.tensor.covariate_factors(k, q) = value;
      covariate_weights_.col(k) += delta * covariates.col(q);
      contraction -= (delta * weight_sq) * covariates.col(q);
    }
    const Vector shift = covariate_weights_.col(k) - weights_before;
    double exposed_shift = 0.0;
    for (Index i = 0; i < N_; ++i) {
      if (shift[i] == 0.0) continue;
      residuals_[i] -= shift[i] * m;
      if (data_.records[i].exposure) exposed_shift += shift[i];
    }
    exposed_residual_sum_ -= exposed_shift * m;
  }
}

void GibbsSampler::update_variances(Rng& rng) {
  set_sigma0_sq(sigma0_conditional().draw(rng));
  set_sigma1_sq(sigma1_conditional().draw(rng));
}

void GibbsSampler::sweep(Rng& rng, bool random_scan) {
  std::array<int, 7> order{0, 1, 2, 3, 4, 5, 6};
  if (random_scan) std::shuffle(order.begin(), order.end(), rng.engine());
  for (int block : order) {
    switch (block) {
      case 0:
        impute_censored_log_times(rng);
        if (!all_finite(state_.latent_log_times)) throw SamplerError("impute", "non-finite latent log-time");
        break;
      case 1:
        update_regression_coefficients(rng);
        if (!all_finite(state_.beta_x) || !std::isfinite(state_.beta_z))
          throw SamplerError("regression", "non-finite coefficient");
        break;
      case 2:
        update_outcome_subgraphs(rng);
        if (!all_finite(state_.beta)) throw SamplerError("outcome_subgraphs", "non-finite coefficient");
        break;
      case 3:
        update_exposure_subgraphs(rng);
        if (!all_finite(state_.alpha)) throw SamplerError("exposure_subgraphs", "non-finite coefficient");
        break;
      case 4:
        update_graph_weights(rng);
        if (!all_finite(state_.omega) || !all_finite(state_.eta) || !all_finite(state_.psi_omega) ||
            !all_finite(state_.psi_eta) || !(state_.psi_omega.array() > 0.0).all() ||
            !(state_.psi_eta.array() > 0.0).all())
          throw SamplerError("graph_weights", "non-finite or nonpositive graph weight parameter");
        break;
      case 5:
        update_tensor_factors(rng);
        if (!all_finite(state_.tensor.node_factors) || !all_finite(state_.tensor.covariate_factors))
          throw SamplerError("tensor_factors", "non-finite factor");
        break;
      case 6:
        update_variances(rng);
        if (!std::isfinite(state_.sigma0_sq) || !std::isfinite(state_.sigma1_sq))
          throw SamplerError("variances", "non-finite variance");
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

ParameterState random_initial_state(const Dataset& data, const Hyperparameters& hyper, Rng& rng) {
  const Index N = data.size(), R = data.nodes(), Q = data.covariates();
  ParameterState s = make_state(N, R, Q, hyper.H, hyper.J, hyper.K);
  const double sd = std::sqrt(0.5);
  for (Index q = 0; q < Q; ++q) s.beta_x[q] = rng.normal(0.0, sd);
  s.beta_z = rng.normal(0.0, sd);
  for (Index j = 0; j < hyper.J; ++j) {
    for (Index r = 0; r < R; ++r) {
      s.gamma(j, r) = rng.bernoulli(0.5) ? 1 : 0;
      s.beta(j, r) = s.gamma(j, r) ? rng.normal(0.0, sd) : 0.0;
    }
    s.psi_omega[j] = laplace_scale_mixture_draw(hyper.lambda_omega, rng);
    s.omega[j] = rng.normal(0.0, sd);
  }
  for (Index h = 0; h < hyper.H; ++h) {
    for (Index r = 0; r < R; ++r) {
      s.tau(h, r) = rng.bernoulli(0.5) ? 1 : 0;
      s.alpha(h, r) = s.tau(h, r) ? rng.normal(0.0, sd) : 0.0;
    }
    s.psi_eta[h] = laplace_scale_mixture_draw(hyper.lambda_eta, rng);
    s.eta[h] = rng.normal(0.0, sd);
  }
  for (Index i = 0; i < s.tensor.node_factors.size(); ++i) s.tensor.node_factors.data()[i] = rng.normal(0.0, sd);
  for (Index i = 0; i < s.tensor.covariate_factors.size(); ++i)
    s.tensor.covariate_factors.data()[i] = rng.normal(0.0, sd);
  s.sigma0_sq = 1.0;
  s.sigma1_sq = 1.0;
  for (Index i = 0; i < N; ++i) s.latent_log_times[i] = std::log(data.records[i].time);
  return s;
}

namespace {

/// Upper-triangle vectorization (column-major over l, then w < l).
Matrix unvec_upper(const Eigen::Ref<const Vector>& v, Index R) {
  Matrix m = Matrix::Zero(R, R);
  Index p = 0;
  for (Index l = 1; l < R; ++l)
    for (Index w = 0; w < l; ++w) m(w, l) = m(l, w) = v[p++];
  return m;
}

}  // namespace

ParameterState moment_initial_state(const Dataset& data, const Hyperparameters& hyper, Rng& rng) {
  ParameterState s = random_initial_state(data, hyper, rng);
  const Index N = data.size(), R = data.nodes(), Q = data.covariates(), P = R * (R - 1) / 2;
  const int H = hyper.H, K = hyper.K;

  Matrix X(N, Q + 1), Y(N, P);
  for (Index i = 0; i < N; ++i) {
    X.row(i).head(Q) = data.records[i].covariates.transpose();
    X(i, Q) = data.records[i].exposure;
    Index p = 0;
    for (Index l = 1; l < R; ++l)
      for (Index w = 0; w < l; ++w) Y(i, p++) = data.networks[i](w, l);
  }
  const Matrix B = X.completeOrthogonalDecomposition().solve(Y);  // (Q + 1) x P
  auto jitter = [&] { return std::exp(0.1 * rng.normal()); };

  // exposure side
  const Matrix D = unvec_upper(B.row(Q).transpose(), R);
  Matrix fill = Matrix::Zero(R, R);
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  std::vector<Index> order(static_cast<std::size_t>(R));
  for (int it = 0; it < 30; ++it) {
    Matrix m = D;
    m.diagonal() = fill.diagonal();
    eig.compute(m);
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(eig.eigenvalues()[a]) > std::abs(eig.eigenvalues()[b]);
    });
    fill.setZero();
    for (int h = 0; h < std::min<Index>(H, R); ++h) {
      const Index e = order[h];
      fill += eig.eigenvalues()[e] * eig.eigenvectors().col(e) * eig.eigenvectors().col(e).transpose();
    }
  }
  for (int h = 0; h < std::min<Index>(H, R); ++h) {
    const double lambda = eig.eigenvalues()[order[h]];
    if (lambda == 0.0) continue;
    for (Index r = 0; r < R; ++r) {
      s.tau(h, r) = 1;
      s.alpha(h, r) = std::sqrt(std::abs(lambda)) * eig.eigenvectors()(r, order[h]) * jitter();
      if (s.alpha(h, r) == 0.0) s.tau(h, r) = 0;
    }
    s.eta[h] = lambda > 0.0 ? 1.0 : -1.0;
  }

  // covariate tensor
  Matrix unfolded(R, R * Q);
  for (Index q = 0; q < Q; ++q) unfolded.middleCols(q * R, R) = unvec_upper(B.row(q).transpose(), R);
  const Eigen::JacobiSVD<Matrix> svd(unfolded, Eigen::ComputeThinU);
  const int k_fit = static_cast<int>(std::min<Index>(K, svd.matrixU().cols()));
  Matrix a1(k_fit, R);
  for (int k = 0; k < k_fit; ++k) a1.row(k) = svd.matrixU().col(k).transpose();
  Matrix F(P, k_fit);
  for (int k = 0; k < k_fit; ++k) {
    Index p = 0;
    for (Index l = 1; l < R; ++l)
      for (Index w = 0; w < l; ++w) F(p++, k) = a1(k, w) * a1(k, l);
  }
  const Matrix a2 = F.completeOrthogonalDecomposition().solve(B.topRows(Q).transpose());  // k_fit x Q
  for (int k = 0; k < k_fit; ++k) {
    const double c = std::sqrt(std::max(1e-8, a2.row(k).norm()));
    for (Index r = 0; r < R; ++r) s.tensor.node_factors(k, r) = c * a1(k, r) * jitter();
    for (Index q = 0; q < Q; ++q) s.tensor.covariate_factors(k, q) = a2(k, q) / (c * c) * jitter();
  }
  return s;
}

DrawStore run_chain(const Dataset& data, const Hyperparameters& hyper, const ChainConfig& config) {
  if (config.iterations < 1) throw InputError("chain config: iterations must be positive");
  if (config.burn_in < 0 || config.burn_in >= config.iterations)
    throw InputError("chain config: burn_in must be in [0, iterations)");
  if (config.thin < 1) throw InputError("chain config: thin must be positive");
  const ValidationReport report = validate(data);
  if (!report.ok()) {
    const Violation v = report.errors().front();
    throw InputError("dataset invalid (" + v.kind + " at " + std::to_string(v.index) + "): " + v.message);
  }
  validate(hyper, data.nodes());

  Rng rng(config.seed);
  ParameterState init = config.init                               ? *config.init
                        : config.strategy == InitStrategy::Random ? random_initial_state(data, hyper, rng)
                                                                  : moment_initial_state(data, hyper, rng);
  GibbsSampler sampler(data, hyper, std::move(init), {config.variance_shape_offset});

  DrawStore store;
  store.seed = config.seed;
  const long kept = (config.iterations - config.burn_in) / config.thin;
  store.iterations.reserve(static_cast<std::size_t>(kept));
  store.states.reserve(static_cast<std::size_t>(kept));
  store.effects.reserve(static_cast<std::size_t>(kept));
  store.log_density.reserve(static_cast<std::size_t>(kept));

  for (long t = 1; t <= config.iterations; ++t) {
    sampler.sweep(rng, config.random_scan);
    if (config.refresh_interval > 0 && t % config.refresh_interval == 0) sampler.refresh();
    const double lp = sampler.log_density();
    if (!std::isfinite(lp)) throw SamplerError("joint", "non-finite joint log-density at iteration " + std::to_string(t));
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) {
      store.iterations.push_back(t);
      store.states.push_back(sampler.state());
      store.effects.push_back(effects_from_state(sampler.state(), config.exposure, config.reference));
      store.log_density.push_back(lp);
    }
  }
  store.zero_regressor_events = sampler.zero_regressor_events();
  return store;
}

std::vector<DrawStore> run_chains(const Dataset& data, const Hyperparameters& hyper, const ChainConfig& config,
                                  int chains, int workers) {
  if (chains < 1) throw InputError("at least one chain is required");
  std::vector<DrawStore> stores(static_cast<std::size_t>(chains));
  parallel_for(stores.size(), workers, [&](std::size_t c) {
    ChainConfig cfg = config;
    cfg.seed = derive_seed(config.seed, c);
    stores[c] = run_chain(data, hyper, cfg);
  });
  return stores;
}

}  // namespace bsgm
