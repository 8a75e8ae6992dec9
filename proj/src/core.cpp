#include "bsgm/core.hpp"

#include <cmath>
#include <sstream>

namespace bsgm {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InputError(std::string("hyperparameter ") + name + " must be positive and finite");
}

}  // namespace

void validate(const Hyperparameters& hyper, Index nodes) {
  if (hyper.H < 1 || hyper.J < 1 || hyper.K < 1)
    throw InputError("hyperparameters H, J and K must be at least 1");
  require_positive(hyper.upsilon1, "upsilon1");
  require_positive(hyper.upsilon2, "upsilon2");
  require_positive(hyper.lambda_omega, "lambda_omega");
  require_positive(hyper.lambda_eta, "lambda_eta");
  require_positive(hyper.sigma_x_sq, "sigma_x_sq");
  require_positive(hyper.sigma_z_sq, "sigma_z_sq");
  require_positive(hyper.sigma_a_sq, "sigma_a_sq");
  require_positive(hyper.ig_shape, "ig_shape");
  require_positive(hyper.ig_scale, "ig_scale");
  if (!std::isfinite(hyper.mrf_mu) || !std::isfinite(hyper.mrf_nu))
    throw InputError("hyperparameters mrf_mu and mrf_nu must be finite");
  if (hyper.mrf_nu < 0.0) throw InputError("hyperparameter mrf_nu must be nonnegative");
  for (const auto& [a, b] : hyper.knowledge_graph) {
    if (a < 0 || b < 0 || a >= nodes || b >= nodes)
      throw InputError("knowledge_graph edge references a node outside 1..R");
    if (a == b) throw InputError("knowledge_graph contains a self-loop");
  }
}

ParameterState make_state(Index N, Index R, Index Q, int H, int J, int K) {
  ParameterState s;
  s.beta_x = Vector::Zero(Q);
  s.beta = Matrix::Zero(J, R);
  s.gamma = IndicatorMatrix::Zero(J, R);
  s.omega = Vector::Zero(J);
  s.psi_omega = Vector::Ones(J);
  s.alpha = Matrix::Zero(H, R);
  s.tau = IndicatorMatrix::Zero(H, R);
  s.eta = Vector::Zero(H);
  s.psi_eta = Vector::Ones(H);
  s.tensor.node_factors = Matrix::Zero(K, R);
  s.tensor.covariate_factors = Matrix::Zero(K, Q);
  s.latent_log_times = Vector::Zero(N);
  return s;
}

void check_state(const ParameterState& s, const Dataset& data) {
  const Index R = data.nodes(), Q = data.covariates(), N = data.size();
  const Index J = s.beta.rows(), H = s.alpha.rows();
  if (s.beta_x.size() != Q) throw InputError("state: beta_x length differs from Q");
  if (s.beta.cols() != R || s.gamma.rows() != J || s.gamma.cols() != R)
    throw InputError("state: beta/gamma dimensions inconsistent");
  if (s.alpha.cols() != R || s.tau.rows() != H || s.tau.cols() != R)
    throw InputError("state: alpha/tau dimensions inconsistent");
  if (s.omega.size() != J || s.psi_omega.size() != J)
    throw InputError("state: omega/psi_omega length differs from J");
  if (s.eta.size() != H || s.psi_eta.size() != H)
    throw InputError("state: eta/psi_eta length differs from H");
  if (s.tensor.node_factors.cols() != R || s.tensor.covariate_factors.cols() != Q ||
      s.tensor.node_factors.rows() != s.tensor.covariate_factors.rows())
    throw InputError("state: tensor factor dimensions inconsistent");
  if (s.latent_log_times.size() != N) throw InputError("state: latent_log_times length differs from N");
  for (Index j = 0; j < J; ++j)
    for (Index r = 0; r < R; ++r)
      if (s.gamma(j, r) == 0 && s.beta(j, r) != 0.0)
        throw InputError("state: beta nonzero where gamma is zero");
  for (Index h = 0; h < H; ++h)
    for (Index r = 0; r < R; ++r)
      if (s.tau(h, r) == 0 && s.alpha(h, r) != 0.0)
        throw InputError("state: alpha nonzero where tau is zero");
  if (!(s.sigma0_sq > 0.0) || !(s.sigma1_sq > 0.0))
    throw InputError("state: variances must be positive");
}

bool ValidationReport::ok() const {
  for (const auto& v : violations)
    if (!v.warning) return false;
  return true;
}

std::vector<Violation> ValidationReport::errors() const {
  std::vector<Violation> out;
  for (const auto& v : violations)
    if (!v.warning) out.push_back(v);
  return out;
}

ValidationReport validate(const Dataset& data) {
  ValidationReport report;
  auto add = [&](std::string kind, long index, std::string message, bool warning = false) {
    report.violations.push_back({std::move(kind), index, std::move(message), warning});
  };

  if (data.records.size() != data.networks.size()) {
    std::ostringstream os;
    os << data.records.size() << " survival records but " << data.networks.size() << " networks";
    add("length", -1, os.str());
  }
  if (data.records.empty()) add("length", -1, "dataset is empty");

  const Index R = data.nodes();
  if (!data.networks.empty() && R < 2) add("dimension", 0, "networks need at least 2 nodes");
  for (std::size_t i = 0; i < data.networks.size(); ++i) {
    const auto& a = data.networks[i];
    const long idx = static_cast<long>(i);
    if (a.rows() != a.cols()) {
      add("dimension", idx, "network is not square");
      continue;
    }
    if (a.rows() != R) {
      add("dimension", idx, "network dimension differs from the first network");
      continue;
    }
    bool finite = true, symmetric = true, hollow_ok = true, nonneg = true;
    for (Index l = 0; l < R; ++l) {
      if (a(l, l) != 0.0) hollow_ok = false;
      for (Index w = 0; w < R; ++w) {
        const double v = a(w, l);
        if (!std::isfinite(v)) finite = false;
        if (v < 0.0) nonneg = false;
        if (w < l && std::abs(v - a(l, w)) > 1e-12 * std::max(1.0, std::abs(v))) symmetric = false;
      }
    }
    if (!finite) add("finite", idx, "network has non-finite entries");
    if (!symmetric) add("symmetry", idx, "network is not symmetric");
    if (!hollow_ok) add("hollow", idx, "network has a nonzero diagonal entry");
    if (!nonneg) add("negative", idx, "network has negative edge weights", true);
  }

  const Index Q = data.covariates();
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& rec = data.records[i];
    const long idx = static_cast<long>(i);
    if (!(rec.time > 0.0) || !std::isfinite(rec.time)) add("time", idx, "follow-up time must be positive");
    if (rec.event != 0 && rec.event != 1) add("event", idx, "event indicator must be 0 or 1");
    if (rec.exposure != 0 && rec.exposure != 1) add("exposure", idx, "exposure must be 0 or 1");
    if (rec.covariates.size() != Q || Q < 1) {
      add("covariates", idx, "covariate vector length differs across records");
    } else {
      if (rec.covariates[0] != 1.0) add("intercept", idx, "first covariate must be the intercept 1");
      if (!rec.covariates.allFinite()) add("covariates", idx, "covariates must be finite");
    }
  }
  return report;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over a golden-ratio stride
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bsgm
