#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bsgm {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using IndicatorMatrix = MatrixX<int>;

/// Symmetric hollow R x R matrix of nonnegative edge weights.
using ConnectivityMatrix = Matrix;

/// Malformed input: bad dimensions, unparsable files, invalid configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Matrix algebra
// ---------------------------------------------------------------------------

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar frobenius_inner(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("frobenius_inner: dimension mismatch");
  return a.cwiseProduct(b).sum();
}

/// scale * v v^T, exactly symmetric (the upper triangle is mirrored).
template <typename Derived>
MatrixX<typename Derived::Scalar> rank1_symmetric(const Eigen::MatrixBase<Derived>& v,
                                                  typename Derived::Scalar scale) {
  const Index n = v.size();
  MatrixX<typename Derived::Scalar> out(n, n);
  for (Index l = 0; l < n; ++l)
    for (Index w = 0; w <= l; ++w) out(w, l) = out(l, w) = scale * (v[w] * v[l]);
  return out;
}

/// Copy of a square matrix with the diagonal zeroed.
template <typename Derived>
MatrixX<typename Derived::Scalar> hollow(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw InputError("hollow: matrix is not square");
  MatrixX<typename Derived::Scalar> out = a;
  out.diagonal().setZero();
  return out;
}

/// Sum over the strictly upper triangle of a .* b.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar upper_inner(const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  typename DerivedA::Scalar s(0);
  for (Index l = 1; l < a.cols(); ++l)
    for (Index w = 0; w < l; ++w) s += a(w, l) * b(w, l);
  return s;
}

/**
 * @brief Semi-symmetric rank-K tensor M = sum_k a1_k o a1_k o a2_k.
 *
 * Each frontal slice M[:,:,q] = sum_k a2_k[q] a1_k a1_k^T is symmetric by
 * construction. Rows of node_factors are a1_k (length R), rows of
 * covariate_factors are a2_k (length Q).
 */
template <typename Scalar>
struct BasicSemiSymmetricTensor {
  MatrixX<Scalar> node_factors;       // K x R
  MatrixX<Scalar> covariate_factors;  // K x Q

  Index rank() const { return node_factors.rows(); }
  Index nodes() const { return node_factors.cols(); }
  Index covariates() const { return covariate_factors.cols(); }

  /// Frontal slice q.
  MatrixX<Scalar> slice(Index q) const {
    return node_factors.transpose() * covariate_factors.col(q).asDiagonal() * node_factors;
  }
};

using SemiSymmetricTensor = BasicSemiSymmetricTensor<double>;

/// M x_3 x^T = sum_k (a2_k . x) a1_k a1_k^T
template <typename Scalar, typename Derived>
MatrixX<Scalar> tensor_covariate_contraction(const BasicSemiSymmetricTensor<Scalar>& tensor,
                                             const Eigen::MatrixBase<Derived>& x) {
  if (tensor.covariate_factors.cols() != x.size())
    throw InputError("tensor_covariate_contraction: covariate length mismatch");
  if (tensor.node_factors.rows() != tensor.covariate_factors.rows())
    throw InputError("tensor_covariate_contraction: factor rank mismatch");
  const VectorX<Scalar> weights = tensor.covariate_factors * x;
  MatrixX<Scalar> out = tensor.node_factors.transpose() * weights.asDiagonal() * tensor.node_factors;
  out.template triangularView<Eigen::StrictlyLower>() = out.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct SurvivalRecord {
  double time = 1.0;   // observed follow-up time
  int event = 1;       // 1 = event observed, 0 = right censored
  int exposure = 0;    // binary exposure
  Vector covariates;   // leading intercept entry of 1
};

struct Dataset {
  std::vector<SurvivalRecord> records;
  std::vector<ConnectivityMatrix> networks;
  std::vector<std::string> covariate_names;  // names of the non-intercept covariates

  Index size() const { return static_cast<Index>(records.size()); }
  Index nodes() const { return networks.empty() ? 0 : networks.front().rows(); }
  Index covariates() const { return records.empty() ? 0 : records.front().covariates.size(); }
};

/// One complete draw of every model unknown.
struct ParameterState {
  Vector beta_x;              // Q
  double beta_z = 0.0;
  Matrix beta;                // J x R, outcome-side subgraph coefficients
  IndicatorMatrix gamma;      // J x R
  Vector omega;               // J
  Vector psi_omega;           // J, mixing variances for omega
  Matrix alpha;               // H x R, exposure-side subgraph coefficients
  IndicatorMatrix tau;        // H x R
  Vector eta;                 // H
  Vector psi_eta;             // H
  SemiSymmetricTensor tensor;
  double sigma0_sq = 1.0;
  double sigma1_sq = 1.0;
  Vector latent_log_times;    // N

  Index outcome_graphs() const { return beta.rows(); }
  Index exposure_graphs() const { return alpha.rows(); }
  Index nodes() const { return beta.cols(); }
};

struct Hyperparameters {
  int H = 3;
  int J = 3;
  int K = 3;
  double upsilon1 = 10.0;  // slab variance for beta
  double upsilon2 = 10.0;  // slab variance for alpha
  double mrf_mu = 0.0;
  double mrf_nu = 0.0;
  std::vector<std::pair<Index, Index>> knowledge_graph;  // 0-based node pairs
  double lambda_omega = 1.0;
  double lambda_eta = 1.0;
  double sigma_x_sq = 10.0;
  double sigma_z_sq = 10.0;
  double sigma_a_sq = 10.0;
  double ig_shape = 0.01;
  double ig_scale = 0.01;
};

/// Throws InputError if any variance/rate is nonpositive, counts are < 1, or
/// knowledge-graph edges are invalid for `nodes` nodes.
void validate(const Hyperparameters& hyper, Index nodes);

/// Zero-initialised state with the given dimensions.
ParameterState make_state(Index N, Index R, Index Q, int H, int J, int K);

/// Throws InputError unless the state's dimensions agree with the dataset and
/// beta/alpha are zero wherever their indicators are zero.
void check_state(const ParameterState& state, const Dataset& data);

struct Violation {
  std::string kind;  // e.g. "hollow", "symmetry", "length"
  long index = -1;   // record / network index, -1 for dataset-level
  std::string message;
  bool warning = false;
};

struct ValidationReport {
  std::vector<Violation> violations;

  /// True when no violation is an error (warnings allowed).
  bool ok() const;
  std::vector<Violation> errors() const;
};

/// Checks every dataset invariant; never throws.
ValidationReport validate(const Dataset& data);

/// 64-bit mixing function used to derive per-chain / per-replicate seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace bsgm
