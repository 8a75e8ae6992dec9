#include "bsgm/core.hpp"
#include "bsgm/distributions.hpp"

#include <doctest.h>

#include <set>

using namespace bsgm;

namespace {

/// Entrywise double loop, independent of the Eigen expression used in the library.
double brute_frobenius(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
  return s;
}

Matrix random_matrix(Index n, Rng& rng) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

Dataset small_dataset() {
  Dataset d;
  for (int i = 0; i < 3; ++i) {
    SurvivalRecord r;
    r.time = 1.0 + i;
    r.event = i % 2;
    r.exposure = i % 2;
    r.covariates = Vector::Ones(2);
    d.records.push_back(r);
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = a(1, 0) = 0.5 * i;
    d.networks.push_back(a);
  }
  return d;
}

}  // namespace

TEST_CASE("frobenius_inner examples") {
  Matrix a = Matrix::Zero(2, 2), b(2, 2);
  b << 1, 2, 3, 4;
  CHECK(frobenius_inner(a, b) == 0.0);
  a << 0, 1, 1, 0;
  CHECK(frobenius_inner(a, a) == doctest::Approx(2.0));

  Vector beta(3), alpha(3);
  beta << 1, 1, 0;
  alpha << 1, 1, 0;
  const Matrix lhs = rank1_symmetric(beta, 2.0);
  const Matrix rhs = 0.5 * hollow(rank1_symmetric(alpha, 1.0));
  CHECK(frobenius_inner(lhs, rhs) == doctest::Approx(brute_frobenius(lhs, rhs)));
  CHECK(frobenius_inner(lhs, rhs) == doctest::Approx(2.0));

  CHECK_THROWS_AS(frobenius_inner(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), InputError);
}

TEST_CASE("rank1_symmetric examples") {
  Vector v(2);
  v << 1, 0;
  Matrix expected(2, 2);
  expected << 1, 0, 0, 0;
  CHECK(rank1_symmetric(v, 1.0) == expected);

  Vector w(3);
  w << 1, 1, 0;
  Matrix e3(3, 3);
  e3 << 2, 2, 0, 2, 2, 0, 0, 0, 0;
  CHECK(rank1_symmetric(w, 2.0) == e3);
  CHECK(rank1_symmetric(Vector::Zero(4), 3.0).isZero(0));

  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    Vector u(5);
    for (Index i = 0; i < 5; ++i) u[i] = rng.normal();
    const Matrix m = rank1_symmetric(u, rng.normal());
    REQUIRE(m == m.transpose());
  }
}

TEST_CASE("hollow examples and properties") {
  CHECK(hollow(Matrix::Identity(4, 4)).isZero(0));
  Matrix a(2, 2), expected(2, 2);
  a << 3, 1, 1, 5;
  expected << 0, 1, 1, 0;
  CHECK(hollow(a) == expected);
  CHECK(hollow(expected) == expected);
  CHECK_THROWS_AS(hollow(Matrix::Zero(2, 3)), InputError);

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    Matrix m = random_matrix(5, rng);
    const Matrix b = random_matrix(5, rng);
    CHECK(frobenius_inner(hollow(m), b) == doctest::Approx(frobenius_inner(hollow(m), hollow(b))).epsilon(1e-12));
    CHECK(hollow(hollow(m)) == hollow(m));
    const Matrix sym = m + m.transpose();
    CHECK(hollow(sym) == hollow(sym).transpose());
  }
}

TEST_CASE("upper_inner sums the strict upper triangle") {
  Rng rng(3);
  const Matrix a = random_matrix(4, rng), b = random_matrix(4, rng);
  double s = 0.0;
  for (Index w = 0; w < 4; ++w)
    for (Index l = w + 1; l < 4; ++l) s += a(w, l) * b(w, l);
  CHECK(upper_inner(a, b) == doctest::Approx(s));
}

TEST_CASE("tensor_covariate_contraction examples") {
  SemiSymmetricTensor t;
  t.node_factors = Matrix(1, 2);
  t.node_factors << 1, 2;
  t.covariate_factors = Matrix(1, 1);
  t.covariate_factors << 3;
  Vector x(1);
  x << 1;
  Matrix brute(2, 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) brute(i, j) = t.node_factors(0, i) * t.node_factors(0, j) * 3.0;
  Matrix expected(2, 2);
  expected << 3, 6, 6, 12;
  CHECK(tensor_covariate_contraction(t, x) == expected);
  CHECK(brute == expected);
  CHECK(tensor_covariate_contraction(t, Vector::Zero(1)).isZero(0));

  SemiSymmetricTensor t2;
  t2.node_factors = Matrix(2, 3);
  t2.node_factors << 1, 2, 3, 4, 5, 6;
  t2.covariate_factors = Matrix(2, 2);
  t2.covariate_factors << 1, -1, 2, -2;
  Vector ones = Vector::Ones(2);
  CHECK(tensor_covariate_contraction(t2, ones).isZero(0));

  CHECK_THROWS_AS(tensor_covariate_contraction(t2, Vector::Ones(3)), InputError);
}

TEST_CASE("tensor slices are symmetric and the contraction is linear") {
  Rng rng(17);
  SemiSymmetricTensor t;
  t.node_factors = Matrix(3, 6);
  t.covariate_factors = Matrix(3, 4);
  for (Index i = 0; i < t.node_factors.size(); ++i) t.node_factors.data()[i] = rng.normal();
  for (Index i = 0; i < t.covariate_factors.size(); ++i) t.covariate_factors.data()[i] = rng.normal();
  for (Index q = 0; q < 4; ++q) {
    const Matrix s = t.slice(q);
    CHECK((s - s.transpose()).norm() <= 1e-12 * s.norm());
  }
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(4), y(4);
    for (Index q = 0; q < 4; ++q) x[q] = rng.normal(), y[q] = rng.normal();
    const Matrix lhs = tensor_covariate_contraction(t, Vector(x + y));
    const Matrix rhs = tensor_covariate_contraction(t, x) + tensor_covariate_contraction(t, y);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, lhs.norm()));
    Matrix by_slices = Matrix::Zero(6, 6);
    for (Index q = 0; q < 4; ++q) by_slices += x[q] * t.slice(q);
    CHECK((by_slices - tensor_covariate_contraction(t, x)).norm() <= 1e-10 * std::max(1.0, by_slices.norm()));
  }
}

TEST_CASE("validate dataset") {
  Dataset d = small_dataset();
  CHECK(validate(d).violations.empty());
  CHECK(validate(d).ok());

  Dataset bad = d;
  bad.networks[1](2, 2) = 0.5;
  auto report = validate(bad);
  REQUIRE(report.errors().size() == 1);
  CHECK(report.errors()[0].kind == "hollow");
  CHECK(report.errors()[0].index == 1);

  Dataset short_networks = d;
  short_networks.networks.pop_back();
  report = validate(short_networks);
  REQUIRE(!report.ok());
  CHECK(report.errors()[0].kind == "length");

  Dataset asym = d;
  asym.networks[0](0, 2) = 1.0;
  CHECK(validate(asym).errors()[0].kind == "symmetry");

  Dataset negative = d;
  negative.networks[2](0, 1) = negative.networks[2](1, 0) = -1.0;
  report = validate(negative);
  CHECK(report.ok());
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].warning);

  Dataset bad_record = d;
  bad_record.records[0].time = 0.0;
  bad_record.records[1].event = 2;
  bad_record.records[2].covariates[0] = 0.0;
  std::set<std::string> kinds;
  for (const auto& v : validate(bad_record).errors()) kinds.insert(v.kind);
  CHECK(kinds == std::set<std::string>{"time", "event", "intercept"});
}

TEST_CASE("validate hyperparameters") {
  Hyperparameters h;
  CHECK_NOTHROW(validate(h, 5));
  h.knowledge_graph = {{0, 4}};
  CHECK_NOTHROW(validate(h, 5));
  h.knowledge_graph = {{0, 5}};
  CHECK_THROWS_AS(validate(h, 5), InputError);
  h.knowledge_graph = {{2, 2}};
  CHECK_THROWS_AS(validate(h, 5), InputError);
  Hyperparameters g;
  g.ig_shape = 0.0;
  CHECK_THROWS_AS(validate(g, 5), InputError);
  Hyperparameters k;
  k.H = 0;
  CHECK_THROWS_AS(validate(k, 5), InputError);
  Hyperparameters n;
  n.mrf_nu = -1.0;
  CHECK_THROWS_AS(validate(n, 5), InputError);
}

TEST_CASE("check_state enforces indicator zeros and dimensions") {
  const Dataset d = small_dataset();
  ParameterState s = make_state(3, 3, 2, 1, 1, 1);
  CHECK_NOTHROW(check_state(s, d));
  s.beta(0, 1) = 0.3;
  CHECK_THROWS_AS(check_state(s, d), InputError);
  s.gamma(0, 1) = 1;
  CHECK_NOTHROW(check_state(s, d));
  s.alpha(0, 0) = 1.0;
  CHECK_THROWS_AS(check_state(s, d), InputError);
  ParameterState wrong = make_state(3, 4, 2, 1, 1, 1);
  CHECK_THROWS_AS(check_state(wrong, d), InputError);
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 10; ++m)
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 1000);
}
