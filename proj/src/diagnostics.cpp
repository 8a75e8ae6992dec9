#include "bsgm/diagnostics.hpp"

#include "bsgm/likelihood.hpp"
#include "bsgm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bsgm {

namespace {

double mean_of(const double* x, std::size_t n) { return std::accumulate(x, x + n, 0.0) / static_cast<double>(n); }

double variance_of(const double* x, std::size_t n, double mean) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x[i] - mean) * (x[i] - mean);
  return s / static_cast<double>(n - 1);
}

}  // namespace

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw InputError("gelman_rubin: at least two chains are required");
  const std::size_t len = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != len) throw InputError("gelman_rubin: chains must have equal length");
  if (len < 4) throw InputError("gelman_rubin: chains must have at least 4 draws");

  const std::size_t n = len / 2;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    for (const double* start : {c.data(), c.data() + (len - n)}) {
      const double m = mean_of(start, n);
      means.push_back(m);
      vars.push_back(variance_of(start, n, m));
    }
  }
  const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(vars.size());
  if (!(W > 0.0)) throw InputError("gelman_rubin: zero within-chain variance (degenerate chains)");
  const double grand = mean_of(means.data(), means.size());
  const double B = static_cast<double>(n) * variance_of(means.data(), means.size(), grand);
  const double nn = static_cast<double>(n);
  const double var_plus = (nn - 1.0) / nn * W + B / nn;
  return std::sqrt(var_plus / W);
}

EssResult effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 10) throw InputError("effective_sample_size: sequence must have at least 10 draws");
  const double nd = static_cast<double>(n);
  const double m = mean_of(x.data(), n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - m;
  const double var0 = std::inner_product(c.begin(), c.end(), c.begin(), 0.0) / nd;
  if (!(var0 > 0.0)) return {nd, true};

  auto rho = [&](std::size_t t) {
    return std::inner_product(c.begin(), c.end() - static_cast<std::ptrdiff_t>(t), c.begin() + static_cast<std::ptrdiff_t>(t),
                              0.0) /
           (nd * var0);
  };
  double sum = 0.0, previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    sum += pair;
    previous = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / nd);
  return {std::min(nd, nd / tau), false};
}

std::vector<std::string> monitored_names(const DrawStore& store) {
  std::vector<std::string> names{"nie", "nde", "te", "sigma0_sq", "sigma1_sq"};
  if (store.empty()) return names;
  for (Index j = 0; j < store.states.front().omega.size(); ++j) names.push_back("omega_" + std::to_string(j + 1));
  for (Index h = 0; h < store.states.front().eta.size(); ++h) names.push_back("eta_" + std::to_string(h + 1));
  return names;
}

std::vector<double> monitored_trace(const DrawStore& store, const std::string& name) {
  std::vector<double> out;
  out.reserve(store.size());
  auto indexed = [&](const std::string& prefix) -> long {
    if (name.rfind(prefix, 0) != 0) return -1;
    return std::stol(name.substr(prefix.size())) - 1;
  };
  for (std::size_t t = 0; t < store.size(); ++t) {
    const auto& s = store.states[t];
    const auto& e = store.effects[t];
    if (name == "nie") out.push_back(e.nie);
    else if (name == "nde") out.push_back(e.nde);
    else if (name == "te") out.push_back(e.te());
    else if (name == "sigma0_sq") out.push_back(s.sigma0_sq);
    else if (name == "sigma1_sq") out.push_back(s.sigma1_sq);
    else if (long j = indexed("omega_"); j >= 0 && j < s.omega.size()) out.push_back(s.omega[j]);
    else if (long h = indexed("eta_"); h >= 0 && h < s.eta.size()) out.push_back(s.eta[h]);
    else throw InputError("monitored_trace: unknown scalar '" + name + "'");
  }
  return out;
}

ScalarDiagnostic diagnose_scalar(const std::string& name, const std::vector<std::vector<double>>& traces) {
  ScalarDiagnostic d;
  d.name = name;
  bool all_degenerate = true;
  bool equal_length = true;
  for (const auto& t : traces) {
    equal_length = equal_length && t.size() == traces.front().size();
    if (t.size() < 10) continue;
    const EssResult e = effective_sample_size(t);
    d.ess += e.ess;
    all_degenerate = all_degenerate && e.degenerate;
  }
  d.degenerate = all_degenerate;
  if (traces.size() >= 2 && equal_length && !all_degenerate && traces.front().size() >= 4) {
    try {
      d.rhat = gelman_rubin(traces);
    } catch (const InputError&) {
      d.rhat.reset();
    }
  }
  return d;
}

std::vector<ScalarDiagnostic> diagnose(const std::vector<const DrawStore*>& stores) {
  if (stores.empty() || stores.front()->empty()) throw InputError("diagnose: no draws");
  std::vector<ScalarDiagnostic> out;
  for (const auto& name : monitored_names(*stores.front())) {
    std::vector<std::vector<double>> traces;
    for (const DrawStore* s : stores) traces.push_back(monitored_trace(*s, name));
    out.push_back(diagnose_scalar(name, traces));
  }
  return out;
}

PosteriorMeanFit posterior_mean_fit(const std::vector<const DrawStore*>& stores, const Dataset& data) {
  double count = 0.0;
  const ParameterState* first = nullptr;
  for (const DrawStore* s : stores)
    if (!s->empty()) {
      first = &s->states.front();
      break;
    }
  if (!first) throw InputError("bic_score: no draws");
  const Index R = first->nodes(), Q = first->beta_x.size(), J = first->beta.rows(), H = first->alpha.rows();
  const Index K = first->tensor.rank();
  if (R != data.nodes() || Q != data.covariates()) throw InputError("bic_score: draws do not match the dataset");

  PosteriorMeanFit fit;
  fit.beta_x = Vector::Zero(Q);
  fit.outcome.assign(static_cast<std::size_t>(J), Matrix::Zero(R, R));
  fit.exposure.assign(static_cast<std::size_t>(H), Matrix::Zero(R, R));
  fit.slices.assign(static_cast<std::size_t>(Q), Matrix::Zero(R, R));
  fit.sigma0_sq = fit.sigma1_sq = 0.0;
  Matrix gamma_freq = Matrix::Zero(J, R), tau_freq = Matrix::Zero(H, R);
  for (const DrawStore* store : stores) {
    for (const auto& s : store->states) {
      fit.beta_x += s.beta_x;
      fit.beta_z += s.beta_z;
      for (Index j = 0; j < J; ++j) fit.outcome[j] += rank1_symmetric(s.beta.row(j).transpose(), s.omega[j]);
      for (Index h = 0; h < H; ++h) fit.exposure[h] += rank1_symmetric(s.alpha.row(h).transpose(), s.eta[h]);
      for (Index q = 0; q < Q; ++q) fit.slices[q] += s.tensor.slice(q);
      fit.sigma0_sq += s.sigma0_sq;
      fit.sigma1_sq += s.sigma1_sq;
      gamma_freq += s.gamma.cast<double>();
      tau_freq += s.tau.cast<double>();
      count += 1.0;
    }
  }
  fit.beta_x /= count;
  fit.beta_z /= count;
  fit.sigma0_sq /= count;
  fit.sigma1_sq /= count;
  gamma_freq /= count;
  tau_freq /= count;

  Index p = Q + 1 + K * (R + Q) + 2;
  auto restrict_to_selected = [&](Matrix& m, const Matrix& freq, Index row) {
    m /= count;
    Index selected = 0;
    for (Index r = 0; r < R; ++r) {
      if (freq(row, r) > 0.5) {
        ++selected;
      } else {
        m.row(r).setZero();
        m.col(r).setZero();
      }
    }
    p += selected + (selected > 0 ? 1 : 0);
  };
  for (Index j = 0; j < J; ++j) restrict_to_selected(fit.outcome[j], gamma_freq, j);
  for (Index h = 0; h < H; ++h) restrict_to_selected(fit.exposure[h], tau_freq, h);
  for (auto& m : fit.slices) m /= count;
  fit.parameters = p;

  Matrix exposure_total = Matrix::Zero(R, R);
  for (const auto& m : fit.exposure) exposure_total += m;
  const double sigma0 = std::sqrt(fit.sigma0_sq);
  double ll = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const auto& rec = data.records[i];
    const auto& a = data.networks[i];
    double mu = rec.covariates.dot(fit.beta_x) + fit.beta_z * rec.exposure;
    for (const auto& m : fit.outcome) mu += frobenius_inner(m, a);
    ll += rec.event ? lognormal_log_density(rec.time, mu, sigma0) : lognormal_log_survival(rec.time, mu, sigma0);

    Matrix g = rec.exposure ? exposure_total : Matrix::Zero(R, R);
    for (Index q = 0; q < Q; ++q) g += rec.covariates[q] * fit.slices[q];
    for (Index l = 1; l < R; ++l)
      for (Index w = 0; w < l; ++w) ll += normal_log_density(a(w, l), g(w, l), fit.sigma1_sq);
  }
  fit.log_likelihood = ll;
  return fit;
}

double bic_score(const std::vector<const DrawStore*>& stores, const Dataset& data) {
  const PosteriorMeanFit fit = posterior_mean_fit(stores, data);
  return -2.0 * fit.log_likelihood + static_cast<double>(fit.parameters) * std::log(static_cast<double>(data.size()));
}

double bic_score(const DrawStore& store, const Dataset& data) { return bic_score(std::vector<const DrawStore*>{&store}, data); }

void validate(const TuningGrid& grid) {
  if (grid.H.empty() || grid.J.empty() || grid.mrf_mu.empty() || grid.mrf_nu.empty())
    throw InputError("tuning grid: every axis needs at least one value");
  for (int h : grid.H)
    if (h < 1) throw InputError("tuning grid: H values must be >= 1");
  for (int j : grid.J)
    if (j < 1) throw InputError("tuning grid: J values must be >= 1");
  for (double nu : grid.mrf_nu)
    if (nu < 0.0) throw InputError("tuning grid: mrf_nu values must be >= 0");
}

TuningResult tune(const Dataset& data, const TuningGrid& grid, const ChainConfig& config, int workers) {
  validate(grid);
  TuningResult result;
  for (int h : grid.H)
    for (int j : grid.J)
      for (double mu : grid.mrf_mu)
        for (double nu : grid.mrf_nu) {
          TuningCell cell;
          cell.H = h;
          cell.J = j;
          cell.mrf_mu = mu;
          cell.mrf_nu = nu;
          result.cells.push_back(cell);
        }
  auto hyper_of = [&](const TuningCell& c) {
    Hyperparameters hp = grid.base;
    hp.H = c.H;
    hp.J = c.J;
    hp.mrf_mu = c.mrf_mu;
    hp.mrf_nu = c.mrf_nu;
    return hp;
  };
  // identical cells share the seed of their first occurrence
  std::vector<std::size_t> seed_index(result.cells.size());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    seed_index[i] = i;
    for (std::size_t k = 0; k < i; ++k) {
      const auto &a = result.cells[i], &b = result.cells[k];
      if (a.H == b.H && a.J == b.J && a.mrf_mu == b.mrf_mu && a.mrf_nu == b.mrf_nu) {
        seed_index[i] = k;
        break;
      }
    }
  }
  parallel_for(result.cells.size(), workers, [&](std::size_t idx) {
    TuningCell& cell = result.cells[idx];
    ChainConfig cfg = config;
    cfg.seed = derive_seed(config.seed, seed_index[idx]);
    try {
      const DrawStore store = run_chain(data, hyper_of(cell), cfg);
      cell.bic = bic_score(store, data);
      cell.ok = std::isfinite(cell.bic);
      cell.status = cell.ok ? "ok" : "non-finite BIC";
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.status = e.what();
    }
  });
  std::string failures;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    if (!c.ok) {
      failures += "\n  cell " + std::to_string(i) + ": " + c.status;
      continue;
    }
    if (result.best_index < 0) {
      result.best_index = static_cast<Index>(i);
      continue;
    }
    const auto& b = result.cells[result.best_index];
    if (c.bic < b.bic || (c.bic == b.bic && c.H + c.J < b.H + b.J)) result.best_index = static_cast<Index>(i);
  }
  if (result.best_index < 0) throw std::runtime_error("tune: every grid cell failed:" + failures);
  result.best = hyper_of(result.cells[result.best_index]);
  return result;
}

}  // namespace bsgm
