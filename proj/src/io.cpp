#include "bsgm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bsgm {

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const Json& value) { write_text_atomic(path, value.dump(2) + "\n"); }

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> lines;  // source line of each row
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvFile read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvFile f;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (f.header.empty()) {
      f.header = std::move(cells);
      continue;
    }
    if (cells.size() != f.header.size())
      throw InputError(path.filename().string() + " line " + std::to_string(number) + ": expected " +
                       std::to_string(f.header.size()) + " fields, found " + std::to_string(cells.size()));
    f.rows.push_back(std::move(cells));
    f.lines.push_back(number);
  }
  if (f.header.empty()) throw InputError(path.filename().string() + ": missing header");
  return f;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw InputError(where + ": '" + s + "' is not a number");
  return v;
}

long parse_long(const std::string& s, const std::string& where) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw InputError(where + ": '" + s + "' is not an integer");
  return v;
}

std::string where(const fs::path& file, long line, const std::string& column) {
  return file.filename().string() + " line " + std::to_string(line) + " column " + column;
}

template <typename T>
T get_field(const Json& j, const std::string& key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(context + ": field '" + key + "' is missing or has the wrong type");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset directory
// ---------------------------------------------------------------------------

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory not found: " + dir.string());
  for (const char* name : {"manifest.json", "survival.csv", "networks.csv"})
    if (!fs::exists(dir / name)) throw InputError("dataset is missing " + std::string(name));

  const Json manifest = read_json(dir / "manifest.json");
  const long N = get_field<long>(manifest, "N", "manifest.json");
  const long R = get_field<long>(manifest, "R", "manifest.json");
  const long Q = get_field<long>(manifest, "Q", "manifest.json");
  if (N < 1 || R < 2 || Q < 1) throw InputError("manifest.json: need N >= 1, R >= 2, Q >= 1");
  std::vector<std::string> names;
  if (manifest.contains("covariate_names"))
    names = get_field<std::vector<std::string>>(manifest, "covariate_names", "manifest.json");
  if (names.size() == static_cast<std::size_t>(Q - 1)) names.insert(names.begin(), "intercept");
  if (names.empty()) {
    names.push_back("intercept");
    for (long q = 1; q < Q; ++q) names.push_back("cov_" + std::to_string(q));
  }
  if (names.size() != static_cast<std::size_t>(Q))
    throw InputError("manifest.json: covariate_names must list Q - 1 (or Q) names");

  Dataset d;
  d.covariate_names = names;
  d.records.resize(static_cast<std::size_t>(N));
  d.networks.assign(static_cast<std::size_t>(N), Matrix::Zero(R, R));

  const fs::path survival_path = dir / "survival.csv";
  const CsvFile survival = read_csv(survival_path);
  std::vector<std::string> expected{"id", "time", "event", "exposure"};
  for (long q = 1; q < Q; ++q) expected.push_back("cov_" + std::to_string(q));
  if (survival.header != expected) {
    std::string h;
    for (const auto& e : expected) h += (h.empty() ? "" : ",") + e;
    throw InputError("survival.csv: header must be " + h);
  }
  std::vector<bool> seen(static_cast<std::size_t>(N), false);
  for (std::size_t k = 0; k < survival.rows.size(); ++k) {
    const auto& row = survival.rows[k];
    const long line = survival.lines[k];
    const long id = parse_long(row[0], where(survival_path, line, "id"));
    if (id < 1 || id > N) throw InputError(where(survival_path, line, "id") + ": id out of range 1.." + std::to_string(N));
    if (seen[id - 1]) throw InputError(where(survival_path, line, "id") + ": duplicate id " + std::to_string(id));
    seen[id - 1] = true;
    SurvivalRecord& rec = d.records[id - 1];
    rec.time = parse_double(row[1], where(survival_path, line, "time"));
    const long event = parse_long(row[2], where(survival_path, line, "event"));
    const long exposure = parse_long(row[3], where(survival_path, line, "exposure"));
    rec.event = static_cast<int>(event);
    rec.exposure = static_cast<int>(exposure);
    rec.covariates.resize(Q);
    rec.covariates[0] = 1.0;
    for (long q = 1; q < Q; ++q)
      rec.covariates[q] = parse_double(row[3 + q], where(survival_path, line, expected[3 + q]));
  }
  for (long i = 0; i < N; ++i)
    if (!seen[i]) throw InputError("survival.csv: no row for id " + std::to_string(i + 1));

  const fs::path network_path = dir / "networks.csv";
  const CsvFile networks = read_csv(network_path);
  if (networks.header != std::vector<std::string>{"id", "row", "col", "value"})
    throw InputError("networks.csv: header must be id,row,col,value");
  std::set<std::tuple<long, long, long>> entries;
  for (std::size_t k = 0; k < networks.rows.size(); ++k) {
    const auto& row = networks.rows[k];
    const long line = networks.lines[k];
    const long id = parse_long(row[0], where(network_path, line, "id"));
    const long w = parse_long(row[1], where(network_path, line, "row"));
    const long l = parse_long(row[2], where(network_path, line, "col"));
    const double v = parse_double(row[3], where(network_path, line, "value"));
    if (id < 1 || id > N) throw InputError(where(network_path, line, "id") + ": id out of range");
    if (w < 1 || l > R || !(w < l))
      throw InputError(where(network_path, line, "row") + ": need 1 <= row < col <= " + std::to_string(R));
    if (!std::isfinite(v)) throw InputError(where(network_path, line, "value") + ": value must be finite");
    if (!entries.emplace(id, w, l).second)
      throw InputError(where(network_path, line, "row") + ": duplicate entry");
    Matrix& a = d.networks[id - 1];
    a(w - 1, l - 1) = v;
    a(l - 1, w - 1) = v;
  }
  return d;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  const Index N = data.size(), R = data.nodes(), Q = data.covariates();
  Json manifest;
  manifest["N"] = N;
  manifest["R"] = R;
  manifest["Q"] = Q;
  std::vector<std::string> names;
  for (Index q = 1; q < Q; ++q)
    names.push_back(static_cast<std::size_t>(q) < data.covariate_names.size() ? data.covariate_names[q]
                                                                               : "cov_" + std::to_string(q));
  manifest["covariate_names"] = names;
  write_json(dir / "manifest.json", manifest);

  std::string s = "id,time,event,exposure";
  for (Index q = 1; q < Q; ++q) s += ",cov_" + std::to_string(q);
  s += "\n";
  for (Index i = 0; i < N; ++i) {
    const auto& r = data.records[i];
    s += std::to_string(i + 1) + "," + format_double(r.time) + "," + std::to_string(r.event) + "," +
         std::to_string(r.exposure);
    for (Index q = 1; q < Q; ++q) s += "," + format_double(r.covariates[q]);
    s += "\n";
  }
  write_text_atomic(dir / "survival.csv", s);

  std::string n = "id,row,col,value\n";
  for (Index i = 0; i < N; ++i) {
    const auto& a = data.networks[i];
    for (Index w = 0; w < R; ++w)
      for (Index l = w + 1; l < R; ++l)
        if (a(w, l) != 0.0)
          n += std::to_string(i + 1) + "," + std::to_string(w + 1) + "," + std::to_string(l + 1) + "," +
               format_double(a(w, l)) + "\n";
  }
  write_text_atomic(dir / "networks.csv", n);
}

// ---------------------------------------------------------------------------
// JSON conversions
// ---------------------------------------------------------------------------

namespace {

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json matrix_json(const IndicatorMatrix& m) { return matrix_json(Matrix(m.cast<double>())); }

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from(const Json& j, const std::string& key) {
  try {
    const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
    const Index nr = static_cast<Index>(rows.size());
    const Index nc = nr ? static_cast<Index>(rows.front().size()) : 0;
    Matrix m(nr, nc);
    for (Index r = 0; r < nr; ++r) {
      if (static_cast<Index>(rows[r].size()) != nc) throw InputError("ragged");
      for (Index c = 0; c < nc; ++c) m(r, c) = rows[r][c];
    }
    return m;
  } catch (const std::exception&) {
    throw InputError("state: field '" + key + "' must be a rectangular numeric matrix");
  }
}

Vector vector_from(const Json& j, const std::string& key) {
  const auto v = get_field<std::vector<double>>(j, key, "state");
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Json edges_json(const EdgeSet& edges) {
  Json out = Json::array();
  for (const auto& [a, b] : edges) out.push_back({a + 1, b + 1});
  return out;
}

Json nodes_json(const std::vector<std::vector<Index>>& sets) {
  Json out = Json::array();
  for (const auto& s : sets) {
    Json nodes = Json::array();
    for (Index r : s) nodes.push_back(r + 1);
    out.push_back(nodes);
  }
  return out;
}

Json indices_json(const std::vector<Index>& v) {
  Json out = Json::array();
  for (Index i : v) out.push_back(i + 1);
  return out;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Hyperparameters hyperparameters_from_json(const Json& j, Index nodes) {
  if (!j.is_object()) throw InputError("hyperparameters: expected a JSON object");
  Hyperparameters h;
  static const std::set<std::string> known{"H",          "J",           "K",          "upsilon1",   "upsilon2",
                                           "mrf_mu",     "mrf_nu",      "knowledge_graph", "lambda_omega",
                                           "lambda_eta", "sigma_x_sq",  "sigma_z_sq", "sigma_a_sq", "ig_shape",
                                           "ig_scale"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw InputError("hyperparameters: unknown field '" + key + "'");
  const std::string ctx = "hyperparameters";
  auto num = [&](const char* key, double& target) {
    if (j.contains(key)) {
      if (!j.at(key).is_number()) throw InputError(ctx + ": field '" + key + "' must be a number");
      target = j.at(key).get<double>();
    }
  };
  auto integer = [&](const char* key, int& target) {
    if (j.contains(key)) {
      if (!j.at(key).is_number_integer()) throw InputError(ctx + ": field '" + key + "' must be an integer");
      target = j.at(key).get<int>();
    }
  };
  integer("H", h.H);
  integer("J", h.J);
  integer("K", h.K);
  num("upsilon1", h.upsilon1);
  num("upsilon2", h.upsilon2);
  num("mrf_mu", h.mrf_mu);
  num("mrf_nu", h.mrf_nu);
  num("lambda_omega", h.lambda_omega);
  num("lambda_eta", h.lambda_eta);
  num("sigma_x_sq", h.sigma_x_sq);
  num("sigma_z_sq", h.sigma_z_sq);
  num("sigma_a_sq", h.sigma_a_sq);
  num("ig_shape", h.ig_shape);
  num("ig_scale", h.ig_scale);
  if (j.contains("knowledge_graph")) {
    std::vector<std::vector<long>> edges;
    try {
      edges = j.at("knowledge_graph").get<std::vector<std::vector<long>>>();
    } catch (const Json::exception&) {
      throw InputError(ctx + ": field 'knowledge_graph' must be a list of node pairs");
    }
    for (const auto& e : edges) {
      if (e.size() != 2) throw InputError(ctx + ": field 'knowledge_graph' entries must be pairs");
      if (e[0] < 1 || e[1] < 1) throw InputError(ctx + ": field 'knowledge_graph' nodes are 1-based");
      h.knowledge_graph.emplace_back(e[0] - 1, e[1] - 1);
    }
  }
  if (nodes > 0) validate(h, nodes);
  return h;
}

Json to_json(const Hyperparameters& h) {
  Json j;
  j["H"] = h.H;
  j["J"] = h.J;
  j["K"] = h.K;
  j["upsilon1"] = h.upsilon1;
  j["upsilon2"] = h.upsilon2;
  j["mrf_mu"] = h.mrf_mu;
  j["mrf_nu"] = h.mrf_nu;
  Json edges = Json::array();
  for (const auto& [a, b] : h.knowledge_graph) edges.push_back({a + 1, b + 1});
  j["knowledge_graph"] = edges;
  j["lambda_omega"] = h.lambda_omega;
  j["lambda_eta"] = h.lambda_eta;
  j["sigma_x_sq"] = h.sigma_x_sq;
  j["sigma_z_sq"] = h.sigma_z_sq;
  j["sigma_a_sq"] = h.sigma_a_sq;
  j["ig_shape"] = h.ig_shape;
  j["ig_scale"] = h.ig_scale;
  return j;
}

Json to_json(const ParameterState& s) {
  Json j;
  j["beta_x"] = vector_json(s.beta_x);
  j["beta_z"] = s.beta_z;
  j["beta"] = matrix_json(s.beta);
  j["gamma"] = matrix_json(s.gamma);
  j["omega"] = vector_json(s.omega);
  j["psi_omega"] = vector_json(s.psi_omega);
  j["alpha"] = matrix_json(s.alpha);
  j["tau"] = matrix_json(s.tau);
  j["eta"] = vector_json(s.eta);
  j["psi_eta"] = vector_json(s.psi_eta);
  j["node_factors"] = matrix_json(s.tensor.node_factors);
  j["covariate_factors"] = matrix_json(s.tensor.covariate_factors);
  j["sigma0_sq"] = s.sigma0_sq;
  j["sigma1_sq"] = s.sigma1_sq;
  j["latent_log_times"] = vector_json(s.latent_log_times);
  return j;
}

ParameterState state_from_json(const Json& j) {
  ParameterState s;
  s.beta_x = vector_from(j, "beta_x");
  s.beta_z = get_field<double>(j, "beta_z", "state");
  s.beta = matrix_from(j, "beta");
  s.gamma = matrix_from(j, "gamma").cast<int>();
  s.omega = vector_from(j, "omega");
  s.psi_omega = vector_from(j, "psi_omega");
  s.alpha = matrix_from(j, "alpha");
  s.tau = matrix_from(j, "tau").cast<int>();
  s.eta = vector_from(j, "eta");
  s.psi_eta = vector_from(j, "psi_eta");
  s.tensor.node_factors = matrix_from(j, "node_factors");
  s.tensor.covariate_factors = matrix_from(j, "covariate_factors");
  s.sigma0_sq = get_field<double>(j, "sigma0_sq", "state");
  s.sigma1_sq = get_field<double>(j, "sigma1_sq", "state");
  s.latent_log_times = j.contains("latent_log_times") ? vector_from(j, "latent_log_times") : Vector();
  return s;
}

Json to_json(const SimulationConfig& c) {
  Json j;
  j["N"] = c.N;
  j["R"] = c.R;
  j["scenario"] = to_string(c.scenario);
  j["setting"] = to_string(c.setting);
  j["sparsity"] = c.sparsity;
  j["nonzero_low"] = c.nonzero_low;
  j["nonzero_high"] = c.nonzero_high;
  j["min_overlap"] = c.min_overlap;
  j["beta_z"] = c.beta_z;
  j["beta_x"] = vector_json(c.beta_x);
  j["tensor_rank"] = c.tensor_rank;
  j["tensor_factor_variance"] = c.tensor_factor_variance;
  j["sigma0_sq"] = c.sigma0_sq;
  j["sigma1_sq"] = c.sigma1_sq;
  j["exposure_probability"] = c.exposure_probability;
  j["binary_covariate_probability"] = c.binary_covariate_probability;
  j["censor_rate"] = c.censor_rate;
  j["xi"] = vector_json(c.xi);
  return j;
}

SimulationConfig simulation_config_from_json(const Json& j, SimulationConfig c) {
  if (!j.is_object()) throw InputError("simulation config: expected a JSON object");
  const std::string ctx = "simulation config";
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "N") c.N = value.get<Index>();
      else if (key == "R") c.R = value.get<Index>();
      else if (key == "scenario") c.scenario = parse_scenario(value.get<std::string>());
      else if (key == "setting") c.setting = parse_setting(value.get<std::string>());
      else if (key == "sparsity") c.sparsity = value.get<double>();
      else if (key == "nonzero_low") c.nonzero_low = value.get<double>();
      else if (key == "nonzero_high") c.nonzero_high = value.get<double>();
      else if (key == "min_overlap") c.min_overlap = value.get<Index>();
      else if (key == "beta_z") c.beta_z = value.get<double>();
      else if (key == "beta_x") c.beta_x = vector_from(j, "beta_x");
      else if (key == "tensor_rank") c.tensor_rank = value.get<int>();
      else if (key == "tensor_factor_variance") c.tensor_factor_variance = value.get<double>();
      else if (key == "sigma0_sq") c.sigma0_sq = value.get<double>();
      else if (key == "sigma1_sq") c.sigma1_sq = value.get<double>();
      else if (key == "exposure_probability") c.exposure_probability = value.get<double>();
      else if (key == "binary_covariate_probability") c.binary_covariate_probability = value.get<double>();
      else if (key == "censor_rate") c.censor_rate = value.get<double>();
      else if (key == "xi") c.xi = vector_from(j, "xi");
      else throw InputError(ctx + ": unknown field '" + key + "'");
    } catch (const Json::exception&) {
      throw InputError(ctx + ": field '" + key + "' has the wrong type");
    }
  }
  validate(c);
  return c;
}

Json to_json(const SimulationTruth& t) {
  Json j;
  j["scenario"] = to_string(t.scenario);
  j["setting"] = to_string(t.setting);
  if (t.scenario == Scenario::A) j["censor_rate"] = t.censor_rate_params[0];
  else j["xi"] = vector_json(t.censor_rate_params);
  j["exposure_probability"] = t.exposure_probability;
  j["binary_covariate_probability"] = t.binary_covariate_probability;
  j["effects"] = {{"nie", t.effects.nie}, {"nde", t.effects.nde}, {"te", t.effects.te()}};
  EdgeSet edges;
  for (Index l = 1; l < t.mediating_mask.cols(); ++l)
    for (Index w = 0; w < l; ++w)
      if (t.mediating_mask(w, l)) edges.emplace(w, l);
  j["mediating_edges"] = edges_json(edges);
  Json state = to_json(t.state);
  state.erase("latent_log_times");
  j["state"] = state;
  return j;
}

Json to_json(const EffectSummary& s) {
  return {{"mean", s.mean}, {"lower", s.lower}, {"upper", s.upper}, {"level", s.level}};
}

Json to_json(const EffectsReport& r) { return {{"nie", to_json(r.nie)}, {"nde", to_json(r.nde)}, {"te", to_json(r.te)}}; }

Json to_json(const SelectionResult& s) {
  Json j;
  j["cutoff"] = s.cutoff;
  j["outcome_nodes"] = nodes_json(s.outcome_nodes);
  j["exposure_nodes"] = nodes_json(s.exposure_nodes);
  j["retained_outcome_graphs"] = indices_json(s.retained_outcome_graphs);
  j["retained_exposure_graphs"] = indices_json(s.retained_exposure_graphs);
  j["outcome_edges"] = edges_json(s.outcome_edges);
  j["exposure_edges"] = edges_json(s.exposure_edges);
  j["mediating_edges"] = edges_json(s.mediating_edges);
  return j;
}

Json to_json(const std::vector<ScalarDiagnostic>& d) {
  Json out = Json::object();
  for (const auto& s : d)
    out[s.name] = {{"rhat", optional_json(s.rhat)}, {"ess", s.ess}, {"degenerate", s.degenerate}};
  return out;
}

Json to_json(const OracleReport& r) {
  return {{"statistic", r.statistic}, {"oracle", r.oracle}, {"engine", r.engine},
          {"se", r.se},               {"bound", r.bound},   {"pass", r.pass}};
}

Json to_json(const StudyReport& r) {
  auto metric = [](const MetricSummary& m) {
    return Json{{"mean", m.mean}, {"bias_pct", m.bias_pct}, {"bias_is_absolute", m.bias_absolute},
                {"coverage", m.coverage}};
  };
  Json j;
  j["setting"] = to_string(r.truth.setting);
  j["scenario"] = to_string(r.truth.scenario);
  j["N"] = r.config.simulation.N;
  j["R"] = r.config.simulation.R;
  j["truth"] = {{"nie", r.truth.effects.nie}, {"nde", r.truth.effects.nde}, {"te", r.truth.effects.te()}};
  j["nie"] = metric(r.nie);
  j["nde"] = metric(r.nde);
  j["te"] = metric(r.te);
  j["sensitivity"] = optional_json(r.sensitivity);
  j["specificity"] = optional_json(r.specificity);
  j["replicates"] = r.replicates;
  j["completed"] = r.completed;
  j["failures"] = r.failures;
  j["resampled_covariates"] = r.resampled_covariates;
  Json details = Json::array();
  for (const auto& d : r.details) {
    Json row;
    row["ok"] = d.ok;
    if (!d.ok) {
      row["error"] = d.error;
    } else {
      row["effects"] = to_json(d.effects);
      row["sensitivity"] = optional_json(d.accuracy.sensitivity);
      row["specificity"] = optional_json(d.accuracy.specificity);
      row["retained_outcome_graphs"] = d.retained_outcome;
      row["retained_exposure_graphs"] = d.retained_exposure;
      row["censored_fraction"] = d.censored_fraction;
      row["zero_regressor_events"] = d.zero_regressor_events;
    }
    details.push_back(row);
  }
  j["replicate_details"] = details;
  return j;
}

Json to_json(const ChainConfig& c) {
  return {{"iterations", c.iterations}, {"burn_in", c.burn_in},       {"thin", c.thin},
          {"seed", c.seed},             {"random_scan", c.random_scan}, {"exposure", c.exposure},
          {"reference", c.reference},   {"refresh_interval", c.refresh_interval},
          {"init", c.strategy == InitStrategy::Moment ? "moment" : "random"}};
}

// ---------------------------------------------------------------------------
// Draw tables
// ---------------------------------------------------------------------------

const std::vector<double>& DrawTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InputError("draws table has no column '" + name + "'");
  return values[static_cast<std::size_t>(it - columns.begin())];
}

bool DrawTable::has(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<std::vector<double>> DrawTable::by_chain(const std::string& name) const {
  const auto& chain = column("chain");
  const auto& v = column(name);
  std::map<long, std::vector<double>> split;
  for (std::size_t i = 0; i < v.size(); ++i) split[std::lround(chain[i])].push_back(v[i]);
  std::vector<std::vector<double>> out;
  for (auto& [c, values] : split) out.push_back(std::move(values));
  return out;
}

std::string draws_csv(const std::vector<DrawStore>& stores) {
  std::string s = "chain,iteration,log_density,nie,nde,te,sigma0_sq,sigma1_sq";
  Index J = 0, H = 0;
  for (const auto& st : stores)
    if (!st.empty()) {
      J = st.states.front().omega.size();
      H = st.states.front().eta.size();
      break;
    }
  for (Index j = 0; j < J; ++j) s += ",omega_" + std::to_string(j + 1);
  for (Index h = 0; h < H; ++h) s += ",eta_" + std::to_string(h + 1);
  s += "\n";
  for (std::size_t c = 0; c < stores.size(); ++c) {
    const auto& st = stores[c];
    for (std::size_t t = 0; t < st.size(); ++t) {
      const auto& x = st.states[t];
      const auto& e = st.effects[t];
      s += std::to_string(c + 1) + "," + std::to_string(st.iterations[t]) + "," + format_double(st.log_density[t]) +
           "," + format_double(e.nie) + "," + format_double(e.nde) + "," + format_double(e.te()) + "," +
           format_double(x.sigma0_sq) + "," + format_double(x.sigma1_sq);
      for (Index j = 0; j < J; ++j) s += "," + format_double(x.omega[j]);
      for (Index h = 0; h < H; ++h) s += "," + format_double(x.eta[h]);
      s += "\n";
    }
  }
  return s;
}

DrawTable read_draws_csv(const fs::path& path) {
  const CsvFile f = read_csv(path);
  DrawTable t;
  t.columns = f.header;
  for (const char* required : {"chain", "iteration", "nie", "nde", "te"})
    if (!t.has(required)) throw InputError(path.filename().string() + ": missing column '" + required + "'");
  t.values.assign(t.columns.size(), {});
  for (std::size_t k = 0; k < f.rows.size(); ++k)
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      t.values[c].push_back(parse_double(f.rows[k][c], where(path, f.lines[k], t.columns[c])));
  if (t.rows() == 0) throw InputError(path.filename().string() + ": no draws");
  return t;
}

std::string inclusion_csv(const InclusionFrequencies& f) {
  std::string s = "side,graph,node,frequency\n";
  auto emit = [&](const char* side, const Matrix& m) {
    for (Index g = 0; g < m.rows(); ++g)
      for (Index r = 0; r < m.cols(); ++r)
        s += std::string(side) + "," + std::to_string(g + 1) + "," + std::to_string(r + 1) + "," +
             format_double(m(g, r)) + "\n";
  };
  emit("outcome", f.outcome);
  emit("exposure", f.exposure);
  return s;
}

InclusionFrequencies read_inclusion_csv(const fs::path& path) {
  const CsvFile f = read_csv(path);
  if (f.header != std::vector<std::string>{"side", "graph", "node", "frequency"})
    throw InputError(path.filename().string() + ": header must be side,graph,node,frequency");
  struct Entry {
    bool outcome;
    long graph, node;
    double freq;
  };
  std::vector<Entry> entries;
  long nodes = 0, outcome_graphs = 0, exposure_graphs = 0;
  for (std::size_t k = 0; k < f.rows.size(); ++k) {
    const auto& row = f.rows[k];
    if (row[0] != "outcome" && row[0] != "exposure")
      throw InputError(where(path, f.lines[k], "side") + ": must be outcome or exposure");
    Entry e{row[0] == "outcome", parse_long(row[1], where(path, f.lines[k], "graph")),
            parse_long(row[2], where(path, f.lines[k], "node")),
            parse_double(row[3], where(path, f.lines[k], "frequency"))};
    if (e.graph < 1 || e.node < 1) throw InputError(where(path, f.lines[k], "graph") + ": indices are 1-based");
    nodes = std::max(nodes, e.node);
    (e.outcome ? outcome_graphs : exposure_graphs) = std::max(e.outcome ? outcome_graphs : exposure_graphs, e.graph);
    entries.push_back(e);
  }
  InclusionFrequencies out;
  out.outcome = Matrix::Zero(outcome_graphs, nodes);
  out.exposure = Matrix::Zero(exposure_graphs, nodes);
  for (const auto& e : entries) (e.outcome ? out.outcome : out.exposure)(e.graph - 1, e.node - 1) = e.freq;
  return out;
}

namespace {

std::vector<std::string> indexed_columns(const DrawTable& t, const std::string& prefix) {
  std::vector<std::string> out;
  for (long k = 1;; ++k) {
    const std::string name = prefix + std::to_string(k);
    if (!t.has(name)) break;
    out.push_back(name);
  }
  return out;
}

}  // namespace

GraphWeightSummary graph_weight_summary(const DrawTable& table, double level) {
  GraphWeightSummary g;
  for (const auto& name : indexed_columns(table, "omega_")) g.omega.push_back(summarize(table.column(name), level));
  for (const auto& name : indexed_columns(table, "eta_")) g.eta.push_back(summarize(table.column(name), level));
  return g;
}

EffectsReport summarize_effects(const DrawTable& table, double level) {
  return {summarize(table.column("nie"), level), summarize(table.column("nde"), level),
          summarize(table.column("te"), level)};
}

std::vector<ScalarDiagnostic> diagnose(const DrawTable& table) {
  std::vector<std::string> names{"nie", "nde", "te", "sigma0_sq", "sigma1_sq"};
  for (const auto& n : indexed_columns(table, "omega_")) names.push_back(n);
  for (const auto& n : indexed_columns(table, "eta_")) names.push_back(n);
  std::vector<ScalarDiagnostic> out;
  for (const auto& name : names)
    if (table.has(name)) out.push_back(diagnose_scalar(name, table.by_chain(name)));
  return out;
}

std::string tuning_csv(const TuningResult& result) {
  std::vector<std::size_t> order(result.cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = result.cells[a], &y = result.cells[b];
    if (x.ok != y.ok) return x.ok;
    if (!x.ok) return false;
    if (x.bic != y.bic) return x.bic < y.bic;
    return x.H + x.J < y.H + y.J;
  });
  std::string s = "H,J,mu,nu,bic,status\n";
  for (std::size_t i : order) {
    const auto& c = result.cells[i];
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    s += std::to_string(c.H) + "," + std::to_string(c.J) + "," + format_double(c.mrf_mu) + "," +
         format_double(c.mrf_nu) + "," + (c.ok ? format_double(c.bic) : std::string("nan")) + "," + status + "\n";
  }
  return s;
}

}  // namespace bsgm
