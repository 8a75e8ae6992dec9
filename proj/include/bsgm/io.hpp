#pragma once

#include "bsgm/core.hpp"
#include "bsgm/diagnostics.hpp"
#include "bsgm/effects.hpp"
#include "bsgm/oracle.hpp"
#include "bsgm/sampler.hpp"
#include "bsgm/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace bsgm {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_text_atomic(const fs::path& path, const std::string& content);
Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& value);

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Dataset directory: manifest.json, survival.csv, networks.csv
// ---------------------------------------------------------------------------

/// Loads a dataset directory. The intercept column is added on load; networks
/// are mirrored from their strictly-upper-triangle entries. Malformed input
/// throws InputError naming the file and line.
Dataset load_dataset(const fs::path& dir);
void save_dataset(const Dataset& data, const fs::path& dir);

// ---------------------------------------------------------------------------
// JSON conversions
// ---------------------------------------------------------------------------

/// Keys equal the Hyperparameters field names; knowledge_graph is a list of
/// 1-based node pairs. Missing keys keep their defaults; unknown keys throw.
Hyperparameters hyperparameters_from_json(const Json& j, Index nodes = -1);
Json to_json(const Hyperparameters& h);

Json to_json(const ParameterState& s);
ParameterState state_from_json(const Json& j);

Json to_json(const SimulationConfig& c);
/// Overlays the keys present in j onto `base`; unknown keys throw.
SimulationConfig simulation_config_from_json(const Json& j, SimulationConfig base = {});

Json to_json(const SimulationTruth& t);
Json to_json(const EffectSummary& s);
Json to_json(const EffectsReport& r);
Json to_json(const SelectionResult& s);
Json to_json(const std::vector<ScalarDiagnostic>& d);
Json to_json(const OracleReport& r);
Json to_json(const StudyReport& r);
Json to_json(const ChainConfig& c);

// ---------------------------------------------------------------------------
// Draw tables
// ---------------------------------------------------------------------------

/// Columnar view of draws.csv: chain, iteration, log_density, nie, nde, te,
/// sigma0_sq, sigma1_sq, omega_<j>, eta_<h>.
struct DrawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // one vector per column

  std::size_t rows() const { return values.empty() ? 0 : values.front().size(); }
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  /// Splits a column by the chain column.
  std::vector<std::vector<double>> by_chain(const std::string& name) const;
};

std::string draws_csv(const std::vector<DrawStore>& stores);
DrawTable read_draws_csv(const fs::path& path);

/// Long format: side, graph, node, frequency (graph and node 1-based).
std::string inclusion_csv(const InclusionFrequencies& f);
InclusionFrequencies read_inclusion_csv(const fs::path& path);

/// Graph-weight intervals from the omega_* / eta_* columns of a draw table.
GraphWeightSummary graph_weight_summary(const DrawTable& table, double level);
EffectsReport summarize_effects(const DrawTable& table, double level);
std::vector<ScalarDiagnostic> diagnose(const DrawTable& table);

/// H, J, mu, nu, bic, status; rows sorted by BIC with failed cells last.
std::string tuning_csv(const TuningResult& result);

}  // namespace bsgm
