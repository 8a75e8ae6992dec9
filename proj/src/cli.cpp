#include "bsgm/cli.hpp"

#include "bsgm/diagnostics.hpp"
#include "bsgm/io.hpp"
#include "bsgm/oracle.hpp"
#include "bsgm/parallel.hpp"
#include "bsgm/sampler.hpp"
#include "bsgm/simulate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>
#include <set>

namespace bsgm {

namespace {

using Clock = std::chrono::steady_clock;

/// Flags shared by every command.
struct CommonFlags {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  int workers = default_workers();
  double level = 0.95;
  double cutoff = 0.5;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* level_opt = nullptr;
  CLI::Option* cutoff_opt = nullptr;
};

struct ChainFlags {
  long iterations = 0, burn_in = 0, thin = 0;
  int chains = 0;
  CLI::Option *iterations_opt = nullptr, *burn_in_opt = nullptr, *thin_opt = nullptr, *chains_opt = nullptr;
};

struct VerifyOptions {
  int effect_states = 3;
  long effect_draws = 100000;
  Index effect_nodes = 5;
  long geweke_samples = 10000;
  double geweke_fault = 0.0;
  long ratio_pairs = 200;
};

/// Effective configuration: config file first, flags on top.
struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  double level = 0.95;
  double cutoff = 0.5;
  SimulationConfig simulation;
  Hyperparameters hyper;
  bool hyper_given = false;
  ChainConfig chain;
  int chains = 0;  // 0: command default
  int replicates = 50;
  Json grid = Json::object();
  VerifyOptions verify;
};

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& context) {
  if (!j.is_object()) throw InputError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw InputError(context + ": unknown field '" + key + "'");
}

template <typename T>
T field(const Json& j, const std::string& key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(context + ": field '" + key + "' has the wrong type");
  }
}

void apply_chain(const Json& j, ChainConfig& c, int& chains) {
  const std::string ctx = "config.chain";
  reject_unknown(j, {"iterations", "burn_in", "thin", "chains", "random_scan", "exposure", "reference",
                     "refresh_interval", "init"},
                 ctx);
  if (j.contains("iterations")) c.iterations = field<long>(j, "iterations", ctx);
  if (j.contains("burn_in")) c.burn_in = field<long>(j, "burn_in", ctx);
  if (j.contains("thin")) c.thin = field<long>(j, "thin", ctx);
  if (j.contains("chains")) chains = field<int>(j, "chains", ctx);
  if (j.contains("random_scan")) c.random_scan = field<bool>(j, "random_scan", ctx);
  if (j.contains("exposure")) c.exposure = field<int>(j, "exposure", ctx);
  if (j.contains("reference")) c.reference = field<int>(j, "reference", ctx);
  if (j.contains("refresh_interval")) c.refresh_interval = field<long>(j, "refresh_interval", ctx);
  if (j.contains("init")) {
    const auto name = field<std::string>(j, "init", ctx);
    if (name == "moment")
      c.strategy = InitStrategy::Moment;
    else if (name == "random")
      c.strategy = InitStrategy::Random;
    else
      throw InputError(ctx + ".init must be \"moment\" or \"random\", got \"" + name + "\"");
  }
}

void apply_verify(const Json& j, VerifyOptions& v) {
  const std::string ctx = "config.verify";
  reject_unknown(j, {"effect_states", "effect_draws", "effect_nodes", "geweke_samples", "geweke_fault",
                     "ratio_pairs"},
                 ctx);
  if (j.contains("effect_states")) v.effect_states = field<int>(j, "effect_states", ctx);
  if (j.contains("effect_draws")) v.effect_draws = field<long>(j, "effect_draws", ctx);
  if (j.contains("effect_nodes")) v.effect_nodes = field<Index>(j, "effect_nodes", ctx);
  if (j.contains("geweke_samples")) v.geweke_samples = field<long>(j, "geweke_samples", ctx);
  if (j.contains("geweke_fault")) v.geweke_fault = field<double>(j, "geweke_fault", ctx);
  if (j.contains("ratio_pairs")) v.ratio_pairs = field<long>(j, "ratio_pairs", ctx);
  if (v.effect_states < 0 || v.effect_draws < 2 || v.effect_nodes < 2 || v.geweke_samples < 0 ||
      v.ratio_pairs < 0)
    throw InputError(ctx + ": counts must be nonnegative, effect_draws >= 2 and effect_nodes >= 2");
}

RunConfig load_config(const CommonFlags& common, const ChainFlags* chain_flags) {
  RunConfig cfg;
  cfg.workers = common.workers;
  if (!common.config.empty()) {
    const Json j = read_json(common.config);
    reject_unknown(j, {"seed", "workers", "level", "cutoff", "simulation", "hyperparameters", "chain", "study",
                       "grid", "verify"},
                   "config");
    if (j.contains("seed")) cfg.seed = field<std::uint64_t>(j, "seed", "config");
    if (j.contains("workers")) cfg.workers = field<int>(j, "workers", "config");
    if (j.contains("level")) cfg.level = field<double>(j, "level", "config");
    if (j.contains("cutoff")) cfg.cutoff = field<double>(j, "cutoff", "config");
    if (j.contains("simulation")) cfg.simulation = simulation_config_from_json(j.at("simulation"));
    if (j.contains("hyperparameters")) {
      cfg.hyper = hyperparameters_from_json(j.at("hyperparameters"));
      cfg.hyper_given = true;
    }
    if (j.contains("chain")) apply_chain(j.at("chain"), cfg.chain, cfg.chains);
    if (j.contains("study")) {
      const Json& s = j.at("study");
      reject_unknown(s, {"replicates", "chains"}, "config.study");
      if (s.contains("replicates")) cfg.replicates = field<int>(s, "replicates", "config.study");
      if (s.contains("chains")) cfg.chains = field<int>(s, "chains", "config.study");
    }
    if (j.contains("grid")) cfg.grid = j.at("grid");
    if (j.contains("verify")) apply_verify(j.at("verify"), cfg.verify);
  }
  if (common.seed_opt->count()) cfg.seed = common.seed;
  if (common.workers_opt->count()) cfg.workers = common.workers;
  if (common.level_opt->count()) cfg.level = common.level;
  if (common.cutoff_opt->count()) cfg.cutoff = common.cutoff;
  if (chain_flags) {
    if (chain_flags->iterations_opt->count()) cfg.chain.iterations = chain_flags->iterations;
    if (chain_flags->burn_in_opt->count()) cfg.chain.burn_in = chain_flags->burn_in;
    if (chain_flags->thin_opt->count()) cfg.chain.thin = chain_flags->thin;
    if (chain_flags->chains_opt->count()) cfg.chains = chain_flags->chains;
  }
  if (cfg.workers < 1) throw InputError("workers must be at least 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw InputError("level must lie in (0, 1)");
  if (!(cfg.cutoff > 0.0 && cfg.cutoff < 1.0)) throw InputError("cutoff must lie in (0, 1)");
  cfg.chain.seed = cfg.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  f.seed_opt = cmd->add_option("--seed", f.seed, "Master random seed");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  f.workers_opt = cmd->add_option("--workers", f.workers, "Worker threads (default: available parallelism)");
  f.level_opt = cmd->add_option("--level", f.level, "Credible level (default 0.95)");
  f.cutoff_opt = cmd->add_option("--cutoff", f.cutoff, "Inclusion-frequency cutoff (default 0.5)");
}

void add_chain(CLI::App* cmd, ChainFlags& f) {
  f.iterations_opt = cmd->add_option("--iterations", f.iterations, "Gibbs sweeps per chain");
  f.burn_in_opt = cmd->add_option("--burn-in", f.burn_in, "Discarded initial sweeps");
  f.thin_opt = cmd->add_option("--thin", f.thin, "Keep every thin-th draw");
  f.chains_opt = cmd->add_option("--chains", f.chains, "Number of chains");
}

Json chain_json(const ChainConfig& c, int chains) {
  Json j = to_json(c);
  j["chains"] = chains;
  return j;
}

/// Writes run_manifest.json last, after every other output of the command.
void write_manifest(const fs::path& out, const std::string& command, const Json& config, std::uint64_t seed,
                    const Json& inputs, Clock::time_point start) {
  Json m;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = seed;
  m["version"] = kVersion;
  m["inputs"] = inputs;
  m["output"] = out.string();
  m["duration_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_json(out / "run_manifest.json", m);
}

std::vector<const DrawStore*> pointers(const std::vector<DrawStore>& stores) {
  std::vector<const DrawStore*> out;
  for (const auto& s : stores) out.push_back(&s);
  return out;
}

Dataset load_valid_dataset(const std::string& dir) {
  Dataset data = load_dataset(dir);
  const ValidationReport report = validate(data);
  if (!report.ok()) {
    std::string message = "dataset failed validation:";
    for (const auto& v : report.errors())
      message += "\n  " + v.kind + (v.index >= 0 ? " (record " + std::to_string(v.index + 1) + ")" : "") + ": " +
                 v.message;
    throw InputError(message);
  }
  std::map<std::string, std::pair<long, std::string>> warnings;
  for (const auto& v : report.violations)
    if (v.warning) {
      auto& w = warnings[v.kind];
      if (w.first++ == 0) w.second = v.message;
    }
  for (const auto& [kind, w] : warnings)
    std::cerr << "warning: " << kind << ": " << w.second << " (" << w.first << " occurrences)\n";
  return data;
}

Json selection_json(const SelectionResult& s, const GraphWeightSummary& w) {
  Json j = to_json(s);
  Json omega = Json::array(), eta = Json::array();
  for (const auto& e : w.omega) omega.push_back(to_json(e));
  for (const auto& e : w.eta) eta.push_back(to_json(e));
  j["omega_intervals"] = omega;
  j["eta_intervals"] = eta;
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SimulateFlags {
  std::string scenario, setting;
};

int cmd_simulate(const CommonFlags& common, const SimulateFlags& flags) {
  const auto start = Clock::now();
  RunConfig cfg = load_config(common, nullptr);
  if (!flags.scenario.empty()) cfg.simulation.scenario = parse_scenario(flags.scenario);
  if (!flags.setting.empty()) cfg.simulation.setting = parse_setting(flags.setting);
  validate(cfg.simulation);

  Rng truth_rng(derive_seed(cfg.seed, 0));
  const SimulationTruth truth = build_truth(cfg.simulation, truth_rng);
  Rng data_rng(derive_seed(derive_seed(cfg.seed, 1), 0));
  GenerationLog log;
  const Dataset data = generate_dataset(truth, cfg.simulation.N, data_rng, &log);

  const fs::path out = common.out;
  save_dataset(data, out);
  Json t = to_json(truth);
  long censored = 0;
  for (const auto& r : data.records) censored += r.event == 0;
  t["censored_fraction"] = static_cast<double>(censored) / static_cast<double>(data.size());
  t["resampled_covariates"] = log.resampled_covariates;
  write_json(out / "truth.json", t);
  write_manifest(out, "simulate", {{"simulation", to_json(cfg.simulation)}}, cfg.seed, Json::object(), start);
  std::cout << "simulate: N=" << data.size() << " R=" << data.nodes() << " censored=" << censored << " -> "
            << out.string() << "\n";
  return kExitOk;
}

struct FitFlags {
  std::string data, hyper;
};

int cmd_fit(const CommonFlags& common, const ChainFlags& chain_flags, const FitFlags& flags) {
  const auto start = Clock::now();
  RunConfig cfg = load_config(common, &chain_flags);
  if (!flags.hyper.empty()) {
    cfg.hyper = hyperparameters_from_json(read_json(flags.hyper));
    cfg.hyper_given = true;
  }
  const int chains = cfg.chains > 0 ? cfg.chains : 2;
  const Dataset data = load_valid_dataset(flags.data);
  validate(cfg.hyper, data.nodes());

  const auto stores = run_chains(data, cfg.hyper, cfg.chain, chains, cfg.workers);
  const auto ptrs = pointers(stores);

  const fs::path out = common.out;
  write_text_atomic(out / "draws.csv", draws_csv(stores));
  const InclusionFrequencies freqs = inclusion_frequencies(ptrs);
  write_text_atomic(out / "inclusion.csv", inclusion_csv(freqs));

  Json meta;
  meta["seed"] = cfg.seed;
  Json seeds = Json::array();
  long zero_events = 0;
  for (const auto& s : stores) seeds.push_back(s.seed), zero_events += s.zero_regressor_events;
  meta["chain_seeds"] = seeds;
  meta["chain"] = chain_json(cfg.chain, chains);
  meta["hyperparameters"] = to_json(cfg.hyper);
  meta["dataset"] = {{"path", flags.data}, {"N", data.size()}, {"R", data.nodes()}, {"Q", data.covariates()}};
  meta["kept_draws_per_chain"] = stores.empty() ? 0 : stores.front().size();
  meta["zero_regressor_events"] = zero_events;
  write_json(out / "draws_meta.json", meta);

  write_json(out / "diagnostics.json", to_json(diagnose(ptrs)));

  std::vector<EffectDraw> draws;
  for (const auto& s : stores) draws.insert(draws.end(), s.effects.begin(), s.effects.end());
  const EffectsReport effects = summarize_effects(draws, cfg.level);
  write_json(out / "effects.json", to_json(effects));

  const GraphWeightSummary weights = graph_weight_summary(ptrs, cfg.level);
  write_json(out / "selection.json", selection_json(select_subgraphs(freqs, weights, cfg.cutoff), weights));

  Json config{{"chain", chain_json(cfg.chain, chains)},
              {"hyperparameters", to_json(cfg.hyper)},
              {"level", cfg.level},
              {"cutoff", cfg.cutoff},
              {"workers", cfg.workers}};
  Json inputs{{"data", flags.data}};
  if (!flags.hyper.empty()) inputs["hyperparameters"] = flags.hyper;
  write_manifest(out, "fit", config, cfg.seed, inputs, start);
  std::cout << "fit: " << chains << " chains, " << draws.size() << " kept draws; NIE " << effects.nie.mean << " ["
            << effects.nie.lower << ", " << effects.nie.upper << "] -> " << out.string() << "\n";
  return kExitOk;
}

struct DrawsFlags {
  std::string draws;
};

int cmd_effects(const CommonFlags& common, const DrawsFlags& flags) {
  const auto start = Clock::now();
  const RunConfig cfg = load_config(common, nullptr);
  const fs::path dir = flags.draws;
  const DrawTable table = read_draws_csv(dir / "draws.csv");
  const InclusionFrequencies freqs = read_inclusion_csv(dir / "inclusion.csv");
  const EffectsReport effects = summarize_effects(table, cfg.level);
  const GraphWeightSummary weights = graph_weight_summary(table, cfg.level);
  if (static_cast<std::size_t>(freqs.outcome.rows()) != weights.omega.size() ||
      static_cast<std::size_t>(freqs.exposure.rows()) != weights.eta.size())
    throw InputError("inclusion.csv and draws.csv disagree on the number of graphs");

  const fs::path out = common.out;
  write_json(out / "effects.json", to_json(effects));
  write_json(out / "selection.json", selection_json(select_subgraphs(freqs, weights, cfg.cutoff), weights));
  write_manifest(out, "effects", {{"level", cfg.level}, {"cutoff", cfg.cutoff}}, cfg.seed,
                 {{"draws", flags.draws}}, start);
  std::cout << "effects: NIE " << effects.nie.mean << " NDE " << effects.nde.mean << " TE " << effects.te.mean
            << " -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_diagnose(const CommonFlags& common, const DrawsFlags& flags) {
  const auto start = Clock::now();
  const RunConfig cfg = load_config(common, nullptr);
  const DrawTable table = read_draws_csv(fs::path(flags.draws) / "draws.csv");
  const auto diagnostics = diagnose(table);
  const fs::path out = common.out;
  write_json(out / "diagnostics.json", to_json(diagnostics));
  write_manifest(out, "diagnose", Json::object(), cfg.seed, {{"draws", flags.draws}}, start);
  double worst = 0.0;
  for (const auto& d : diagnostics)
    if (d.rhat) worst = std::max(worst, *d.rhat);
  std::cout << "diagnose: " << diagnostics.size() << " scalars, max R-hat " << worst << " -> " << out.string()
            << "\n";
  return kExitOk;
}

struct TuneFlags {
  std::string data, grid;
};

TuningGrid grid_from_json(const Json& j, const Hyperparameters& base) {
  const std::string ctx = "grid";
  reject_unknown(j, {"H", "J", "mrf_mu", "mrf_nu"}, ctx);
  TuningGrid g;
  g.base = base;
  if (j.contains("H")) g.H = field<std::vector<int>>(j, "H", ctx);
  if (j.contains("J")) g.J = field<std::vector<int>>(j, "J", ctx);
  if (j.contains("mrf_mu")) g.mrf_mu = field<std::vector<double>>(j, "mrf_mu", ctx);
  if (j.contains("mrf_nu")) g.mrf_nu = field<std::vector<double>>(j, "mrf_nu", ctx);
  validate(g);
  return g;
}

int cmd_tune(const CommonFlags& common, const ChainFlags& chain_flags, const TuneFlags& flags) {
  const auto start = Clock::now();
  RunConfig cfg = load_config(common, &chain_flags);
  const Json grid_json = flags.grid.empty() ? cfg.grid : read_json(flags.grid);
  const TuningGrid grid = grid_from_json(grid_json, cfg.hyper);
  const Dataset data = load_valid_dataset(flags.data);
  validate(cfg.hyper, data.nodes());

  const TuningResult result = tune(data, grid, cfg.chain, cfg.workers);
  const fs::path out = common.out;
  write_text_atomic(out / "tuning.csv", tuning_csv(result));
  write_json(out / "best_hyperparameters.json", to_json(result.best));
  Json config{{"chain", chain_json(cfg.chain, 1)},
              {"grid", {{"H", grid.H}, {"J", grid.J}, {"mrf_mu", grid.mrf_mu}, {"mrf_nu", grid.mrf_nu}}},
              {"hyperparameters", to_json(cfg.hyper)},
              {"workers", cfg.workers}};
  Json inputs{{"data", flags.data}};
  if (!flags.grid.empty()) inputs["grid"] = flags.grid;
  write_manifest(out, "tune", config, cfg.seed, inputs, start);
  const auto& best = result.cells[static_cast<std::size_t>(result.best_index)];
  std::cout << "tune: best H=" << best.H << " J=" << best.J << " mu=" << best.mrf_mu << " nu=" << best.mrf_nu
            << " BIC " << best.bic << " -> " << out.string() << "\n";
  return kExitOk;
}

struct VerifyFlags {
  std::string data;
};

int cmd_verify(const CommonFlags& common, const VerifyFlags& flags) {
  const auto start = Clock::now();
  const RunConfig cfg = load_config(common, nullptr);
  const VerifyOptions& v = cfg.verify;
  std::vector<OracleReport> reports;

  // Closed-form effects against the Monte Carlo counterfactual oracle.
  for (int s = 0; s < v.effect_states; ++s) {
    Rng rng(derive_seed(derive_seed(cfg.seed, 0), static_cast<std::uint64_t>(s)));
    const ParameterState state = random_effect_state(v.effect_nodes, rng);
    const Vector x = draw_covariates(rng);
    for (auto r : effect_oracle_reports(state, x, v.effect_draws, rng)) {
      r.statistic = "effects[" + std::to_string(s + 1) + "]." + r.statistic;
      reports.push_back(r);
    }
  }

  if (v.geweke_samples > 0) {
    GewekeConfig g;
    g.samples = v.geweke_samples;
    g.seed = derive_seed(cfg.seed, 1);
    g.variance_shape_offset = v.geweke_fault;
    if (cfg.hyper_given) g.hyper = cfg.hyper;
    for (auto r : geweke_test(g)) {
      r.statistic = "geweke." + r.statistic;
      reports.push_back(r);
    }
  }

  if (v.ratio_pairs > 0) {
    Dataset data;
    Hyperparameters hyper = cfg.hyper;
    if (!flags.data.empty()) {
      data = load_valid_dataset(flags.data);
    } else {
      SimulationConfig tiny;
      tiny.N = 20;
      tiny.R = 5;
      tiny.sparsity = 0.4;
      Rng rng(derive_seed(cfg.seed, 2));
      data = generate_dataset(build_truth(tiny, rng), tiny.N, rng);
      if (!cfg.hyper_given) hyper.H = hyper.J = hyper.K = 2;
    }
    validate(hyper, data.nodes());
    Rng rng(derive_seed(cfg.seed, 3));
    const double tolerance = 1e-8;
    for (const auto& c : conditional_ratio_check(data, hyper, v.ratio_pairs, rng, tolerance))
      reports.push_back(make_report("ratio." + c.block, 0.0, c.max_error, 0.0, tolerance));
  }

  Json list = Json::array();
  long passed = 0;
  for (const auto& r : reports) {
    list.push_back(to_json(r));
    passed += r.pass;
  }
  const fs::path out = common.out;
  write_json(out / "verify_report.json", list);
  Json config{{"effect_states", v.effect_states}, {"effect_draws", v.effect_draws},
              {"effect_nodes", v.effect_nodes},   {"geweke_samples", v.geweke_samples},
              {"geweke_fault", v.geweke_fault},   {"ratio_pairs", v.ratio_pairs}};
  if (cfg.hyper_given) config["hyperparameters"] = to_json(cfg.hyper);
  Json inputs = Json::object();
  if (!flags.data.empty()) inputs["data"] = flags.data;
  write_manifest(out, "verify", config, cfg.seed, inputs, start);
  std::cout << "verify: " << passed << "/" << reports.size() << " checks passed -> " << out.string() << "\n";
  for (const auto& r : reports)
    if (!r.pass) std::cout << "  FAIL " << r.statistic << ": oracle " << r.oracle << " engine " << r.engine << "\n";
  return passed == static_cast<long>(reports.size()) ? kExitOk : kExitRuntime;
}

struct StudyFlags {
  std::string scenario, setting;
  int replicates = 0;
  CLI::Option* replicates_opt = nullptr;
};

int cmd_study(const CommonFlags& common, const ChainFlags& chain_flags, const StudyFlags& flags) {
  const auto start = Clock::now();
  RunConfig cfg = load_config(common, &chain_flags);
  if (!flags.scenario.empty()) cfg.simulation.scenario = parse_scenario(flags.scenario);
  if (!flags.setting.empty()) cfg.simulation.setting = parse_setting(flags.setting);
  if (flags.replicates_opt->count()) cfg.replicates = flags.replicates;

  StudyConfig sc;
  sc.simulation = cfg.simulation;
  sc.hyper = cfg.hyper;
  sc.chain = cfg.chain;
  sc.replicates = cfg.replicates;
  sc.chains = cfg.chains > 0 ? cfg.chains : 1;
  sc.seed = cfg.seed;
  sc.level = cfg.level;
  sc.cutoff = cfg.cutoff;
  sc.workers = cfg.workers;
  const StudyReport report = run_replication_study(sc);

  const fs::path out = common.out;
  write_json(out / "study_report.json", to_json(report));
  Json config{{"simulation", to_json(sc.simulation)},
              {"hyperparameters", to_json(sc.hyper)},
              {"chain", chain_json(sc.chain, sc.chains)},
              {"replicates", sc.replicates},
              {"level", sc.level},
              {"cutoff", sc.cutoff},
              {"workers", sc.workers}};
  write_manifest(out, "study", config, cfg.seed, Json::object(), start);
  std::cout << "study: " << report.completed << "/" << report.replicates << " replicates; NIE bias "
            << report.nie.bias_pct << "% coverage " << report.nie.coverage << " -> " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Bayesian subgraph mediation for survival outcomes with network mediators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags simulate_common, fit_common, effects_common, tune_common, diagnose_common, verify_common,
      study_common;
  ChainFlags fit_chain, tune_chain, study_chain;

  SimulateFlags simulate_flags;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset and its truth");
  add_common(simulate, simulate_common);
  simulate->add_option("--scenario", simulate_flags.scenario, "Censoring scenario: A or B");
  simulate->add_option("--setting", simulate_flags.setting, "Design: simple or rich");

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
  add_common(fit, fit_common);
  add_chain(fit, fit_chain);
  fit->add_option("--data", fit_flags.data, "Dataset directory")->required();
  fit->add_option("--hyper", fit_flags.hyper, "Hyperparameter JSON file")->check(CLI::ExistingFile);

  DrawsFlags effects_flags;
  auto* effects = app.add_subcommand("effects", "Summarize effects and select subgraphs from saved draws");
  add_common(effects, effects_common);
  effects->add_option("--draws", effects_flags.draws, "Directory written by fit")->required();

  TuneFlags tune_flags;
  auto* tune_cmd = app.add_subcommand("tune", "BIC grid search over H, J and the MRF parameters");
  add_common(tune_cmd, tune_common);
  add_chain(tune_cmd, tune_chain);
  tune_cmd->add_option("--data", tune_flags.data, "Dataset directory")->required();
  tune_cmd->add_option("--grid", tune_flags.grid, "Grid JSON file")->check(CLI::ExistingFile);

  DrawsFlags diagnose_flags;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "R-hat and ESS of saved draws");
  add_common(diagnose_cmd, diagnose_common);
  diagnose_cmd->add_option("--draws", diagnose_flags.draws, "Directory written by fit")->required();

  VerifyFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "Effect oracle, Geweke test and conditional-ratio checks");
  add_common(verify, verify_common);
  verify->add_option("--data", verify_flags.data, "Dataset directory for the ratio checks");

  StudyFlags study_flags;
  auto* study = app.add_subcommand("study", "Replication study over simulated datasets");
  add_common(study, study_common);
  add_chain(study, study_chain);
  study->add_option("--scenario", study_flags.scenario, "Censoring scenario: A or B");
  study->add_option("--setting", study_flags.setting, "Design: simple or rich");
  study_flags.replicates_opt = study->add_option("--replicates", study_flags.replicates, "Number of replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(simulate_common, simulate_flags);
    if (fit->parsed()) return cmd_fit(fit_common, fit_chain, fit_flags);
    if (effects->parsed()) return cmd_effects(effects_common, effects_flags);
    if (tune_cmd->parsed()) return cmd_tune(tune_common, tune_chain, tune_flags);
    if (diagnose_cmd->parsed()) return cmd_diagnose(diagnose_common, diagnose_flags);
    if (verify->parsed()) return cmd_verify(verify_common, verify_flags);
    if (study->parsed()) return cmd_study(study_common, study_chain, study_flags);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SamplerError& e) {
    std::cerr << "sampler failure in block '" << e.block() << "': " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"bsgm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace bsgm
