#include "reprindt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "reprindt/error.hpp"
#include "reprindt/importance.hpp"

namespace reprindt {

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::config, message); }

void require_fraction(double value, const std::string& key) {
  if (!(value > 0.0 && value <= 1.0)) {
    config_error(key + ": " + format_fraction(value) + " is outside (0, 1]");
  }
}

std::size_t require_count(std::int64_t value, const std::string& key, std::int64_t minimum) {
  if (value < minimum) config_error(key + ": must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(value);
}

// Accepts a decimal or a ratio such as 528/5618.
double parse_ratio(const std::string& text, const std::string& key) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_double(text, key);
  const double num = parse_double(text.substr(0, slash), key);
  const double den = parse_double(text.substr(slash + 1), key);
  if (den == 0.0) config_error(key + ": zero denominator");
  return num / den;
}

StratificationKind parse_mode(const std::string& text, const std::string& key) {
  if (text == "unstratified") return StratificationKind::unstratified;
  if (text == "proportional") return StratificationKind::proportional;
  if (text == "min_criterion") return StratificationKind::min_criterion;
  config_error(key + ": unknown mode '" + text + "' (unstratified, proportional, min_criterion)");
}

PValueMode parse_pvalue_mode(const std::string& text, const std::string& key) {
  if (text == "automatic") return PValueMode::automatic;
  if (text == "exact") return PValueMode::exact;
  if (text == "monte_carlo") return PValueMode::monte_carlo;
  config_error(key + ": unknown p-value mode '" + text + "' (automatic, exact, monte_carlo)");
}

void parse_tree_section(const ConfigSection& s, CtreeSettings& tree) {
  s.require_known_keys({"alpha", "min_split", "min_bucket", "max_depth", "permutations", "pvalue", "exact_limit",
                        "max_exhaustive_levels"});
  tree.alpha = s.get_double("alpha", tree.alpha);
  if (!(tree.alpha > 0.0 && tree.alpha <= 1.0)) config_error(s.qualified("alpha") + ": must lie in (0, 1]");
  tree.min_split = require_count(s.get_int("min_split", static_cast<std::int64_t>(tree.min_split)),
                                 s.qualified("min_split"), 2);
  tree.min_bucket = require_count(s.get_int("min_bucket", static_cast<std::int64_t>(tree.min_bucket)),
                                  s.qualified("min_bucket"), 1);
  if (s.has("max_depth")) tree.max_depth = require_count(s.get_int("max_depth", 0), s.qualified("max_depth"), 1);
  tree.permutations = require_count(s.get_int("permutations", static_cast<std::int64_t>(tree.permutations)),
                                    s.qualified("permutations"), 1);
  if (const auto mode = s.get("pvalue")) tree.pvalue_mode = parse_pvalue_mode(*mode, s.qualified("pvalue"));
  tree.exact_limit = require_count(s.get_int("exact_limit", static_cast<std::int64_t>(tree.exact_limit)),
                                   s.qualified("exact_limit"), 0);
  tree.max_exhaustive_levels = require_count(
      s.get_int("max_exhaustive_levels", static_cast<std::int64_t>(tree.max_exhaustive_levels)),
      s.qualified("max_exhaustive_levels"), 2);
  if (tree.max_exhaustive_levels > 20) config_error(s.qualified("max_exhaustive_levels") + ": must be at most 20");
}

std::string mode_name(StratificationKind kind) { return to_string(kind); }

ImportanceReport empty_importance(const Dataset& data, std::size_t missing) {
  std::vector<std::string> names;
  for (const auto& spec : data.schema()) names.push_back(spec.name);
  const std::vector<double> zeros(names.size(), 0.0);
  return normalize_importance(names, zeros, 0, missing);
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::invalid_parameter:
      return kExitConfig;
    case ErrorCode::missing_value:
    case ErrorCode::not_binary:
    case ErrorCode::unknown_level:
    case ErrorCode::schema_mismatch:
    case ErrorCode::invalid_value:
    case ErrorCode::empty_sample:
    case ErrorCode::degenerate_input:
    case ErrorCode::missing_class:
    case ErrorCode::length_mismatch:
    case ErrorCode::io:
      return kExitData;
  }
  return kExitFailure;
}

SyntheticSpec parse_synthetic_section(const ConfigSection& s) {
  s.require_known_keys({"n", "imbalance", "seed", "class", "labels", "signal", "noise", "output"});
  SyntheticSpec spec;
  spec.n = require_count(s.get_int("n", static_cast<std::int64_t>(spec.n)), s.qualified("n"), 20);
  if (const auto imbalance = s.get("imbalance")) spec.imbalance = parse_ratio(*imbalance, s.qualified("imbalance"));
  if (!(spec.imbalance > 0.0 && spec.imbalance <= 1.0)) {
    config_error(s.qualified("imbalance") + ": " + format_fraction(spec.imbalance) + " is outside (0, 1]");
  }
  spec.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<std::int64_t>(spec.seed)));
  if (const auto name = s.get("class")) spec.class_name = *name;
  if (const auto labels = s.get("labels")) {
    const auto parts = split(*labels, ',');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty() || parts[0] == parts[1]) {
      config_error(s.qualified("labels") + ": expected two distinct labels 'small, large'");
    }
    spec.labels = {parts[0], parts[1]};
  }
  for (const auto& text : s.get_all("signal")) {
    // name : categorical : a|b|c : effect [: w1|w2|w3]   or   name : numeric : effect
    const auto parts = split(text, ':');
    const std::string key = s.qualified("signal");
    if (parts.size() < 3) config_error(key + ": expected 'name : kind : ...' in '" + text + "'");
    SyntheticPredictor predictor;
    predictor.spec.name = parts[0];
    if (parts[1] == "numeric") {
      if (parts.size() != 3) config_error(key + ": numeric signal is 'name : numeric : effect'");
      predictor.spec.kind = PredictorKind::numeric;
      predictor.effect = parse_double(parts[2], key);
    } else if (parts[1] == "categorical") {
      if (parts.size() != 4 && parts.size() != 5) {
        config_error(key + ": categorical signal is 'name : categorical : levels : effect [: weights]'");
      }
      predictor.spec.kind = PredictorKind::categorical;
      predictor.spec.levels = split(parts[2], '|');
      predictor.effect = parse_double(parts[3], key);
      if (predictor.effect < 0.0 || predictor.effect > 1.0) config_error(key + ": categorical effect must lie in [0, 1]");
      if (parts.size() == 5) {
        for (const auto& w : split(parts[4], '|')) predictor.weights.push_back(parse_double(w, key));
        if (predictor.weights.size() != predictor.spec.levels.size()) {
          config_error(key + ": weights must match the number of levels");
        }
      }
    } else {
      config_error(key + ": kind must be categorical or numeric, got '" + parts[1] + "'");
    }
    spec.signal.push_back(std::move(predictor));
  }
  spec.noise_predictors = require_count(s.get_int("noise", 0), s.qualified("noise"), 0);
  if (spec.signal.empty() && spec.noise_predictors == 0) {
    config_error(s.name() + ": at least one signal or noise predictor is required");
  }
  return spec;
}

RunConfig parse_run_config(const ConfigFile& file) {
  file.require_known_sections({"data", "synthetic", "grid", "tree", "thresholds", "importance", "output"});
  RunConfig config;

  const ConfigSection* data = file.section("data");
  const ConfigSection* synthetic = file.section("synthetic");
  if (data != nullptr) {
    data->require_known_keys({"path", "delimiter", "class", "categorical", "numeric"});
    const auto path = data->get("path");
    if (!path || path->empty()) config_error(data->qualified("path") + " is required");
    config.data_path = *path;
    config.schema = schema_config_from(*data);
  }
  if (synthetic != nullptr) config.synthetic = parse_synthetic_section(*synthetic);
  if (data == nullptr && synthetic == nullptr) config_error("either a [data] or a [synthetic] section is required");
  if (data != nullptr && synthetic != nullptr) config_error("[data] and [synthetic] are mutually exclusive");

  GridSpec& grid = config.grid;
  if (const ConfigSection* s = file.section("grid")) {
    s->require_known_keys({"psmall", "plarge", "repetitions", "k_best", "modes", "stratify", "min_count",
                           "max_retries", "seed", "forbid"});
    grid.psmall_values = s->get_double_list("psmall", grid.psmall_values);
    grid.plarge_values = s->get_double_list("plarge", grid.plarge_values);
    for (double p : grid.psmall_values) require_fraction(p, s->qualified("psmall"));
    for (double p : grid.plarge_values) require_fraction(p, s->qualified("plarge"));
    grid.repetitions = require_count(s->get_int("repetitions", static_cast<std::int64_t>(grid.repetitions)),
                                     s->qualified("repetitions"), 1);
    grid.k_best = require_count(s->get_int("k_best", static_cast<std::int64_t>(grid.k_best)), s->qualified("k_best"), 1);
    if (grid.repetitions < grid.k_best) config_error(s->qualified("repetitions") + ": must be at least k_best");
    config.modes.clear();
    for (const auto& m : s->get_list("modes", {"unstratified"})) {
      const auto kind = parse_mode(m, s->qualified("modes"));
      if (std::find(config.modes.begin(), config.modes.end(), kind) != config.modes.end()) {
        config_error(s->qualified("modes") + ": '" + m + "' listed twice");
      }
      config.modes.push_back(kind);
    }
    if (config.modes.empty()) config_error(s->qualified("modes") + ": at least one mode is required");
    config.stratify = s->get("stratify").value_or("");
    config.min_count = require_count(s->get_int("min_count", 1), s->qualified("min_count"), 1);
    config.max_retries = require_count(s->get_int("max_retries", 10), s->qualified("max_retries"), 1);
    config.master_seed = static_cast<std::uint64_t>(s->get_int("seed", 1));
    config.forbidden = s->get_all("forbid");
    const bool stratified = std::any_of(config.modes.begin(), config.modes.end(),
                                        [](StratificationKind k) { return k != StratificationKind::unstratified; });
    if (stratified && config.stratify.empty()) {
      config_error(s->qualified("stratify") + " is required for proportional or min_criterion modes");
    }
  }
  if (const ConfigSection* s = file.section("tree")) parse_tree_section(*s, grid.tree);
  if (const ConfigSection* s = file.section("thresholds")) {
    s->require_known_keys({"values", "cell"});
    grid.thresholds = s->get_double_list("values", grid.thresholds);
    if (grid.thresholds.empty()) config_error(s->qualified("values") + ": at least one threshold is required");
    for (double t : grid.thresholds) require_fraction(t, s->qualified("values"));
    if (s->has("cell")) {
      const auto cell = s->get_double_list("cell", {});
      if (cell.size() != 2) config_error(s->qualified("cell") + ": expected 'psmall, plarge'");
      config.threshold_cell = std::make_pair(cell[0], cell[1]);
    }
  }
  if (const ConfigSection* s = file.section("importance")) {
    s->require_known_keys({"enabled", "repeats"});
    config.importance = s->get_bool("enabled", true);
    config.permutation_repeats = require_count(s->get_int("repeats", 1), s->qualified("repeats"), 1);
  }
  if (const ConfigSection* s = file.section("output")) {
    s->require_known_keys({"dir"});
    config.output_dir = s->get("dir").value_or(config.output_dir);
  }
  grid.master_seed = config.master_seed;
  return config;
}

Dataset load_run_data(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic);
  return load_dataset(*config.data_path, *config.schema);
}

RunReport execute_run(const RunConfig& config, const Dataset& data, int threads) {
  RunReport report;
  report.thresholds = config.grid.thresholds;

  std::vector<ForbiddenPattern> patterns;
  for (const auto& text : config.forbidden) patterns.push_back(parse_forbidden_pattern(text, data.schema()));

  std::size_t stratify = 0;
  if (!config.stratify.empty()) {
    try {
      stratify = data.predictor_index(config.stratify);
    } catch (const Error&) {
      config_error("grid.stratify: no predictor named '" + config.stratify + "'");
    }
    if (data.predictor(stratify).kind != PredictorKind::categorical) {
      config_error("grid.stratify: predictor '" + config.stratify + "' must be categorical");
    }
  }

  for (const auto kind : config.modes) {
    ModeRun run;
    run.name = mode_name(kind);
    run.grid = config.grid;
    run.grid.interpretability = patterns;
    switch (kind) {
      case StratificationKind::unstratified: run.grid.mode = SamplingMode::unstratified(); break;
      case StratificationKind::proportional: run.grid.mode = SamplingMode::proportional(stratify); break;
      case StratificationKind::min_criterion:
        run.grid.mode = SamplingMode::min_criterion(stratify, config.min_count, config.max_retries);
        break;
    }
    run.results = run_grid(data, run.grid, threads);
    if (config.importance) {
      const PooledTrees pooled = pool_best_trees(run.results, run.grid.k_best);
      if (pooled.trees.empty()) {
        run.importance = empty_importance(data, pooled.missing);
      } else {
        ImportanceOptions options;
        options.permutation_repeats = config.permutation_repeats;
        options.threads = threads;
        run.importance = ensemble_importance(pooled.trees, data, config.master_seed, pooled.missing, options);
      }
    }
    report.runs.push_back(std::move(run));
  }

  // Threshold sweep cell: configured, else the best feasible cell of the first mode.
  const auto& primary = report.runs.front().results;
  std::optional<std::size_t> cell_index;
  if (config.threshold_cell) {
    for (const auto& r : primary) {
      if (r.cell.psmall == config.threshold_cell->first && r.cell.plarge == config.threshold_cell->second) {
        cell_index = r.cell.index;
      }
    }
    if (!cell_index) config_error("thresholds.cell: (psmall, plarge) is not a grid cell");
  } else {
    for (const auto& r : primary) {
      if (r.status != CellStatus::feasible) continue;
      if (!cell_index || r.best_tree.balanced > primary[*cell_index].best_tree.balanced) cell_index = r.cell.index;
    }
  }
  for (const auto& run : report.runs) {
    const std::size_t c = cell_index.value_or(0);
    const CellResult& r = run.results[c];
    const std::string psmall = format_fraction(r.cell.psmall);
    const std::string plarge = format_fraction(r.cell.plarge);
    const bool feasible = r.status == CellStatus::feasible;
    report.threshold_rows.push_back({run.name + "_best", psmall, plarge, r.best_tree_by_threshold, feasible});
    report.threshold_rows.push_back({run.name + "_ensemble", psmall, plarge, r.ensemble_by_threshold, feasible});
  }
  const Tree full = fit_ctree_full(data, config.grid.tree, config.master_seed);
  report.threshold_rows.push_back({"all_observations", "all", "all", threshold_sweep(full, data, config.grid.thresholds), true});
  return report;
}

void write_run_report(const RunReport& report, const std::string& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + output_dir + "': " + ec.message());
  const auto open = [&](const std::string& name) {
    const auto path = (std::filesystem::path(output_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
    return out;
  };
  {
    auto out = open("grid_best.tsv");
    write_grid_table(out, report.runs, GridTable::best_tree);
  }
  {
    auto out = open("grid_ensemble.tsv");
    write_grid_table(out, report.runs, GridTable::ensemble);
  }
  {
    auto out = open("thresholds.tsv");
    write_threshold_table(out, report.thresholds, report.threshold_rows);
  }
  {
    auto out = open("importance.tsv");
    write_importance_table(out, report.runs);
  }
}

namespace {

int parse_threads(const std::string& text) {
  if (text.empty() || text == "auto") return 0;
  const auto n = parse_int(text, "--threads");
  if (n < 1) config_error("--threads: must be a positive integer or 'auto'");
  return static_cast<int>(n);
}

int cmd_run(const std::string& config_path, std::optional<std::int64_t> seed, const std::string& out_dir,
            const std::string& threads_text) {
  RunConfig config = parse_run_config(ConfigFile::load(config_path));
  if (seed) {
    config.master_seed = static_cast<std::uint64_t>(*seed);
    config.grid.master_seed = config.master_seed;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  const int threads = parse_threads(threads_text);
  const Dataset data = load_run_data(config);
  const RunReport report = execute_run(config, data, threads);
  write_run_report(report, config.output_dir);
  std::cerr << "reprindt: wrote reports for " << report.runs.size() << " mode(s) to " << config.output_dir << '\n';
  return kExitOk;
}

int cmd_synth(const std::string& config_path, std::optional<std::int64_t> seed, const std::string& out_path) {
  const ConfigFile file = ConfigFile::load(config_path);
  file.require_known_sections({"synthetic"});
  const ConfigSection* section = file.section("synthetic");
  if (section == nullptr) config_error("a [synthetic] section is required");
  SyntheticSpec spec = parse_synthetic_section(*section);
  if (seed) spec.seed = static_cast<std::uint64_t>(*seed);
  std::string path = out_path.empty() ? section->get("output").value_or("") : out_path;
  if (path.empty()) config_error(section->qualified("output") + " or --out is required");
  const Dataset data = generate_synthetic(spec);
  write_dataset(data, path);
  // Schema lines for the [data] section of a run config.
  std::cout << "[data]\npath = " << path << "\nclass = " << data.class_name() << '\n';
  for (const auto& p : data.schema()) {
    if (p.kind == PredictorKind::numeric) {
      std::cout << "numeric = " << p.name << '\n';
    } else {
      std::cout << "categorical = " << p.name << ':';
      for (std::size_t l = 0; l < p.levels.size(); ++l) std::cout << (l ? "|" : "") << p.levels[l];
      std::cout << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Repeated undersampling with conditional inference trees for imbalanced classes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string out;
  std::string threads = "auto";

  CLI::App* run = app.add_subcommand("run", "Run the undersampling grid and write TSV reports");
  run->add_option("--config", config_path, "Run configuration file")->required();
  run->add_option("--seed", seed, "Master seed (overrides [grid] seed)");
  run->add_option("--out", out, "Output directory (overrides [output] dir)");
  run->add_option("--threads", threads, "Worker threads: a positive integer or 'auto'");

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic imbalanced dataset");
  synth->add_option("--config", config_path, "Configuration with a [synthetic] section")->required();
  synth->add_option("--seed", seed, "Generator seed (overrides [synthetic] seed)");
  synth->add_option("--out", out, "Output data file (overrides [synthetic] output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out, threads);
    return cmd_synth(config_path, seed, out);
  } catch (const Error& e) {
    std::cerr << "reprindt: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "reprindt: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace reprindt
