#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reprindt/config.hpp"
#include "reprindt/data.hpp"
#include "reprindt/engine.hpp"
#include "reprindt/error.hpp"
#include "reprindt/report.hpp"

namespace reprindt {

// Exit statuses of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

int exit_code_for(ErrorCode code) noexcept;

struct RunConfig {
  // Data source: a delimited file with its schema, or a synthetic spec.
  std::optional<std::string> data_path;
  std::optional<SchemaConfig> schema;
  std::optional<SyntheticSpec> synthetic;

  GridSpec grid;  // mode is set per run
  std::vector<StratificationKind> modes{StratificationKind::unstratified};
  std::string stratify;  // predictor name for stratified modes
  std::size_t min_count = 1;
  std::size_t max_retries = 10;
  std::vector<std::string> forbidden;  // pattern text, resolved after loading

  std::optional<std::pair<double, double>> threshold_cell;  // (psmall, plarge)

  bool importance = true;
  std::size_t permutation_repeats = 1;

  std::string output_dir = "reprindt_out";
  std::uint64_t master_seed = 1;
};

// Every section, key and value is checked here; nothing is computed.
RunConfig parse_run_config(const ConfigFile& file);

SyntheticSpec parse_synthetic_section(const ConfigSection& section);

Dataset load_run_data(const RunConfig& config);

// Output of a complete run, before it is written.
struct RunReport {
  std::vector<ModeRun> runs;
  std::vector<double> thresholds;
  std::vector<ThresholdRow> threshold_rows;
};

RunReport execute_run(const RunConfig& config, const Dataset& data, int threads);

// Writes grid_best.tsv, grid_ensemble.tsv, thresholds.tsv, importance.tsv.
void write_run_report(const RunReport& report, const std::string& output_dir);

// `reprindt run|synth ...`; returns the process exit status.
int cli_main(int argc, const char* const* argv);

}  // namespace reprindt
