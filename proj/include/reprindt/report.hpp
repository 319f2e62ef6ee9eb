#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "reprindt/engine.hpp"
#include "reprindt/importance.hpp"

namespace reprindt {

// Decimal rounding, half away from zero, of the value as printed to 12
// places; 0.69795 becomes "0.6980" at 4 digits.
std::string format_decimal(double value, int digits);

inline std::string format_accuracy(double value) { return format_decimal(value, 4); }

// Shortest text that reads back as the same double (grid fractions, thresholds).
std::string format_fraction(double value);

// Results for one sampling mode across the whole grid.
struct ModeRun {
  std::string name;  // unstratified, proportional, min_criterion
  GridSpec grid;
  std::vector<CellResult> results;
  std::optional<ImportanceReport> importance;
};

enum class GridTable { best_tree, ensemble };

// One row per grid cell (plarge, psmall, then acc_large, acc_small, balanced
// and status per mode). Infeasible cells print 0.0 in every accuracy column.
void write_grid_table(std::ostream& out, std::span<const ModeRun> runs, GridTable which);

struct ThresholdRow {
  std::string model;
  std::string psmall;
  std::string plarge;
  std::vector<AccuracyTriple> triples;  // aligned with the thresholds
  bool feasible = true;                 // false prints 0.0 throughout
};

// Balanced accuracy per threshold, one row per model.
void write_threshold_table(std::ostream& out, std::span<const double> thresholds, std::span<const ThresholdRow> rows);

// One row per (mode, predictor): mean permutation loss and normalized percent.
void write_importance_table(std::ostream& out, std::span<const ModeRun> runs);

}  // namespace reprindt
