#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reprindt/ctree.hpp"
#include "reprindt/data.hpp"
#include "reprindt/sampling.hpp"

namespace reprindt {

struct AccuracyTriple {
  double acc_small = 0.0;
  double acc_large = 0.0;
  double balanced = 0.0;

  bool operator==(const AccuracyTriple&) const = default;
};

// Per-class accuracies and their mean. Throws LengthMismatch or MissingClass
// (truth lacking one of the classes).
AccuracyTriple balanced_accuracy(std::span<const Label> predictions, std::span<const Label> truth);

// One conjunct of a forbidden pattern: the predictor's value lies in a level
// set (categorical) or an interval (numeric).
struct Condition {
  std::size_t predictor = 0;
  std::vector<std::uint8_t> levels;  // categorical: 1 marks a level in the set
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool lower_inclusive = false;
  bool upper_inclusive = false;

  bool operator==(const Condition&) const = default;
};

struct ForbiddenPattern {
  std::vector<Condition> conditions;  // conjunction

  bool operator==(const ForbiddenPattern&) const = default;
};

// Parses "AGE in [0,3] & MLU > 5" or "ETH in {a|b} & SEX in {m}". Intervals
// use [ ] for closed and ( ) for open ends; comparisons <, <=, >, >= are
// accepted for numeric predictors.
ForbiddenPattern parse_forbidden_pattern(const std::string& text, const Schema& schema);

// False iff some root-to-leaf path restricts every predictor of some pattern
// to values inside that pattern's condition. Numeric paths are clipped to the
// tree's data range before the comparison.
bool is_interpretable(const Tree& tree, std::span<const ForbiddenPattern> patterns);

struct EnsembleModel {
  std::vector<Tree> members;  // descending balanced accuracy
  double threshold = 0.5;
};

// Mean small-class leaf frequency over the members.
double ensemble_small_frequency(const EnsembleModel& model, std::span<const double> row);
Label ensemble_predict(const EnsembleModel& model, std::span<const double> row);

std::vector<double> small_frequencies(const EnsembleModel& model, const ColumnView& columns);

// One triple per threshold, evaluated on every row of `data`.
std::vector<AccuracyTriple> threshold_sweep(const Tree& tree, const Dataset& data, std::span<const double> thresholds);
std::vector<AccuracyTriple> threshold_sweep(const EnsembleModel& model, const Dataset& data,
                                            std::span<const double> thresholds);

AccuracyTriple evaluate(const Tree& tree, const Dataset& data, double threshold = 0.5);
AccuracyTriple evaluate(const EnsembleModel& model, const Dataset& data);

struct GridSpec {
  std::vector<double> psmall_values{0.85, 0.90, 0.95, 1.0};
  std::vector<double> plarge_values{0.07, 0.08, 0.09, 0.10};
  std::size_t repetitions = 100;
  std::size_t k_best = 3;
  SamplingMode mode;
  std::vector<double> thresholds{0.5};
  std::vector<ForbiddenPattern> interpretability;
  std::uint64_t master_seed = 1;
  CtreeSettings tree;
};

void validate_grid(const GridSpec& grid, const Dataset& data);

struct GridCell {
  std::size_t index = 0;
  double psmall = 1.0;
  double plarge = 0.1;
};

// psmall-major order: every plarge for the first psmall, then the next.
std::vector<GridCell> grid_cells(const GridSpec& grid);

SamplingPlan plan_for(const GridCell& cell, const GridSpec& grid);

enum class CellStatus : std::uint8_t { feasible, infeasible, no_interpretable_tree };

const char* to_string(CellStatus status) noexcept;

struct ScoredTree {
  Tree tree;
  AccuracyTriple accuracy;
  std::size_t repetition = 0;
};

struct CellResult {
  GridCell cell;
  SamplingPlan plan;
  CellStatus status = CellStatus::infeasible;
  std::size_t feasible_repetitions = 0;
  std::size_t interpretable_repetitions = 0;
  std::vector<ScoredTree> best;  // up to k_best, best first
  AccuracyTriple best_tree;      // zeros unless feasible
  AccuracyTriple ensemble;
  std::vector<AccuracyTriple> best_tree_by_threshold;  // aligned with grid.thresholds
  std::vector<AccuracyTriple> ensemble_by_threshold;

  EnsembleModel ensemble_model(double threshold = 0.5) const;
};

// Outcome of a single repetition within a cell.
struct RepetitionOutcome {
  std::size_t repetition = 0;
  bool feasible = false;
  bool interpretable = false;
  std::optional<Tree> tree;
  AccuracyTriple accuracy;
};

RepetitionOutcome run_repetition(const Dataset& data, const GridCell& cell, const GridSpec& grid,
                                 std::size_t repetition);

// Selects the k best interpretable trees (ties: lower repetition first) and
// evaluates best tree and ensemble at every requested threshold.
CellResult assemble_cell(const Dataset& data, const GridCell& cell, const GridSpec& grid,
                         std::vector<RepetitionOutcome> outcomes);

// Serial: every repetition of one cell in order.
CellResult run_cell(const Dataset& data, const GridCell& cell, const GridSpec& grid);

// Serial reference for the whole grid.
std::vector<CellResult> run_grid_serial(const Dataset& data, const GridSpec& grid);

// OpenMP over (cell, repetition) pairs; `threads` of 0 keeps the runtime
// default. Results are identical to run_grid_serial.
std::vector<CellResult> run_grid(const Dataset& data, const GridSpec& grid, int threads = 0);

// k best trees of every feasible cell, in cell order, and the number of
// missing slots (cells x k minus trees) for zero-filling.
struct PooledTrees {
  std::vector<const Tree*> trees;
  std::size_t missing = 0;
};

PooledTrees pool_best_trees(std::span<const CellResult> results, std::size_t k_best);

}  // namespace reprindt
