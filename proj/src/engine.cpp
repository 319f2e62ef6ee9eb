#include "reprindt/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

#include "reprindt/config.hpp"
#include "reprindt/error.hpp"

namespace reprindt {

namespace {

// Value region of one predictor along a root-to-leaf path.
struct Region {
  std::vector<std::uint8_t> levels;  // categorical: allowed levels
  double lower = -std::numeric_limits<double>::infinity();  // exclusive
  double upper = std::numeric_limits<double>::infinity();   // inclusive
};

bool level_subset(const std::vector<std::uint8_t>& region, const std::vector<std::uint8_t>& condition) {
  for (std::size_t l = 0; l < region.size(); ++l) {
    if (region[l] && !condition[l]) return false;
  }
  return true;
}

bool interval_subset(const Region& region, const NumericRange& range, const Condition& condition) {
  // Effective region: path interval (lower, upper] clipped to [min, max].
  double lo = range.min;
  bool lo_inclusive = true;
  if (region.lower >= range.min) {
    lo = region.lower;
    lo_inclusive = false;
  }
  const double hi = std::min(region.upper, range.max);
  if (lo > hi || (lo == hi && !lo_inclusive)) return true;  // unreachable region
  const bool lower_ok = lo > condition.lower ||
                        (lo == condition.lower && (condition.lower_inclusive || !lo_inclusive));
  const bool upper_ok = hi < condition.upper || (hi == condition.upper && condition.upper_inclusive);
  return lower_ok && upper_ok;
}

bool path_implies(const std::vector<Region>& regions, const Tree& tree, const ForbiddenPattern& pattern) {
  for (const auto& condition : pattern.conditions) {
    const auto& spec = tree.schema()[condition.predictor];
    const Region& region = regions[condition.predictor];
    const bool implied = spec.kind == PredictorKind::categorical
                             ? level_subset(region.levels, condition.levels)
                             : interval_subset(region, tree.domain()[condition.predictor], condition);
    if (!implied) return false;
  }
  return !pattern.conditions.empty();
}

bool subtree_interpretable(const Tree& tree, std::size_t index, std::vector<Region>& regions,
                           std::span<const ForbiddenPattern> patterns) {
  const Node& node = tree.nodes()[index];
  if (node.is_leaf()) {
    return std::none_of(patterns.begin(), patterns.end(),
                        [&](const ForbiddenPattern& p) { return path_implies(regions, tree, p); });
  }
  const Split& split = *node.split;
  const Region saved = regions[split.predictor];
  Region& region = regions[split.predictor];
  if (split.kind == PredictorKind::numeric) {
    region.upper = std::min(saved.upper, split.cutpoint);
  } else {
    for (std::size_t l = 0; l < region.levels.size(); ++l) region.levels[l] = saved.levels[l] && split.left_levels[l];
  }
  if (!subtree_interpretable(tree, node.left, regions, patterns)) {
    regions[split.predictor] = saved;
    return false;
  }
  regions[split.predictor] = saved;
  if (split.kind == PredictorKind::numeric) {
    regions[split.predictor].lower = std::max(saved.lower, split.cutpoint);
  } else {
    for (std::size_t l = 0; l < saved.levels.size(); ++l) {
      regions[split.predictor].levels[l] = saved.levels[l] && !split.left_levels[l];
    }
  }
  const bool ok = subtree_interpretable(tree, node.right, regions, patterns);
  regions[split.predictor] = saved;
  return ok;
}

Condition parse_condition(const std::string& text, const Schema& schema, const std::string& pattern) {
  const auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::config, "forbidden pattern '" + pattern + "': " + why);
  };
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] != ' ' && text[pos] != '<' && text[pos] != '>' && text[pos] != '=') ++pos;
  const std::string name = text.substr(0, pos);
  const auto it = std::find_if(schema.begin(), schema.end(), [&](const PredictorSpec& s) { return s.name == name; });
  if (name.empty() || it == schema.end()) throw fail("unknown predictor '" + name + "'");
  const auto& spec = *it;
  Condition condition;
  condition.predictor = static_cast<std::size_t>(it - schema.begin());
  const std::string rest = trim(text.substr(pos));

  if (spec.kind == PredictorKind::categorical) {
    condition.levels.assign(spec.levels.size(), 0);
    std::vector<std::string> names;
    if (rest.rfind("in", 0) == 0) {
      const std::string set = trim(rest.substr(2));
      if (set.size() < 2 || set.front() != '{' || set.back() != '}') throw fail("expected {level|level}");
      names = split(set.substr(1, set.size() - 2), '|');
    } else if (!rest.empty() && rest[0] == '=') {
      names = {trim(rest.substr(rest.size() > 1 && rest[1] == '=' ? 2 : 1))};
    } else {
      throw fail("categorical condition must be 'in {...}' or '= level'");
    }
    for (const auto& level : names) {
      const auto lt = std::find(spec.levels.begin(), spec.levels.end(), level);
      if (lt == spec.levels.end()) throw fail("'" + level + "' is not a level of '" + name + "'");
      condition.levels[static_cast<std::size_t>(lt - spec.levels.begin())] = 1;
    }
    return condition;
  }

  const std::string what = "forbidden pattern '" + pattern + "'";
  if (rest.rfind("in", 0) == 0) {
    const std::string interval = trim(rest.substr(2));
    if (interval.size() < 5 || (interval.front() != '[' && interval.front() != '(') ||
        (interval.back() != ']' && interval.back() != ')')) {
      throw fail("expected an interval such as [0,3]");
    }
    const auto bounds = split(interval.substr(1, interval.size() - 2), ',');
    if (bounds.size() != 2) throw fail("expected two interval bounds");
    condition.lower = parse_double(bounds[0], what);
    condition.upper = parse_double(bounds[1], what);
    condition.lower_inclusive = interval.front() == '[';
    condition.upper_inclusive = interval.back() == ']';
    if (condition.lower > condition.upper) throw fail("empty interval");
    return condition;
  }
  if (rest.rfind(">=", 0) == 0) {
    condition.lower = parse_double(rest.substr(2), what);
    condition.lower_inclusive = true;
  } else if (rest.rfind('>', 0) == 0) {
    condition.lower = parse_double(rest.substr(1), what);
  } else if (rest.rfind("<=", 0) == 0) {
    condition.upper = parse_double(rest.substr(2), what);
    condition.upper_inclusive = true;
  } else if (rest.rfind('<', 0) == 0) {
    condition.upper = parse_double(rest.substr(1), what);
  } else {
    throw fail("numeric condition must be 'in [a,b]' or a comparison");
  }
  return condition;
}

std::vector<Label> labels_at(std::span<const double> freq_small, double threshold) {
  std::vector<Label> out(freq_small.size());
  for (std::size_t i = 0; i < freq_small.size(); ++i) out[i] = label_for(freq_small[i], threshold);
  return out;
}

std::vector<AccuracyTriple> sweep(std::span<const double> freq_small, const Dataset& data,
                                  std::span<const double> thresholds) {
  std::vector<AccuracyTriple> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    validate_threshold(t);
    const auto predictions = labels_at(freq_small, t);
    out.push_back(balanced_accuracy(predictions, data.classes()));
  }
  return out;
}

}  // namespace

AccuracyTriple balanced_accuracy(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size()) {
    throw Error(ErrorCode::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                                std::to_string(truth.size()) + " observations");
  }
  std::size_t n[2] = {0, 0};
  std::size_t correct[2] = {0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto c = static_cast<std::size_t>(truth[i]);
    ++n[c];
    if (predictions[i] == truth[i]) ++correct[c];
  }
  if (n[0] == 0 || n[1] == 0) throw Error(ErrorCode::missing_class, "truth must contain both classes");
  AccuracyTriple triple;
  triple.acc_small = static_cast<double>(correct[0]) / static_cast<double>(n[0]);
  triple.acc_large = static_cast<double>(correct[1]) / static_cast<double>(n[1]);
  triple.balanced = (triple.acc_small + triple.acc_large) / 2.0;
  return triple;
}

ForbiddenPattern parse_forbidden_pattern(const std::string& text, const Schema& schema) {
  ForbiddenPattern pattern;
  for (const auto& part : split(text, '&')) {
    if (part.empty()) throw Error(ErrorCode::config, "forbidden pattern '" + text + "': empty condition");
    pattern.conditions.push_back(parse_condition(part, schema, text));
  }
  return pattern;
}

bool is_interpretable(const Tree& tree, std::span<const ForbiddenPattern> patterns) {
  if (patterns.empty()) return true;
  std::vector<Region> regions(tree.schema().size());
  for (std::size_t p = 0; p < regions.size(); ++p) {
    if (tree.schema()[p].kind == PredictorKind::categorical) {
      regions[p].levels.assign(tree.schema()[p].levels.size(), 1);
    }
  }
  return subtree_interpretable(tree, 0, regions, patterns);
}

double ensemble_small_frequency(const EnsembleModel& model, std::span<const double> row) {
  if (model.members.empty()) throw Error(ErrorCode::invalid_parameter, "ensemble has no members");
  double sum = 0.0;
  for (const auto& tree : model.members) sum += leaf_frequencies(tree, row).small;
  return sum / static_cast<double>(model.members.size());
}

Label ensemble_predict(const EnsembleModel& model, std::span<const double> row) {
  validate_threshold(model.threshold);
  return label_for(ensemble_small_frequency(model, row), model.threshold);
}

std::vector<double> small_frequencies(const EnsembleModel& model, const ColumnView& columns) {
  if (model.members.empty()) throw Error(ErrorCode::invalid_parameter, "ensemble has no members");
  std::vector<double> sum(columns.rows(), 0.0);
  for (const auto& tree : model.members) {
    for (std::size_t i = 0; i < columns.rows(); ++i) sum[i] += tree.nodes()[tree.leaf_index(columns, i)].freq_small();
  }
  const auto k = static_cast<double>(model.members.size());
  for (double& s : sum) s /= k;
  return sum;
}

std::vector<AccuracyTriple> threshold_sweep(const Tree& tree, const Dataset& data,
                                            std::span<const double> thresholds) {
  return sweep(small_frequencies(tree, data.columns()), data, thresholds);
}

std::vector<AccuracyTriple> threshold_sweep(const EnsembleModel& model, const Dataset& data,
                                            std::span<const double> thresholds) {
  return sweep(small_frequencies(model, data.columns()), data, thresholds);
}

AccuracyTriple evaluate(const Tree& tree, const Dataset& data, double threshold) {
  return balanced_accuracy(predict_all(tree, data.columns(), threshold), data.classes());
}

AccuracyTriple evaluate(const EnsembleModel& model, const Dataset& data) {
  const double t = model.threshold;
  return threshold_sweep(model, data, std::span<const double>(&t, 1)).front();
}

void validate_grid(const GridSpec& grid, const Dataset& data) {
  if (grid.psmall_values.empty() || grid.plarge_values.empty()) {
    throw Error(ErrorCode::invalid_parameter, "psmall and plarge lists must be nonempty");
  }
  if (grid.k_best < 1) throw Error(ErrorCode::invalid_parameter, "k_best must be at least 1");
  if (grid.repetitions < grid.k_best) throw Error(ErrorCode::invalid_parameter, "repetitions must be at least k_best");
  if (grid.thresholds.empty()) throw Error(ErrorCode::invalid_parameter, "threshold list must be nonempty");
  for (double t : grid.thresholds) validate_threshold(t);
  validate_settings(grid.tree);
  for (const auto& cell : grid_cells(grid)) validate_plan(plan_for(cell, grid), data);
  for (const auto& pattern : grid.interpretability) {
    for (const auto& c : pattern.conditions) {
      if (c.predictor >= data.predictors()) {
        throw Error(ErrorCode::invalid_parameter, "forbidden pattern references an unknown predictor");
      }
    }
  }
}

std::vector<GridCell> grid_cells(const GridSpec& grid) {
  std::vector<GridCell> cells;
  for (double psmall : grid.psmall_values) {
    for (double plarge : grid.plarge_values) cells.push_back({cells.size(), psmall, plarge});
  }
  return cells;
}

SamplingPlan plan_for(const GridCell& cell, const GridSpec& grid) {
  return {cell.psmall, cell.plarge, grid.mode, grid.master_seed, cell.index};
}

const char* to_string(CellStatus status) noexcept {
  switch (status) {
    case CellStatus::feasible: return "feasible";
    case CellStatus::infeasible: return "infeasible";
    case CellStatus::no_interpretable_tree: return "no_interpretable_tree";
  }
  return "unknown";
}

EnsembleModel CellResult::ensemble_model(double threshold) const {
  EnsembleModel model;
  model.threshold = threshold;
  for (const auto& scored : best) model.members.push_back(scored.tree);
  return model;
}

RepetitionOutcome run_repetition(const Dataset& data, const GridCell& cell, const GridSpec& grid,
                                 std::size_t repetition) {
  RepetitionOutcome outcome;
  outcome.repetition = repetition;
  const TrainingSet training = draw_training_set(data, plan_for(cell, grid), repetition);
  if (!training.feasible()) return outcome;
  outcome.feasible = true;
  Tree tree = fit_ctree(data, training, grid.tree);
  if (!is_interpretable(tree, grid.interpretability)) return outcome;
  outcome.interpretable = true;
  outcome.accuracy = evaluate(tree, data, 0.5);
  outcome.tree = std::move(tree);
  return outcome;
}

CellResult assemble_cell(const Dataset& data, const GridCell& cell, const GridSpec& grid,
                         std::vector<RepetitionOutcome> outcomes) {
  CellResult result;
  result.cell = cell;
  result.plan = plan_for(cell, grid);
  std::vector<RepetitionOutcome*> retained;
  for (auto& o : outcomes) {
    if (o.feasible) ++result.feasible_repetitions;
    if (o.interpretable && o.tree) retained.push_back(&o);
  }
  result.interpretable_repetitions = retained.size();
  result.best_tree_by_threshold.assign(grid.thresholds.size(), AccuracyTriple{});
  result.ensemble_by_threshold.assign(grid.thresholds.size(), AccuracyTriple{});
  if (result.feasible_repetitions == 0) {
    result.status = CellStatus::infeasible;
    return result;
  }
  if (retained.empty()) {
    result.status = CellStatus::no_interpretable_tree;
    return result;
  }
  result.status = CellStatus::feasible;
  std::stable_sort(retained.begin(), retained.end(), [](const RepetitionOutcome* a, const RepetitionOutcome* b) {
    if (a->accuracy.balanced != b->accuracy.balanced) return a->accuracy.balanced > b->accuracy.balanced;
    return a->repetition < b->repetition;
  });
  const std::size_t keep = std::min(grid.k_best, retained.size());
  for (std::size_t i = 0; i < keep; ++i) {
    result.best.push_back({std::move(*retained[i]->tree), retained[i]->accuracy, retained[i]->repetition});
  }
  result.best_tree = result.best.front().accuracy;
  const EnsembleModel model = result.ensemble_model(0.5);
  result.ensemble = evaluate(model, data);
  result.best_tree_by_threshold = threshold_sweep(result.best.front().tree, data, grid.thresholds);
  result.ensemble_by_threshold = threshold_sweep(model, data, grid.thresholds);
  return result;
}

CellResult run_cell(const Dataset& data, const GridCell& cell, const GridSpec& grid) {
  std::vector<RepetitionOutcome> outcomes;
  outcomes.reserve(grid.repetitions);
  for (std::size_t rep = 0; rep < grid.repetitions; ++rep) outcomes.push_back(run_repetition(data, cell, grid, rep));
  return assemble_cell(data, cell, grid, std::move(outcomes));
}

std::vector<CellResult> run_grid_serial(const Dataset& data, const GridSpec& grid) {
  validate_grid(grid, data);
  std::vector<CellResult> results;
  for (const auto& cell : grid_cells(grid)) results.push_back(run_cell(data, cell, grid));
  return results;
}

std::vector<CellResult> run_grid(const Dataset& data, const GridSpec& grid, int threads) {
  validate_grid(grid, data);
  const auto cells = grid_cells(grid);
  const std::size_t reps = grid.repetitions;
  const auto tasks = static_cast<long>(cells.size() * reps);
  const int team = threads > 0 ? threads : omp_get_max_threads();

  std::vector<RepetitionOutcome> outcomes(static_cast<std::size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (long t = 0; t < tasks; ++t) {
    const auto task = static_cast<std::size_t>(t);
    try {
      outcomes[task] = run_repetition(data, cells[task / reps], grid, task % reps);
    } catch (...) {
      errors[task] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<CellResult> results(cells.size());
  std::vector<std::exception_ptr> cell_errors(cells.size());
  const auto n_cells = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (long c = 0; c < n_cells; ++c) {
    const auto cell = static_cast<std::size_t>(c);
    try {
      std::vector<RepetitionOutcome> mine(std::make_move_iterator(outcomes.begin() + static_cast<long>(cell * reps)),
                                          std::make_move_iterator(outcomes.begin() + static_cast<long>((cell + 1) * reps)));
      results[cell] = assemble_cell(data, cells[cell], grid, std::move(mine));
    } catch (...) {
      cell_errors[cell] = std::current_exception();
    }
  }
  for (const auto& e : cell_errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

PooledTrees pool_best_trees(std::span<const CellResult> results, std::size_t k_best) {
  PooledTrees pooled;
  for (const auto& result : results) {
    if (result.status != CellStatus::feasible) continue;
    for (std::size_t i = 0; i < result.best.size() && i < k_best; ++i) pooled.trees.push_back(&result.best[i].tree);
  }
  pooled.missing = results.size() * k_best - pooled.trees.size();
  return pooled;
}

}  // namespace reprindt
