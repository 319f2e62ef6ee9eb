#include <doctest.h>

#include "oracles.hpp"
#include "reprindt/engine.hpp"
#include "reprindt/report.hpp"
#include "support.hpp"

using namespace reprindt;

namespace {

std::shared_ptr<const Schema> age_mlu_schema() {
  return std::make_shared<const Schema>(
      Schema{test::numeric("AGE"), test::numeric("MLU"), test::categorical("SEX", {"f", "m"})});
}

Node leaf(std::size_t n, std::size_t n_small) {
  Node node;
  node.n = n;
  node.n_small = n_small;
  return node;
}

Node numeric_split(std::size_t predictor, double cut, std::size_t left, std::size_t right) {
  Node node;
  node.split = Split{predictor, PredictorKind::numeric, cut, {}};
  node.left = left;
  node.right = right;
  node.n = 20;
  return node;
}

// AGE <= 3 -> (MLU <= mlu_cut -> leaf | leaf), AGE > 3 -> leaf.
Tree age_mlu_tree(double mlu_cut) {
  std::vector<Node> nodes{numeric_split(0, 3.0, 1, 2), numeric_split(1, mlu_cut, 3, 4), leaf(10, 2), leaf(5, 1),
                          leaf(5, 4)};
  return Tree(age_mlu_schema(), nodes, {}, {}, {{0.0, 10.0}, {0.0, 10.0}, {0.0, 0.0}});
}

Tree single_leaf(std::size_t n, std::size_t n_small) {
  return Tree(age_mlu_schema(), {leaf(n, n_small)}, {}, {}, {{0.0, 10.0}, {0.0, 10.0}, {0.0, 0.0}});
}

Dataset graded_dataset(std::uint64_t seed, double effect = 0.8) {
  SyntheticSpec spec;
  spec.n = 500;
  spec.imbalance = 0.15;
  spec.signal = {{test::categorical("g", {"a", "b", "c"}), effect, {}}, {test::numeric("x"), 1.0, {}}};
  spec.noise_predictors = 1;
  spec.seed = seed;
  return generate_synthetic(spec);
}

GridSpec small_grid() {
  GridSpec grid;
  grid.psmall_values = {0.8, 1.0};
  grid.plarge_values = {0.15, 0.2};
  grid.repetitions = 6;
  grid.k_best = 3;
  grid.thresholds = {0.5, 0.4, 0.3};
  grid.master_seed = 21;
  grid.tree.permutations = 199;
  return grid;
}

}  // namespace

TEST_CASE("balanced accuracy examples") {
  const auto truth = test::labels("ssssllllll");
  const auto pred = test::labels("ssslllllss");
  const auto t = balanced_accuracy(pred, truth);
  CHECK(t.acc_small == 0.75);
  CHECK(t.acc_large == doctest::Approx(4.0 / 6.0));
  CHECK(format_accuracy(t.acc_large) == "0.6667");
  CHECK(format_accuracy(t.balanced) == "0.7083");
  const auto all_large = balanced_accuracy(test::labels("llllllllll"), truth);
  CHECK(all_large == AccuracyTriple{0.0, 1.0, 0.5});
  CHECK(test::error_of([&] { balanced_accuracy(test::labels("sl"), truth); }) == ErrorCode::length_mismatch);
  CHECK(test::error_of([&] { balanced_accuracy(test::labels("sl"), test::labels("ll")); }) ==
        ErrorCode::missing_class);
}

TEST_CASE("forbidden patterns: parsing") {
  const Schema schema = *age_mlu_schema();
  const auto p = parse_forbidden_pattern("AGE in [0,3] & MLU > 5", schema);
  REQUIRE(p.conditions.size() == 2);
  CHECK(p.conditions[0].lower == 0.0);
  CHECK(p.conditions[0].upper == 3.0);
  CHECK(p.conditions[0].lower_inclusive);
  CHECK(p.conditions[0].upper_inclusive);
  CHECK(p.conditions[1].lower == 5.0);
  CHECK_FALSE(p.conditions[1].lower_inclusive);
  const auto s = parse_forbidden_pattern("SEX in {m}", schema);
  CHECK(s.conditions[0].levels == std::vector<std::uint8_t>{0, 1});
  CHECK(parse_forbidden_pattern("SEX = m", schema) == s);
  CHECK(test::error_of([&] { parse_forbidden_pattern("EYE in {m}", schema); }) == ErrorCode::config);
  CHECK(test::error_of([&] { parse_forbidden_pattern("SEX in {x}", schema); }) == ErrorCode::config);
  CHECK(test::error_of([&] { parse_forbidden_pattern("AGE in [3,0]", schema); }) == ErrorCode::config);
  CHECK(test::error_of([&] { parse_forbidden_pattern("AGE ~ 3", schema); }) == ErrorCode::config);
}

TEST_CASE("forbidden patterns: tree paths") {
  const Schema schema = *age_mlu_schema();
  const std::vector<ForbiddenPattern> patterns{parse_forbidden_pattern("AGE in [0,3] & MLU > 5", schema)};
  CHECK(is_interpretable(age_mlu_tree(5.0), {}));
  CHECK_FALSE(is_interpretable(age_mlu_tree(5.0), patterns));
  CHECK_FALSE(is_interpretable(age_mlu_tree(6.0), patterns));
  // MLU > 4 on the path does not imply MLU > 5.
  CHECK(is_interpretable(age_mlu_tree(4.0), patterns));
  const std::vector<ForbiddenPattern> unused{parse_forbidden_pattern("SEX = m", schema)};
  CHECK(is_interpretable(age_mlu_tree(5.0), unused));
}

TEST_CASE("ensemble averaging of leaf frequencies") {
  EnsembleModel model;
  model.members = {single_leaf(10, 6), single_leaf(10, 2), single_leaf(10, 1)};
  const std::vector<double> row{1.0, 1.0, 0.0};
  CHECK(ensemble_small_frequency(model, row) == doctest::Approx(0.3));
  model.threshold = 0.5;
  CHECK(ensemble_predict(model, row) == Label::large);
  model.threshold = 0.3;
  CHECK(ensemble_predict(model, row) == Label::small);

  EnsembleModel one{{age_mlu_tree(5.0)}, 0.25};
  EnsembleModel same{{age_mlu_tree(5.0), age_mlu_tree(5.0), age_mlu_tree(5.0)}, 0.25};
  for (double age : {1.0, 5.0}) {
    for (double mlu : {2.0, 7.0}) {
      const std::vector<double> r{age, mlu, 1.0};
      CHECK(ensemble_predict(one, r) == predict(one.members[0], r, 0.25));
      CHECK(ensemble_predict(same, r) == predict(one.members[0], r, 0.25));
    }
  }
  CHECK(test::error_of([&] { ensemble_small_frequency(EnsembleModel{}, row); }) == ErrorCode::invalid_parameter);
}

TEST_CASE("grid cells are psmall-major") {
  GridSpec grid;
  const auto cells = grid_cells(grid);
  REQUIRE(cells.size() == 16);
  CHECK(cells[0].psmall == 0.85);
  CHECK(cells[0].plarge == 0.07);
  CHECK(cells[1].plarge == 0.08);
  CHECK(cells[4].psmall == 0.90);
  CHECK(cells[15].index == 15);
}

TEST_CASE("single repetition: ensemble equals best tree") {
  const auto data = graded_dataset(4);
  auto grid = small_grid();
  grid.repetitions = 1;
  grid.k_best = 1;
  const auto result = run_cell(data, grid_cells(grid)[3], grid);
  REQUIRE(result.status == CellStatus::feasible);
  CHECK(result.best.size() == 1);
  CHECK(result.ensemble == result.best_tree);
  CHECK(result.ensemble_by_threshold == result.best_tree_by_threshold);
}

TEST_CASE("cell selection keeps the k best trees in order") {
  const auto data = graded_dataset(5);
  const auto grid = small_grid();
  const auto cell = grid_cells(grid)[1];
  std::vector<RepetitionOutcome> outcomes;
  for (std::size_t rep = 0; rep < grid.repetitions; ++rep) outcomes.push_back(run_repetition(data, cell, grid, rep));
  const auto result = assemble_cell(data, cell, grid, outcomes);
  REQUIRE(result.best.size() == 3);
  for (const auto& o : outcomes) {
    REQUIRE(o.tree);
    CHECK(result.best_tree.balanced >= o.accuracy.balanced);
    CHECK(o.accuracy == evaluate(*o.tree, data));
  }
  for (std::size_t i = 1; i < result.best.size(); ++i) {
    const auto& a = result.best[i - 1];
    const auto& b = result.best[i];
    CHECK((a.accuracy.balanced > b.accuracy.balanced ||
           (a.accuracy.balanced == b.accuracy.balanced && a.repetition < b.repetition)));
  }
  CHECK(result.best_tree == result.best[0].accuracy);
  CHECK(result.ensemble == evaluate(result.ensemble_model(), data));
  CHECK(result.best_tree.balanced == (result.best_tree.acc_small + result.best_tree.acc_large) / 2.0);
}

TEST_CASE("threshold sweep is monotone in both class accuracies") {
  const auto data = graded_dataset(6, 0.4);
  const auto grid = small_grid();
  const auto result = run_cell(data, grid_cells(grid)[0], grid);
  const std::vector<double> thresholds{0.9, 0.7, 0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.1, 0.05};
  for (const auto& model : {result.ensemble_model(), EnsembleModel{{result.best[0].tree}, 0.5}}) {
    const auto sweep = threshold_sweep(model, data, thresholds);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      CHECK(sweep[i].acc_small >= sweep[i - 1].acc_small);
      CHECK(sweep[i].acc_large <= sweep[i - 1].acc_large);
    }
  }
}

TEST_CASE("interpretability filter removes every tree that uses a forbidden region") {
  const auto data = graded_dataset(7);
  auto grid = small_grid();
  // Any split on g isolates some level subset; forbid all of them.
  grid.interpretability = {parse_forbidden_pattern("g in {a|b|c}", data.schema())};
  const auto results = run_grid_serial(data, grid);
  for (const auto& r : results) {
    for (const auto& t : r.best) CHECK(is_interpretable(t.tree, grid.interpretability));
    if (r.status == CellStatus::no_interpretable_tree) {
      CHECK(r.best.empty());
      CHECK(r.best_tree == AccuracyTriple{});
    }
  }
}

TEST_CASE("infeasible cells report zeros") {
  const auto data = graded_dataset(8);
  auto grid = small_grid();
  grid.mode = SamplingMode::min_criterion(0, 10000, 3);
  const auto results = run_grid_serial(data, grid);
  for (const auto& r : results) {
    CHECK(r.status == CellStatus::infeasible);
    CHECK(r.feasible_repetitions == 0);
    CHECK(r.best_tree == AccuracyTriple{});
    CHECK(r.ensemble == AccuracyTriple{});
    CHECK(r.best_tree_by_threshold == std::vector<AccuracyTriple>(3));
  }
  const auto pooled = pool_best_trees(results, grid.k_best);
  CHECK(pooled.trees.empty());
  CHECK(pooled.missing == 12);
}

TEST_CASE("parallel grid equals the serial reference") {
  const auto data = graded_dataset(9);
  auto grid = small_grid();
  grid.mode = SamplingMode::proportional(0);
  const auto serial = run_grid_serial(data, grid);
  for (int threads : {1, 2, 5}) {
    const auto parallel = run_grid(data, grid, threads);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t c = 0; c < serial.size(); ++c) {
      CHECK(parallel[c].status == serial[c].status);
      CHECK(parallel[c].best_tree == serial[c].best_tree);
      CHECK(parallel[c].ensemble_by_threshold == serial[c].ensemble_by_threshold);
      REQUIRE(parallel[c].best.size() == serial[c].best.size());
      for (std::size_t i = 0; i < serial[c].best.size(); ++i) {
        CHECK(parallel[c].best[i].tree == serial[c].best[i].tree);
      }
    }
  }
}

TEST_CASE("grid validation") {
  const auto data = graded_dataset(10);
  auto grid = small_grid();
  grid.repetitions = 2;
  CHECK(test::error_of([&] { validate_grid(grid, data); }) == ErrorCode::invalid_parameter);
  grid = small_grid();
  grid.plarge_values = {};
  CHECK(test::error_of([&] { validate_grid(grid, data); }) == ErrorCode::invalid_parameter);
  grid = small_grid();
  grid.thresholds = {0.0};
  CHECK(test::error_of([&] { validate_grid(grid, data); }) == ErrorCode::invalid_parameter);
}
