#include <doctest.h>

#include <sstream>

#include "reprindt/report.hpp"
#include "support.hpp"

using namespace reprindt;

TEST_CASE("decimal rounding as printed in the tables") {
  CHECK(format_decimal(0.69795, 4) == "0.6980");
  CHECK(format_accuracy((0.7823 + 0.6136) / 2.0) == "0.6980");
  CHECK(format_accuracy(0.5) == "0.5000");
  CHECK(format_accuracy(1.0) == "1.0000");
  CHECK(format_accuracy(0.99995) == "1.0000");
  CHECK(format_accuracy(2.0 / 3.0) == "0.6667");
  CHECK(format_decimal(84.9872773, 2) == "84.99");
  CHECK(format_decimal(-0.00004, 4) == "0.0000");
  CHECK(format_decimal(-0.0125, 3) == "-0.013");
  CHECK(format_fraction(0.1) == "0.1");
  CHECK(format_fraction(1.0) == "1");
  CHECK(format_fraction(0.85) == "0.85");
}

TEST_CASE("grid table: one row per cell, infeasible cells print 0.0") {
  ModeRun run;
  run.name = "min_criterion";
  CellResult feasible;
  feasible.cell = {0, 0.85, 0.07};
  feasible.status = CellStatus::feasible;
  feasible.best_tree = {0.6136, 0.7823, (0.6136 + 0.7823) / 2.0};
  CellResult infeasible;
  infeasible.cell = {1, 0.85, 0.08};
  infeasible.status = CellStatus::infeasible;
  run.results = {feasible, infeasible};
  std::ostringstream out;
  write_grid_table(out, std::span<const ModeRun>(&run, 1), GridTable::best_tree);
  CHECK(out.str() ==
        "plarge\tpsmall\tmin_criterion_acc_large\tmin_criterion_acc_small\tmin_criterion_balanced\tmin_criterion_status\n"
        "0.07\t0.85\t0.7823\t0.6136\t0.6980\tfeasible\n"
        "0.08\t0.85\t0.0\t0.0\t0.0\tinfeasible\n");
}

TEST_CASE("threshold and importance tables") {
  std::ostringstream thresholds;
  const std::vector<double> ts{0.5, 0.45};
  const std::vector<ThresholdRow> rows{
      {"unstratified_best", "0.9", "0.09", {{0, 1, 0.5}, {0.5, 0.8, 0.65}}, true},
      {"min_criterion_best", "0.9", "0.09", {{}, {}}, false}};
  write_threshold_table(thresholds, ts, rows);
  CHECK(thresholds.str() ==
        "model\tpsmall\tplarge\t0.5\t0.45\n"
        "unstratified_best\t0.9\t0.09\t0.5000\t0.6500\n"
        "min_criterion_best\t0.9\t0.09\t0.0\t0.0\n");

  ModeRun run;
  run.name = "unstratified";
  const std::vector<std::string> names{"MLU", "PRN"};
  const std::vector<double> means{0.2672, 0.3144};
  run.importance = normalize_importance(names, means, 48, 0);
  ModeRun empty;
  empty.name = "proportional";
  const std::vector<double> zeros{0.0, 0.0};
  empty.importance = normalize_importance(names, zeros, 0, 48);
  const std::vector<ModeRun> runs{run, empty};
  std::ostringstream importance;
  write_importance_table(importance, runs);
  CHECK(importance.str() ==
        "mode\tpredictor\tmean_loss\tnormalized_pct\ttrees\tzero_filled\n"
        "unstratified\tMLU\t0.2672\t84.99\t48\t0\n"
        "unstratified\tPRN\t0.3144\t100.00\t48\t0\n"
        "proportional\tMLU\t0.0000\tNA\t0\t48\n"
        "proportional\tPRN\t0.0000\tNA\t0\t48\n");
}
