#include <doctest.h>

#include "oracles.hpp"
#include "reprindt/permutation_test.hpp"
#include "support.hpp"

using namespace reprindt;

namespace {

TestOutcome run_one(const TestColumn& column, const std::vector<Label>& y, PValueMode mode,
                    std::size_t permutations = 9999, std::uint64_t key = 1) {
  TestOptions options;
  options.mode = mode;
  options.permutations = permutations;
  Stream stream(key);
  return permutation_tests(std::span<const TestColumn>(&column, 1), y, options, stream).front();
}

std::vector<double> random_numeric(Stream& s, std::size_t n, int distinct) {
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(s.uniform_below(static_cast<std::uint64_t>(distinct))) * 0.5;
  return x;
}

std::vector<Label> random_labels(Stream& s, std::size_t n) {
  while (true) {
    std::vector<Label> y(n);
    for (auto& v : y) v = s.uniform_below(3) == 0 ? Label::small : Label::large;
    const auto small = std::count(y.begin(), y.end(), Label::small);
    if (small > 0 && small < static_cast<long>(n)) return y;
  }
}

}  // namespace

TEST_CASE("2x2 table (8,2) vs (2,8): exact p-value matches enumeration") {
  // Level 0: 8 small, 2 large; level 1: 2 small, 8 large.
  std::vector<double> x;
  std::vector<Label> labels;
  for (int i = 0; i < 8; ++i) x.push_back(0), labels.push_back(Label::small);
  for (int i = 0; i < 2; ++i) x.push_back(0), labels.push_back(Label::large);
  for (int i = 0; i < 2; ++i) x.push_back(1), labels.push_back(Label::small);
  for (int i = 0; i < 8; ++i) x.push_back(1), labels.push_back(Label::large);
  const TestColumn column{PredictorKind::categorical, x, 2};
  const auto exact = run_one(column, labels, PValueMode::exact);
  const double expected = oracle::enumerate_arrangements(x, labels, [](const auto& a, const auto& b) {
    return oracle::pearson(a, b, 2);
  });
  CHECK(exact.exact);
  CHECK(exact.resamples == 184756);
  CHECK(exact.p_value == expected);
  CHECK(expected == doctest::Approx(2.0 * 2126.0 / 184756.0).epsilon(1e-12));
  CHECK(exact.statistic == doctest::Approx(oracle::pearson(x, labels, 2)));
}

TEST_CASE("exact mode equals n! enumeration on small numeric nodes") {
  Stream gen(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + gen.uniform_below(5);  // 4..8 rows
    const auto x = random_numeric(gen, n, 1 + static_cast<int>(gen.uniform_below(6)));
    const auto y = random_labels(gen, n);
    const TestColumn column{PredictorKind::numeric, x, 0};
    const auto got = run_one(column, y, PValueMode::exact);
    if (!got.testable) {
      CHECK(std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }));
      continue;
    }
    CHECK(got.p_value == oracle::enumerate_p_value(x, y, oracle::mean_difference));
  }
}

TEST_CASE("exact mode equals n! enumeration on small categorical nodes") {
  Stream gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + gen.uniform_below(5);
    const std::size_t levels = 2 + gen.uniform_below(3);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(gen.uniform_below(levels));
    const auto y = random_labels(gen, n);
    const TestColumn column{PredictorKind::categorical, x, levels};
    const auto got = run_one(column, y, PValueMode::exact);
    if (!got.testable) continue;
    const double expected = oracle::enumerate_p_value(x, y, [&](const auto& a, const auto& b) {
      return oracle::pearson(a, b, levels);
    });
    CHECK(got.p_value == expected);
  }
}

TEST_CASE("Monte Carlo p-values track enumeration on 10-row nodes") {
  Stream gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_numeric(gen, 10, 7);
    const auto y = random_labels(gen, 10);
    const TestColumn column{PredictorKind::numeric, x, 0};
    const auto mc = run_one(column, y, PValueMode::monte_carlo, 9999, 100 + static_cast<std::uint64_t>(trial));
    if (!mc.testable) continue;
    CHECK_FALSE(mc.exact);
    const double expected = oracle::enumerate_arrangements(x, y, oracle::mean_difference);
    CHECK(std::abs(mc.p_value - expected) <= 0.02);
  }
}

TEST_CASE("automatic mode switches on the number of arrangements") {
  std::vector<double> x(30);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 7);
  std::vector<Label> y(30, Label::large);
  y[0] = y[5] = Label::small;  // C(30, 2) = 435 arrangements
  const TestColumn column{PredictorKind::numeric, x, 0};
  CHECK(run_one(column, y, PValueMode::automatic).exact);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i) * 3] = Label::small;  // C(30, 11) is large
  CHECK_FALSE(run_one(column, y, PValueMode::automatic).exact);
}

TEST_CASE("constant columns and one-class nodes are untestable") {
  const std::vector<double> flat(6, 2.0);
  const auto labels = test::labels("ssllll");
  CHECK_FALSE(run_one({PredictorKind::numeric, flat, 0}, labels, PValueMode::exact).testable);
  CHECK_FALSE(run_one({PredictorKind::categorical, std::vector<double>(6, 1.0), 3}, labels, PValueMode::exact).testable);
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  CHECK_FALSE(run_one({PredictorKind::numeric, x, 0}, std::vector<Label>(6, Label::large), PValueMode::exact).testable);
}

TEST_CASE("early drop stops clearly insignificant columns") {
  Stream gen(9);
  std::vector<double> x(200);
  for (auto& v : x) v = gen.uniform01();
  const auto y = random_labels(gen, 200);
  TestOptions options;
  options.mode = PValueMode::monte_carlo;
  options.permutations = 9999;
  options.p_ceiling = 0.01;
  const TestColumn column{PredictorKind::numeric, x, 0};
  Stream s1(3);
  const auto dropped = permutation_tests(std::span<const TestColumn>(&column, 1), y, options, s1).front();
  if (dropped.p_value > 0.05) {
    CHECK(dropped.resamples < 9999);
    CHECK(dropped.p_value > options.p_ceiling);
  }
}

TEST_CASE("chi-square of a 2x2 table") {
  // (8,2) vs (2,8): 20 * (64 - 4)^2 / (10 * 10 * 10 * 10) = 7.2
  CHECK(chi_square_2x2(10, 8, 10, 2) == doctest::Approx(7.2));
  CHECK(chi_square_2x2(0, 0, 10, 2) == 0.0);
  CHECK(binomial_capped(20, 10, 1000000) == 184756);
  CHECK(binomial_capped(60, 30, 9999) == 10000);
}
