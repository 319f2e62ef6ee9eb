#pragma once

// Reference computations written without the library's helpers: direct
// counting, integer arithmetic and brute-force enumeration. Slow on purpose.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "reprindt/ctree.hpp"
#include "reprindt/data.hpp"

namespace oracle {

using reprindt::Label;

struct Triple {
  double small;
  double large;
  double balanced;
};

inline Triple balanced_accuracy(const std::vector<Label>& pred, const std::vector<Label>& truth) {
  long hit_s = 0, hit_l = 0, n_s = 0, n_l = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::small) {
      ++n_s;
      if (pred[i] == Label::small) ++hit_s;
    } else {
      ++n_l;
      if (pred[i] == Label::large) ++hit_l;
    }
  }
  const double s = static_cast<double>(hit_s) / static_cast<double>(n_s);
  const double l = static_cast<double>(hit_l) / static_cast<double>(n_l);
  return {s, l, (s + l) / 2.0};
}

// round-half-up of n * num / den in integers.
inline std::int64_t round_half_up(std::int64_t n, std::int64_t num, std::int64_t den) {
  return (2 * n * num + den) / (2 * den);
}

// |mean(x | small) - mean(x | large)|, the two-sample mean difference.
inline double mean_difference(const std::vector<double>& x, const std::vector<Label>& y) {
  double s = 0, l = 0;
  long ns = 0, nl = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == Label::small) {
      s += x[i];
      ++ns;
    } else {
      l += x[i];
      ++nl;
    }
  }
  return std::abs(s / static_cast<double>(ns) - l / static_cast<double>(nl));
}

// Pearson chi-square of the level x class table.
inline double pearson(const std::vector<double>& x, const std::vector<Label>& y, std::size_t levels) {
  std::vector<double> small(levels, 0.0), total(levels, 0.0);
  double ns = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto j = static_cast<std::size_t>(x[i]);
    total[j] += 1;
    if (y[i] == Label::small) {
      small[j] += 1;
      ns += 1;
    }
  }
  const double n = static_cast<double>(x.size());
  double chi = 0;
  for (std::size_t j = 0; j < levels; ++j) {
    if (total[j] == 0) continue;
    const double es = total[j] * ns / n;
    const double el = total[j] * (n - ns) / n;
    chi += (small[j] - es) * (small[j] - es) / es;
    chi += (total[j] - small[j] - el) * (total[j] - small[j] - el) / el;
  }
  return chi;
}

// Exact permutation p-value over all n! orderings of the labels.
template <class Statistic>
double enumerate_p_value(const std::vector<double>& x, const std::vector<Label>& y, Statistic stat) {
  const double observed = stat(x, y);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Label> permuted(y.size());
  std::uint64_t hits = 0, total = 0;
  do {
    for (std::size_t i = 0; i < y.size(); ++i) permuted[i] = y[order[i]];
    if (stat(x, permuted) >= observed * (1.0 - 1e-9)) ++hits;
    ++total;
  } while (std::next_permutation(order.begin(), order.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Same p-value over distinct label arrangements; each of them stands for
// n_small! * n_large! orderings, so the ratio is unchanged. For n near 10.
template <class Statistic>
double enumerate_arrangements(const std::vector<double>& x, const std::vector<Label>& y, Statistic stat) {
  const double observed = stat(x, y);
  std::vector<Label> permuted = y;
  std::sort(permuted.begin(), permuted.end());
  std::uint64_t hits = 0, total = 0;
  do {
    if (stat(x, permuted) >= observed * (1.0 - 1e-9)) ++hits;
    ++total;
  } while (std::next_permutation(permuted.begin(), permuted.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Balanced accuracy of a tree at threshold 0.5, routing each row by hand.
inline double tree_balanced(const reprindt::Tree& tree, const std::vector<std::vector<double>>& columns,
                            const std::vector<Label>& truth) {
  std::vector<Label> pred(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::size_t node = 0;
    while (!tree.nodes()[node].is_leaf()) {
      const auto& split = *tree.nodes()[node].split;
      const double v = columns[split.predictor][i];
      const bool left = split.kind == reprindt::PredictorKind::numeric
                            ? v <= split.cutpoint
                            : split.left_levels[static_cast<std::size_t>(v)] != 0;
      node = left ? tree.nodes()[node].left : tree.nodes()[node].right;
    }
    const auto& leaf = tree.nodes()[node];
    pred[i] = 2 * leaf.n_small >= leaf.n ? Label::small : Label::large;
  }
  return balanced_accuracy(pred, truth).balanced;
}

struct LossMoments {
  double mean;
  double sd;
};

// Mean and spread of the permutation loss over all n! orderings of one column.
inline LossMoments all_permutations_loss(const reprindt::Tree& tree, const reprindt::Dataset& data,
                                         std::size_t predictor) {
  std::vector<std::vector<double>> columns;
  for (std::size_t p = 0; p < data.predictors(); ++p) {
    columns.emplace_back(data.column(p).begin(), data.column(p).end());
  }
  const std::vector<Label> truth(data.classes().begin(), data.classes().end());
  const double base = tree_balanced(tree, columns, truth);
  const std::vector<double> original = columns[predictor];
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  double sum = 0, sum_sq = 0;
  std::uint64_t count = 0;
  do {
    for (std::size_t i = 0; i < order.size(); ++i) columns[predictor][i] = original[order[i]];
    const double loss = base - tree_balanced(tree, columns, truth);
    sum += loss;
    sum_sq += loss * loss;
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  const double mean = sum / static_cast<double>(count);
  return {mean, std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean))};
}

}  // namespace oracle
