#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reprindt/data.hpp"
#include "reprindt/permutation_test.hpp"
#include "reprindt/sampling.hpp"

namespace reprindt {

struct CtreeSettings {
  double alpha = 0.05;
  std::size_t min_split = 20;
  std::size_t min_bucket = 7;
  std::optional<std::size_t> max_depth;
  std::size_t permutations = 9999;
  PValueMode pvalue_mode = PValueMode::automatic;
  std::size_t exact_limit = 9999;
  // Exhaustive binary subset search up to this many levels present at a
  // node; above it levels are ordered by small-class rate.
  std::size_t max_exhaustive_levels = 10;

  bool operator==(const CtreeSettings&) const = default;
};

void validate_settings(const CtreeSettings& settings);

// Where a tree's training rows came from.
struct TreeProvenance {
  std::size_t cell = 0;
  std::size_t repetition = 0;
  std::size_t attempts = 0;
  double psmall = 1.0;
  double plarge = 1.0;
  std::uint64_t seed = 0;
  bool full_sample = false;

  bool operator==(const TreeProvenance&) const = default;
};

struct Split {
  std::size_t predictor = 0;
  PredictorKind kind = PredictorKind::numeric;
  double cutpoint = 0.0;                   // numeric: value <= cutpoint goes left
  std::vector<std::uint8_t> left_levels;   // categorical: 1 marks a level routed left

  bool goes_left(double value) const noexcept {
    return kind == PredictorKind::numeric ? value <= cutpoint
                                          : left_levels[static_cast<std::size_t>(value)] != 0;
  }

  bool operator==(const Split&) const = default;
};

struct Node {
  std::optional<Split> split;
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t n = 0;
  std::size_t n_small = 0;
  double p_value = 1.0;    // Bonferroni-adjusted p-value of the split predictor
  double statistic = 0.0;  // test statistic of the split predictor

  bool is_leaf() const noexcept { return !split.has_value(); }
  double freq_small() const noexcept { return n == 0 ? 0.0 : static_cast<double>(n_small) / static_cast<double>(n); }
  double freq_large() const noexcept { return n == 0 ? 0.0 : static_cast<double>(n - n_small) / static_cast<double>(n); }

  bool operator==(const Node&) const = default;
};

struct LeafFrequencies {
  double small = 0.0;
  double large = 0.0;
};

// Numeric range of each predictor over the data a tree is applied to; used
// to decide which value regions a root-to-leaf path covers.
struct NumericRange {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const NumericRange&) const = default;
};

class Tree {
 public:
  Tree(std::shared_ptr<const Schema> schema, std::vector<Node> nodes, CtreeSettings settings,
       TreeProvenance provenance, std::vector<NumericRange> domain);

  const Schema& schema() const noexcept { return *schema_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const noexcept { return nodes_.front(); }
  const CtreeSettings& settings() const noexcept { return settings_; }
  const TreeProvenance& provenance() const noexcept { return provenance_; }
  const std::vector<NumericRange>& domain() const noexcept { return domain_; }

  std::size_t leaf_count() const;
  std::size_t depth() const;
  bool uses_predictor(std::size_t predictor) const;

  // Index of the leaf reached by row `row` of `columns`. No validation.
  std::size_t leaf_index(const ColumnView& columns, std::size_t row) const noexcept {
    std::size_t node = 0;
    while (nodes_[node].split) {
      const Split& s = *nodes_[node].split;
      node = s.goes_left(columns.value(s.predictor, row)) ? nodes_[node].left : nodes_[node].right;
    }
    return node;
  }

  // Validating variant for one coded row (see encode_row).
  std::size_t leaf_index(std::span<const double> row) const;

  bool operator==(const Tree& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Node> nodes_;
  CtreeSettings settings_;
  TreeProvenance provenance_;
  std::vector<NumericRange> domain_;
};

// Fits a tree on `rows` of `data`. Throws DegenerateInput when the rows hold
// only one class. `stream_key` seeds the per-node permutation streams.
Tree fit_ctree(const Dataset& data, std::span<const std::size_t> rows, const CtreeSettings& settings,
               std::uint64_t stream_key, TreeProvenance provenance = {});

// Fits on a feasible training set, deriving the stream from its key.
Tree fit_ctree(const Dataset& data, const TrainingSet& training, const CtreeSettings& settings);

// Fits on every row of `data`.
Tree fit_ctree_full(const Dataset& data, const CtreeSettings& settings, std::uint64_t seed);

// Small-class frequencies at or above the threshold predict small; the
// comparison allows kThresholdTolerance of rounding slack.
inline constexpr double kThresholdTolerance = 1e-12;

void validate_threshold(double threshold);

inline Label label_for(double freq_small, double threshold) noexcept {
  return freq_small >= threshold - kThresholdTolerance ? Label::small : Label::large;
}

LeafFrequencies leaf_frequencies(const Tree& tree, std::span<const double> row);
Label predict(const Tree& tree, std::span<const double> row, double threshold = 0.5);

// Batch forms over a dataset (or a column view with swapped columns).
std::vector<double> small_frequencies(const Tree& tree, const ColumnView& columns);
std::vector<Label> predict_all(const Tree& tree, const ColumnView& columns, double threshold = 0.5);

// Indented text rendering: one line per node with its split or leaf
// frequencies. Deterministic for a given tree.
std::string to_text(const Tree& tree);

}  // namespace reprindt
