#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reprindt/ctree.hpp"
#include "reprindt/data.hpp"

namespace reprindt {

struct PredictorImportance {
  std::string name;
  double mean_loss = 0.0;
  std::optional<double> normalized;  // percent of the largest mean; unset when undefined
};

struct ImportanceReport {
  std::vector<PredictorImportance> predictors;  // schema order
  std::size_t tree_count = 0;
  std::size_t zero_filled = 0;
  // Set when no mean is positive (all zero included); normalization is then
  // undefined and every `normalized` is empty.
  bool normalization_undefined = false;
};

struct ImportanceOptions {
  std::size_t permutation_repeats = 1;
  int threads = 0;  // 0 keeps the OpenMP default
};

// Balanced accuracy at threshold 0.5 on all rows of `data`, minus the same
// after permuting one predictor's column, averaged over `repeats` draws.
double permutation_loss(const Tree& tree, const Dataset& data, std::size_t predictor, std::uint64_t seed,
                        std::size_t repeats = 1);

// Mean loss per predictor over the trees plus `zero_fill` zero entries, then
// normalized by the largest mean. Tree t uses the seed derived from (seed, t).
ImportanceReport ensemble_importance(std::span<const Tree* const> trees, const Dataset& data, std::uint64_t seed,
                                     std::size_t zero_fill, const ImportanceOptions& options = {});

// Serial reference for ensemble_importance.
ImportanceReport ensemble_importance_serial(std::span<const Tree* const> trees, const Dataset& data,
                                            std::uint64_t seed, std::size_t zero_fill,
                                            const ImportanceOptions& options = {});

// Builds a report from precomputed mean losses.
ImportanceReport normalize_importance(std::span<const std::string> names, std::span<const double> mean_losses,
                                      std::size_t tree_count = 0, std::size_t zero_filled = 0);

std::uint64_t importance_tree_seed(std::uint64_t seed, std::size_t tree_index);

}  // namespace reprindt
