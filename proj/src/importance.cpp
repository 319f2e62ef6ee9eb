#include "reprindt/importance.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>

#include "reprindt/engine.hpp"
#include "reprindt/error.hpp"
#include "reprindt/rng.hpp"

namespace reprindt {

namespace {

// Sums losses per predictor in tree order so the parallel and serial paths
// round identically.
ImportanceReport summarize(const std::vector<double>& losses, std::size_t trees, const Dataset& data,
                           std::size_t zero_fill) {
  const std::size_t p_count = data.predictors();
  std::vector<std::string> names;
  std::vector<double> means(p_count, 0.0);
  const auto denominator = static_cast<double>(trees + zero_fill);
  for (std::size_t p = 0; p < p_count; ++p) {
    names.push_back(data.predictor(p).name);
    double sum = 0.0;
    for (std::size_t t = 0; t < trees; ++t) sum += losses[t * p_count + p];
    means[p] = sum / denominator;
  }
  return normalize_importance(names, means, trees, zero_fill);
}

void check_inputs(std::span<const Tree* const> trees, const Dataset& data) {
  if (trees.empty()) throw Error(ErrorCode::invalid_parameter, "importance needs at least one tree");
  for (const Tree* tree : trees) {
    if (tree == nullptr || tree->schema() != data.schema()) {
      throw Error(ErrorCode::schema_mismatch, "tree schema does not match the dataset");
    }
  }
}

}  // namespace

std::uint64_t importance_tree_seed(std::uint64_t seed, std::size_t tree_index) {
  return substream_key(seed, {purpose_tag(StreamPurpose::importance), tree_index});
}

double permutation_loss(const Tree& tree, const Dataset& data, std::size_t predictor, std::uint64_t seed,
                        std::size_t repeats) {
  if (predictor >= data.predictors()) throw Error(ErrorCode::invalid_parameter, "predictor index out of range");
  if (repeats < 1) throw Error(ErrorCode::invalid_parameter, "permutation repeats must be at least 1");
  // Predictions cannot change when the tree never consults the predictor.
  if (!tree.uses_predictor(predictor)) return 0.0;

  const ColumnView columns = data.columns();
  const double original = balanced_accuracy(predict_all(tree, columns, 0.5), data.classes()).balanced;
  double total = 0.0;
  std::vector<double> permuted(data.column(predictor).begin(), data.column(predictor).end());
  for (std::size_t r = 0; r < repeats; ++r) {
    std::copy(data.column(predictor).begin(), data.column(predictor).end(), permuted.begin());
    Stream stream(derive_key(derive_key(seed, predictor), r));
    stream.shuffle(std::span<double>(permuted));
    const ColumnView swapped = columns.with_column(predictor, permuted);
    total += original - balanced_accuracy(predict_all(tree, swapped, 0.5), data.classes()).balanced;
  }
  return total / static_cast<double>(repeats);
}

ImportanceReport ensemble_importance_serial(std::span<const Tree* const> trees, const Dataset& data,
                                            std::uint64_t seed, std::size_t zero_fill,
                                            const ImportanceOptions& options) {
  check_inputs(trees, data);
  const std::size_t p_count = data.predictors();
  std::vector<double> losses(trees.size() * p_count, 0.0);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (std::size_t p = 0; p < p_count; ++p) {
      losses[t * p_count + p] =
          permutation_loss(*trees[t], data, p, importance_tree_seed(seed, t), options.permutation_repeats);
    }
  }
  return summarize(losses, trees.size(), data, zero_fill);
}

ImportanceReport ensemble_importance(std::span<const Tree* const> trees, const Dataset& data, std::uint64_t seed,
                                     std::size_t zero_fill, const ImportanceOptions& options) {
  check_inputs(trees, data);
  const std::size_t p_count = data.predictors();
  const auto tasks = static_cast<long>(trees.size() * p_count);
  std::vector<double> losses(static_cast<std::size_t>(tasks), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
  const int team = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (long i = 0; i < tasks; ++i) {
    const auto task = static_cast<std::size_t>(i);
    const std::size_t t = task / p_count;
    const std::size_t p = task % p_count;
    try {
      losses[task] = permutation_loss(*trees[t], data, p, importance_tree_seed(seed, t), options.permutation_repeats);
    } catch (...) {
      errors[task] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return summarize(losses, trees.size(), data, zero_fill);
}

ImportanceReport normalize_importance(std::span<const std::string> names, std::span<const double> mean_losses,
                                      std::size_t tree_count, std::size_t zero_filled) {
  if (names.size() != mean_losses.size()) {
    throw Error(ErrorCode::length_mismatch, "one mean loss per predictor name is required");
  }
  ImportanceReport report;
  report.tree_count = tree_count;
  report.zero_filled = zero_filled;
  double largest = 0.0;
  for (double m : mean_losses) largest = std::max(largest, m);
  report.normalization_undefined = !(largest > 0.0);
  for (std::size_t p = 0; p < names.size(); ++p) {
    PredictorImportance entry{names[p], mean_losses[p], std::nullopt};
    if (!report.normalization_undefined) {
      // Exact maxima map to exactly 100.
      entry.normalized = mean_losses[p] == largest ? 100.0 : mean_losses[p] / largest * 100.0;
    }
    report.predictors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace reprindt
