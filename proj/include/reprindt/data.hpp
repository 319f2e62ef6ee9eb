#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reprindt/config.hpp"

namespace reprindt {

enum class PredictorKind : std::uint8_t { categorical, numeric };

enum class Label : std::uint8_t { small = 0, large = 1 };

struct PredictorSpec {
  std::string name;
  PredictorKind kind = PredictorKind::numeric;
  std::vector<std::string> levels;  // categorical only, in declared order

  bool operator==(const PredictorSpec&) const = default;
};

using Schema = std::vector<PredictorSpec>;

// Throws InvalidParameter when names repeat or a categorical spec has fewer
// than two distinct levels.
void validate_schema(const Schema& schema);

struct ClassLabels {
  std::string small;
  std::string large;

  bool operator==(const ClassLabels&) const = default;
};

struct ClassCounts {
  std::size_t small = 0;
  std::size_t large = 0;

  bool operator==(const ClassCounts&) const = default;
};

// Column view over predictor values, one span per predictor. Categorical
// values are level indices stored as doubles.
class ColumnView {
 public:
  ColumnView() = default;
  ColumnView(std::vector<std::span<const double>> columns, std::size_t rows)
      : columns_(std::move(columns)), rows_(rows) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t predictors() const noexcept { return columns_.size(); }
  double value(std::size_t predictor, std::size_t row) const noexcept { return columns_[predictor][row]; }
  std::span<const double> column(std::size_t predictor) const noexcept { return columns_[predictor]; }

  // Same view with one column swapped, e.g. for a permuted predictor.
  ColumnView with_column(std::size_t predictor, std::span<const double> values) const;

 private:
  std::vector<std::span<const double>> columns_;
  std::size_t rows_ = 0;
};

// Immutable table of tokens: typed predictors plus a binary class label.
class Dataset {
 public:
  // Coded constructor. Validates every invariant; requires both classes and
  // n_small <= n_large.
  Dataset(Schema schema, std::string class_name, ClassLabels labels,
          std::vector<std::vector<double>> columns, std::vector<Label> classes);

  // Assigns small/large by ascending count, ties to the lexicographically
  // smaller label. Throws NotBinary unless exactly two labels occur.
  static Dataset from_text_labels(Schema schema, std::string class_name,
                                  std::vector<std::vector<double>> columns,
                                  const std::vector<std::string>& class_text);

  const Schema& schema() const noexcept { return *schema_; }
  std::shared_ptr<const Schema> shared_schema() const noexcept { return schema_; }
  const std::string& class_name() const noexcept { return class_name_; }
  const ClassLabels& class_labels() const noexcept { return labels_; }

  std::size_t rows() const noexcept { return classes_.size(); }
  std::size_t predictors() const noexcept { return columns_.size(); }
  std::size_t n_small() const noexcept { return n_small_; }
  std::size_t n_large() const noexcept { return classes_.size() - n_small_; }

  const PredictorSpec& predictor(std::size_t index) const { return schema_->at(index); }
  // Index of the named predictor; throws SchemaMismatch if absent.
  std::size_t predictor_index(const std::string& name) const;

  std::span<const double> column(std::size_t predictor) const noexcept { return columns_[predictor]; }
  double value(std::size_t predictor, std::size_t row) const noexcept { return columns_[predictor][row]; }
  std::span<const Label> classes() const noexcept { return classes_; }
  Label label(std::size_t row) const noexcept { return classes_[row]; }
  const std::string& label_text(Label label) const noexcept {
    return label == Label::small ? labels_.small : labels_.large;
  }

  // Values of one row, in schema order.
  std::vector<double> row(std::size_t index) const;
  std::string value_text(std::size_t predictor, std::size_t row) const;

  ColumnView columns() const;

  bool operator==(const Dataset& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::string class_name_;
  ClassLabels labels_;
  std::vector<std::vector<double>> columns_;
  std::vector<Label> classes_;
  std::size_t n_small_ = 0;
};

ClassCounts class_counts(const Dataset& data);

// Maps raw text values onto the coded representation; throws UnknownLevel or
// InvalidValue.
std::vector<double> encode_row(const Schema& schema, const std::vector<std::string>& values);

struct SchemaConfig {
  std::string class_column;
  Schema predictors;
  char delimiter = ',';
};

// Reads `class`, `categorical = col:a|b|c`, `numeric = col` and `delimiter`
// keys. Other keys are left to the caller.
SchemaConfig schema_config_from(const ConfigSection& section);

// Schema description that reproduces `data` when loading its written form.
SchemaConfig schema_config_of(const Dataset& data, char delimiter = ',');

Dataset parse_dataset(std::istream& in, const SchemaConfig& config, const std::string& source = "<input>");
Dataset load_dataset(const std::string& path, const SchemaConfig& config);

// Header row plus one line per token; numbers in shortest round-trip form.
void write_dataset(const Dataset& data, std::ostream& out, char delimiter = ',');
void write_dataset(const Dataset& data, const std::string& path, char delimiter = ',');

struct SyntheticPredictor {
  PredictorSpec spec;
  // Categorical: mixing weight in [0, 1] that moves small-class mass onto the
  // first level. Numeric: shift of the small-class mean in standard deviations.
  double effect = 0.0;
  // Baseline level probabilities (categorical); empty means uniform.
  std::vector<double> weights;
};

struct SyntheticSpec {
  std::size_t n = 1000;
  double imbalance = 0.1;  // target n_small / n_large
  std::vector<SyntheticPredictor> signal;
  std::size_t noise_predictors = 0;
  std::uint64_t seed = 1;
  std::string class_name = "class";
  ClassLabels labels{"small", "large"};
};

// Rows whose class is small for a given total and imbalance ratio.
std::size_t synthetic_small_count(std::size_t n, double imbalance);

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace reprindt
