#include "reprindt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "reprindt/error.hpp"
#include "reprindt/rng.hpp"
#include "reprindt/rounding.hpp"

namespace reprindt {

namespace {

bool is_level_code(double value, std::size_t n_levels) {
  return std::isfinite(value) && value >= 0.0 && value < static_cast<double>(n_levels) &&
         value == std::floor(value);
}

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

// Splits one delimited record. Double-quoted fields may contain the
// delimiter; a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

std::string quote_if_needed(const std::string& text, char delimiter) {
  if (text.find(delimiter) == std::string::npos && text.find('"') == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& spec : schema) {
    if (spec.name.empty()) throw Error(ErrorCode::invalid_parameter, "predictor with empty name");
    if (!names.insert(spec.name).second) {
      throw Error(ErrorCode::invalid_parameter, "duplicate predictor name '" + spec.name + "'");
    }
    if (spec.kind == PredictorKind::categorical) {
      if (spec.levels.size() < 2) {
        throw Error(ErrorCode::invalid_parameter,
                    "categorical predictor '" + spec.name + "' needs at least two levels");
      }
      std::set<std::string> levels(spec.levels.begin(), spec.levels.end());
      if (levels.size() != spec.levels.size()) {
        throw Error(ErrorCode::invalid_parameter, "categorical predictor '" + spec.name + "' repeats a level");
      }
    } else if (!spec.levels.empty()) {
      throw Error(ErrorCode::invalid_parameter, "numeric predictor '" + spec.name + "' must not declare levels");
    }
  }
}

ColumnView ColumnView::with_column(std::size_t predictor, std::span<const double> values) const {
  ColumnView copy = *this;
  copy.columns_.at(predictor) = values;
  return copy;
}

Dataset::Dataset(Schema schema, std::string class_name, ClassLabels labels,
                 std::vector<std::vector<double>> columns, std::vector<Label> classes)
    : class_name_(std::move(class_name)),
      labels_(std::move(labels)),
      columns_(std::move(columns)),
      classes_(std::move(classes)) {
  validate_schema(schema);
  if (columns_.size() != schema.size()) {
    throw Error(ErrorCode::schema_mismatch, "column count does not match the schema");
  }
  if (labels_.small == labels_.large) {
    throw Error(ErrorCode::not_binary, "class labels must differ");
  }
  for (std::size_t p = 0; p < schema.size(); ++p) {
    const auto& spec = schema[p];
    if (columns_[p].size() != classes_.size()) {
      throw Error(ErrorCode::schema_mismatch, "column '" + spec.name + "' has the wrong length");
    }
    for (double v : columns_[p]) {
      if (spec.kind == PredictorKind::categorical) {
        if (!is_level_code(v, spec.levels.size())) {
          throw Error(ErrorCode::unknown_level, "invalid level code in '" + spec.name + "'");
        }
      } else if (!std::isfinite(v)) {
        throw Error(ErrorCode::invalid_value, "non-finite value in '" + spec.name + "'");
      }
    }
  }
  n_small_ = static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), Label::small));
  if (n_small_ == 0 || n_small_ == classes_.size()) {
    throw Error(ErrorCode::not_binary, "both classes must be present");
  }
  if (n_small_ > classes_.size() - n_small_) {
    throw Error(ErrorCode::invalid_parameter, "the small class outnumbers the large class");
  }
  // Equal counts: the lexicographically smaller label is the small class.
  if (2 * n_small_ == classes_.size() && labels_.large < labels_.small) {
    std::swap(labels_.small, labels_.large);
    for (auto& c : classes_) c = c == Label::small ? Label::large : Label::small;
  }
  schema_ = std::make_shared<const Schema>(std::move(schema));
}

Dataset Dataset::from_text_labels(Schema schema, std::string class_name,
                                  std::vector<std::vector<double>> columns,
                                  const std::vector<std::string>& class_text) {
  std::map<std::string, std::size_t> counts;
  for (const auto& label : class_text) ++counts[label];
  if (counts.size() != 2) {
    throw Error(ErrorCode::not_binary, "class column '" + class_name + "' has " +
                                           std::to_string(counts.size()) + " distinct labels, expected 2");
  }
  // std::map iterates in lexicographic order, so the first entry wins ties.
  auto first = counts.begin();
  auto second = std::next(first);
  ClassLabels labels = first->second <= second->second ? ClassLabels{first->first, second->first}
                                                       : ClassLabels{second->first, first->first};
  std::vector<Label> classes;
  classes.reserve(class_text.size());
  for (const auto& label : class_text) classes.push_back(label == labels.small ? Label::small : Label::large);
  return Dataset(std::move(schema), std::move(class_name), std::move(labels), std::move(columns),
                 std::move(classes));
}

std::size_t Dataset::predictor_index(const std::string& name) const {
  for (std::size_t p = 0; p < schema_->size(); ++p) {
    if ((*schema_)[p].name == name) return p;
  }
  throw Error(ErrorCode::schema_mismatch, "no predictor named '" + name + "'");
}

std::vector<double> Dataset::row(std::size_t index) const {
  std::vector<double> values;
  values.reserve(columns_.size());
  for (const auto& column : columns_) values.push_back(column.at(index));
  return values;
}

std::string Dataset::value_text(std::size_t predictor, std::size_t row) const {
  const auto& spec = (*schema_)[predictor];
  const double v = columns_[predictor][row];
  if (spec.kind == PredictorKind::categorical) return spec.levels[static_cast<std::size_t>(v)];
  return format_number(v);
}

ColumnView Dataset::columns() const {
  std::vector<std::span<const double>> spans;
  spans.reserve(columns_.size());
  for (const auto& column : columns_) spans.emplace_back(column);
  return ColumnView(std::move(spans), classes_.size());
}

bool Dataset::operator==(const Dataset& other) const {
  return *schema_ == *other.schema_ && class_name_ == other.class_name_ && labels_ == other.labels_ &&
         columns_ == other.columns_ && classes_ == other.classes_;
}

ClassCounts class_counts(const Dataset& data) { return {data.n_small(), data.n_large()}; }

std::vector<double> encode_row(const Schema& schema, const std::vector<std::string>& values) {
  if (values.size() != schema.size()) {
    throw Error(ErrorCode::schema_mismatch, "row has " + std::to_string(values.size()) + " values, schema has " +
                                                std::to_string(schema.size()));
  }
  std::vector<double> coded;
  coded.reserve(values.size());
  for (std::size_t p = 0; p < schema.size(); ++p) {
    const auto& spec = schema[p];
    const std::string text = trim(values[p]);
    if (text.empty()) throw Error(ErrorCode::missing_value, "empty value for '" + spec.name + "'");
    if (spec.kind == PredictorKind::categorical) {
      const auto it = std::find(spec.levels.begin(), spec.levels.end(), text);
      if (it == spec.levels.end()) {
        throw Error(ErrorCode::unknown_level, "'" + text + "' is not a level of '" + spec.name + "'");
      }
      coded.push_back(static_cast<double>(it - spec.levels.begin()));
    } else {
      double v = 0.0;
      const char* first = text.data();
      const char* last = text.data() + text.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorCode::invalid_value, "'" + text + "' is not a finite number for '" + spec.name + "'");
      }
      coded.push_back(v);
    }
  }
  return coded;
}

SchemaConfig schema_config_from(const ConfigSection& section) {
  SchemaConfig config;
  const auto class_column = section.get("class");
  if (!class_column || class_column->empty()) {
    throw Error(ErrorCode::config, section.qualified("class") + " is required");
  }
  config.class_column = *class_column;
  if (const auto delim = section.get("delimiter")) {
    if (*delim == "tab" || *delim == "\\t") {
      config.delimiter = '\t';
    } else if (delim->size() == 1) {
      config.delimiter = (*delim)[0];
    } else {
      throw Error(ErrorCode::config, section.qualified("delimiter") + ": expected one character or 'tab'");
    }
  }
  for (const auto& entry : section.entries()) {
    if (entry.key == "categorical") {
      const auto colon = entry.value.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::config, section.qualified("categorical") + ": expected 'column:level1|level2|...'");
      }
      PredictorSpec spec{trim(entry.value.substr(0, colon)), PredictorKind::categorical,
                         split(entry.value.substr(colon + 1), '|')};
      config.predictors.push_back(std::move(spec));
    } else if (entry.key == "numeric") {
      config.predictors.push_back({trim(entry.value), PredictorKind::numeric, {}});
    }
  }
  if (config.predictors.empty()) {
    throw Error(ErrorCode::config, section.name() + ": at least one categorical or numeric predictor is required");
  }
  try {
    validate_schema(config.predictors);
  } catch (const Error& e) {
    throw Error(ErrorCode::config, section.name() + ": " + e.what());
  }
  return config;
}

SchemaConfig schema_config_of(const Dataset& data, char delimiter) {
  return {data.class_name(), data.schema(), delimiter};
}

Dataset parse_dataset(std::istream& in, const SchemaConfig& config, const std::string& source) {
  validate_schema(config.predictors);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::schema_mismatch, source + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line, config.delimiter);

  const auto find_column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::schema_mismatch, source + ": column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t class_col = find_column(config.class_column);
  std::vector<std::size_t> predictor_cols;
  for (const auto& spec : config.predictors) predictor_cols.push_back(find_column(spec.name));

  std::vector<std::vector<double>> columns(config.predictors.size());
  std::vector<std::string> class_text;
  std::vector<std::string> raw(config.predictors.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, config.delimiter);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::schema_mismatch, where + ": expected " + std::to_string(header.size()) +
                                                  " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t p = 0; p < predictor_cols.size(); ++p) raw[p] = fields[predictor_cols[p]];
    std::vector<double> coded;
    try {
      coded = encode_row(config.predictors, raw);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    for (std::size_t p = 0; p < coded.size(); ++p) columns[p].push_back(coded[p]);
    if (fields[class_col].empty()) {
      throw Error(ErrorCode::missing_value, where + ": empty class label");
    }
    class_text.push_back(fields[class_col]);
  }
  return Dataset::from_text_labels(config.predictors, config.class_column, std::move(columns), class_text);
}

Dataset load_dataset(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open data file '" + path + "'");
  return parse_dataset(in, config, path);
}

void write_dataset(const Dataset& data, std::ostream& out, char delimiter) {
  for (std::size_t p = 0; p < data.predictors(); ++p) {
    out << quote_if_needed(data.predictor(p).name, delimiter) << delimiter;
  }
  out << quote_if_needed(data.class_name(), delimiter) << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t p = 0; p < data.predictors(); ++p) {
      out << quote_if_needed(data.value_text(p, i), delimiter) << delimiter;
    }
    out << quote_if_needed(data.label_text(data.label(i)), delimiter) << '\n';
  }
}

void write_dataset(const Dataset& data, const std::string& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  write_dataset(data, out, delimiter);
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

std::size_t synthetic_small_count(std::size_t n, double imbalance) {
  return round_half_up(static_cast<double>(n) * imbalance / (1.0 + imbalance));
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 20) throw Error(ErrorCode::invalid_parameter, "synthetic n must be at least 20");
  if (!(spec.imbalance > 0.0 && spec.imbalance <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "imbalance must lie in (0, 1]");
  }
  const std::size_t n_small = synthetic_small_count(spec.n, spec.imbalance);
  if (n_small == 0) throw Error(ErrorCode::invalid_parameter, "imbalance leaves no small-class rows");

  Schema schema;
  for (const auto& predictor : spec.signal) {
    const auto& ps = predictor.spec;
    if (!std::isfinite(predictor.effect)) {
      throw Error(ErrorCode::invalid_parameter, "effect of '" + ps.name + "' must be finite");
    }
    if (ps.kind == PredictorKind::categorical) {
      if (predictor.effect < 0.0 || predictor.effect > 1.0) {
        throw Error(ErrorCode::invalid_parameter, "categorical effect of '" + ps.name + "' must lie in [0, 1]");
      }
      if (!predictor.weights.empty()) {
        if (predictor.weights.size() != ps.levels.size()) {
          throw Error(ErrorCode::invalid_parameter, "weights of '" + ps.name + "' must match its levels");
        }
        for (double w : predictor.weights) {
          if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::invalid_parameter, "weights of '" + ps.name + "' must be nonnegative");
          }
        }
        if (std::accumulate(predictor.weights.begin(), predictor.weights.end(), 0.0) <= 0.0) {
          throw Error(ErrorCode::invalid_parameter, "weights of '" + ps.name + "' sum to zero");
        }
      }
    }
    schema.push_back(ps);
  }
  for (std::size_t j = 0; j < spec.noise_predictors; ++j) {
    schema.push_back({"noise" + std::to_string(j + 1), PredictorKind::numeric, {}});
  }
  if (schema.empty()) throw Error(ErrorCode::invalid_parameter, "synthetic data needs at least one predictor");
  try {
    validate_schema(schema);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_parameter, e.what());
  }

  const std::uint64_t base = substream_key(spec.seed, {purpose_tag(StreamPurpose::synthetic)});
  std::vector<Label> classes(spec.n, Label::large);
  std::fill_n(classes.begin(), n_small, Label::small);
  Stream class_stream(derive_key(base, 0));
  class_stream.shuffle(std::span<Label>(classes));

  std::vector<std::vector<double>> columns(schema.size(), std::vector<double>(spec.n));
  for (std::size_t p = 0; p < schema.size(); ++p) {
    Stream stream(derive_key(base, p + 1));
    const bool is_signal = p < spec.signal.size();
    const double effect = is_signal ? spec.signal[p].effect : 0.0;
    if (schema[p].kind == PredictorKind::categorical) {
      const std::size_t levels = schema[p].levels.size();
      std::vector<double> base_prob(levels, 1.0 / static_cast<double>(levels));
      if (is_signal && !spec.signal[p].weights.empty()) {
        const auto& w = spec.signal[p].weights;
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (std::size_t l = 0; l < levels; ++l) base_prob[l] = w[l] / total;
      }
      std::vector<double> small_prob(levels);
      for (std::size_t l = 0; l < levels; ++l) small_prob[l] = (1.0 - effect) * base_prob[l];
      small_prob[0] += effect;
      const auto draw = [&](const std::vector<double>& prob) {
        const double u = stream.uniform01();
        double cumulative = 0.0;
        for (std::size_t l = 0; l + 1 < levels; ++l) {
          cumulative += prob[l];
          if (u < cumulative) return static_cast<double>(l);
        }
        return static_cast<double>(levels - 1);
      };
      for (std::size_t i = 0; i < spec.n; ++i) {
        columns[p][i] = draw(classes[i] == Label::small ? small_prob : base_prob);
      }
    } else {
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double shift = classes[i] == Label::small ? effect : 0.0;
        columns[p][i] = stream.normal() + shift;
      }
    }
  }
  return Dataset(std::move(schema), spec.class_name, spec.labels, std::move(columns), std::move(classes));
}

}  // namespace reprindt
