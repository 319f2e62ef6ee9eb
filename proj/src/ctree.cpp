#include "reprindt/ctree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "reprindt/error.hpp"
#include "reprindt/rng.hpp"

namespace reprindt {

namespace {

constexpr std::uint64_t kFullSampleTag = 0x46554c4c;

struct Candidate {
  std::size_t predictor = 0;
  double p_adjusted = 1.0;
  double statistic = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const CtreeSettings& settings) : data_(data), settings_(settings) {}

  std::vector<Node> build(std::vector<std::size_t> rows, std::uint64_t key) {
    grow(std::move(rows), key, 0);
    return std::move(nodes_);
  }

 private:
  std::size_t grow(std::vector<std::size_t> rows, std::uint64_t key, std::size_t depth) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    Node& node = nodes_.back();
    node.n = rows.size();
    node.n_small = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return data_.label(r) == Label::small; }));

    if (node.n < settings_.min_split || node.n_small == 0 || node.n_small == node.n) return index;
    if (settings_.max_depth && depth >= *settings_.max_depth) return index;

    auto chosen = choose_split(rows, key);
    if (!chosen) return index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      (chosen->split.goes_left(data_.value(chosen->split.predictor, r)) ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[index].split = std::move(chosen->split);
    nodes_[index].p_value = chosen->p_adjusted;
    nodes_[index].statistic = chosen->statistic;
    const std::size_t left = grow(std::move(left_rows), derive_key(key, 1), depth + 1);
    const std::size_t right = grow(std::move(right_rows), derive_key(key, 2), depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  struct Chosen {
    Split split;
    double p_adjusted;
    double statistic;
  };

  std::optional<Chosen> choose_split(const std::vector<std::size_t>& rows, std::uint64_t key) {
    const std::size_t n = rows.size();
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = data_.label(rows[i]);

    // Gather node values; predictors with a single distinct value are not tested.
    std::vector<std::vector<double>> values;
    std::vector<std::size_t> tested;
    for (std::size_t p = 0; p < data_.predictors(); ++p) {
      std::vector<double> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = data_.value(p, rows[i]);
      if (std::all_of(column.begin(), column.end(), [&](double v) { return v == column[0]; })) continue;
      values.push_back(std::move(column));
      tested.push_back(p);
    }
    if (tested.empty()) return std::nullopt;

    std::vector<TestColumn> columns;
    for (std::size_t t = 0; t < tested.size(); ++t) {
      const auto& spec = data_.predictor(tested[t]);
      columns.push_back({spec.kind, values[t], spec.levels.size()});
    }
    const double m = static_cast<double>(tested.size());
    TestOptions options;
    options.permutations = settings_.permutations;
    options.mode = settings_.pvalue_mode;
    options.exact_limit = settings_.exact_limit;
    options.p_ceiling = settings_.alpha / m;
    Stream stream(key);
    const auto outcomes = permutation_tests(columns, labels, options, stream);

    std::vector<Candidate> significant;
    for (std::size_t t = 0; t < tested.size(); ++t) {
      if (!outcomes[t].testable) continue;
      const double adjusted = std::min(1.0, m * outcomes[t].p_value);
      if (adjusted < settings_.alpha) significant.push_back({tested[t], adjusted, outcomes[t].statistic});
    }
    // Most significant first; ties by larger statistic, then schema order.
    std::sort(significant.begin(), significant.end(), [](const Candidate& a, const Candidate& b) {
      if (a.p_adjusted != b.p_adjusted) return a.p_adjusted < b.p_adjusted;
      if (a.statistic != b.statistic) return a.statistic > b.statistic;
      return a.predictor < b.predictor;
    });
    for (const auto& candidate : significant) {
      const auto t = static_cast<std::size_t>(std::find(tested.begin(), tested.end(), candidate.predictor) - tested.begin());
      auto split = data_.predictor(candidate.predictor).kind == PredictorKind::numeric
                       ? numeric_split(candidate.predictor, values[t], labels)
                       : categorical_split(candidate.predictor, values[t], labels);
      if (split) return Chosen{std::move(*split), candidate.p_adjusted, candidate.statistic};
    }
    return std::nullopt;
  }

  bool admissible(std::size_t left_n, std::size_t right_n) const {
    return left_n >= settings_.min_bucket && right_n >= settings_.min_bucket;
  }

  // Cutpoint maximizing the 2x2 chi-square; the smallest maximizer wins.
  std::optional<Split> numeric_split(std::size_t predictor, const std::vector<double>& x,
                                     const std::vector<Label>& labels) const {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const auto total_small = static_cast<double>(std::count(labels.begin(), labels.end(), Label::small));

    std::optional<Split> best;
    double best_stat = -1.0;
    double left_small = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (labels[order[i]] == Label::small) left_small += 1.0;
      if (x[order[i]] == x[order[i + 1]]) continue;
      const std::size_t left_n = i + 1;
      if (!admissible(left_n, n - left_n)) continue;
      const double stat = chi_square_2x2(static_cast<double>(left_n), left_small,
                                         static_cast<double>(n - left_n), total_small - left_small);
      if (stat > best_stat) {
        best_stat = stat;
        best = Split{predictor, PredictorKind::numeric, x[order[i]], {}};
      }
    }
    return best;
  }

  std::optional<Split> categorical_split(std::size_t predictor, const std::vector<double>& x,
                                         const std::vector<Label>& labels) const {
    const std::size_t n_levels = data_.predictor(predictor).levels.size();
    std::vector<std::size_t> level_n(n_levels, 0);
    std::vector<std::size_t> level_small(n_levels, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto l = static_cast<std::size_t>(x[i]);
      ++level_n[l];
      if (labels[i] == Label::small) ++level_small[l];
    }
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < n_levels; ++l) {
      if (level_n[l] > 0) present.push_back(l);
    }
    const std::size_t n = x.size();
    const std::size_t total_small = std::accumulate(level_small.begin(), level_small.end(), std::size_t{0});

    std::optional<std::vector<std::uint8_t>> best_left;  // over present levels
    double best_stat = -1.0;
    std::size_t best_left_n = 0;
    const auto consider = [&](const std::vector<std::uint8_t>& in_left) {
      std::size_t left_n = 0;
      std::size_t left_small = 0;
      for (std::size_t j = 0; j < present.size(); ++j) {
        if (in_left[j]) {
          left_n += level_n[present[j]];
          left_small += level_small[present[j]];
        }
      }
      if (!admissible(left_n, n - left_n)) return;
      const double stat = chi_square_2x2(static_cast<double>(left_n), static_cast<double>(left_small),
                                         static_cast<double>(n - left_n), static_cast<double>(total_small - left_small));
      if (stat > best_stat) {
        best_stat = stat;
        best_left = in_left;
        best_left_n = left_n;
      }
    };

    std::vector<std::uint8_t> in_left(present.size(), 0);
    if (present.size() <= settings_.max_exhaustive_levels) {
      // The first present level always goes left, so each binary partition
      // is visited once.
      const std::size_t free_levels = present.size() - 1;
      const std::uint64_t masks = (std::uint64_t{1} << free_levels) - 1;
      for (std::uint64_t mask = 0; mask < masks; ++mask) {
        in_left[0] = 1;
        for (std::size_t j = 0; j < free_levels; ++j) in_left[j + 1] = (mask >> j) & 1U;
        consider(in_left);
      }
    } else {
      std::vector<std::size_t> ranked(present.size());
      std::iota(ranked.begin(), ranked.end(), std::size_t{0});
      std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        // a_small / a_n < b_small / b_n without division
        return level_small[present[a]] * level_n[present[b]] < level_small[present[b]] * level_n[present[a]];
      });
      for (std::size_t cut = 1; cut < ranked.size(); ++cut) {
        std::fill(in_left.begin(), in_left.end(), 0);
        for (std::size_t j = 0; j < cut; ++j) in_left[ranked[j]] = 1;
        consider(in_left);
      }
    }
    if (!best_left) return std::nullopt;

    // Levels absent at this node follow the larger child (left on ties).
    const bool absent_left = best_left_n >= n - best_left_n;
    Split split{predictor, PredictorKind::categorical, 0.0, std::vector<std::uint8_t>(n_levels, absent_left ? 1 : 0)};
    for (std::size_t j = 0; j < present.size(); ++j) split.left_levels[present[j]] = (*best_left)[j];
    return split;
  }

  const Dataset& data_;
  const CtreeSettings& settings_;
  std::vector<Node> nodes_;
};

std::vector<NumericRange> domain_of(const Dataset& data) {
  std::vector<NumericRange> domain(data.predictors());
  for (std::size_t p = 0; p < data.predictors(); ++p) {
    const auto column = data.column(p);
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    domain[p] = {*lo, *hi};
  }
  return domain;
}

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string format_fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

void render(const Tree& tree, std::size_t index, std::size_t depth, std::ostringstream& out) {
  const Node& node = tree.nodes()[index];
  out << std::string(2 * depth, ' ') << '[' << index << "] ";
  if (node.is_leaf()) {
    out << "leaf (n=" << node.n << ", small=" << format_fixed(node.freq_small(), 6)
        << ", large=" << format_fixed(node.freq_large(), 6) << ")\n";
    return;
  }
  const Split& split = *node.split;
  const auto& spec = tree.schema()[split.predictor];
  out << spec.name;
  if (split.kind == PredictorKind::numeric) {
    out << " <= " << format_number(split.cutpoint);
  } else {
    out << " in {";
    bool first = true;
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
      if (!split.left_levels[l]) continue;
      out << (first ? "" : ", ") << spec.levels[l];
      first = false;
    }
    out << '}';
  }
  char p_text[32];
  std::snprintf(p_text, sizeof(p_text), "%.4g", node.p_value);
  out << " (n=" << node.n << ", small=" << format_fixed(node.freq_small(), 6) << ", p=" << p_text
      << ", statistic=" << format_fixed(node.statistic, 4) << ")\n";
  render(tree, node.left, depth + 1, out);
  render(tree, node.right, depth + 1, out);
}

}  // namespace

void validate_settings(const CtreeSettings& settings) {
  if (!(settings.alpha > 0.0 && settings.alpha <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "alpha must lie in (0, 1]");
  }
  if (settings.min_bucket < 1) throw Error(ErrorCode::invalid_parameter, "min_bucket must be at least 1");
  if (settings.min_split < 2) throw Error(ErrorCode::invalid_parameter, "min_split must be at least 2");
  if (settings.permutations < 1) throw Error(ErrorCode::invalid_parameter, "permutations must be at least 1");
  if (settings.max_exhaustive_levels < 2 || settings.max_exhaustive_levels > 20) {
    throw Error(ErrorCode::invalid_parameter, "max_exhaustive_levels must lie in [2, 20]");
  }
}

void validate_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "threshold must lie in (0, 1]");
  }
}

Tree::Tree(std::shared_ptr<const Schema> schema, std::vector<Node> nodes, CtreeSettings settings,
           TreeProvenance provenance, std::vector<NumericRange> domain)
    : schema_(std::move(schema)),
      nodes_(std::move(nodes)),
      settings_(settings),
      provenance_(provenance),
      domain_(std::move(domain)) {
  if (nodes_.empty()) throw Error(ErrorCode::invalid_parameter, "a tree needs at least one node");
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].split) {
      depth[nodes_[i].left] = depth[i] + 1;
      depth[nodes_[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

bool Tree::uses_predictor(std::size_t predictor) const {
  return std::any_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.split && n.split->predictor == predictor; });
}

std::size_t Tree::leaf_index(std::span<const double> row) const {
  if (row.size() != schema_->size()) {
    throw Error(ErrorCode::schema_mismatch, "row has " + std::to_string(row.size()) + " values, schema has " +
                                                std::to_string(schema_->size()));
  }
  for (std::size_t p = 0; p < row.size(); ++p) {
    const auto& spec = (*schema_)[p];
    const double v = row[p];
    if (spec.kind == PredictorKind::categorical) {
      if (!(v >= 0.0 && v < static_cast<double>(spec.levels.size()) && v == std::floor(v))) {
        throw Error(ErrorCode::unknown_level, "level code out of range for '" + spec.name + "'");
      }
    } else if (!std::isfinite(v)) {
      throw Error(ErrorCode::invalid_value, "non-finite value for '" + spec.name + "'");
    }
  }
  std::size_t node = 0;
  while (nodes_[node].split) {
    const Split& s = *nodes_[node].split;
    node = s.goes_left(row[s.predictor]) ? nodes_[node].left : nodes_[node].right;
  }
  return node;
}

bool Tree::operator==(const Tree& other) const {
  return *schema_ == *other.schema_ && nodes_ == other.nodes_ && settings_ == other.settings_ &&
         provenance_ == other.provenance_ && domain_ == other.domain_;
}

Tree fit_ctree(const Dataset& data, std::span<const std::size_t> rows, const CtreeSettings& settings,
               std::uint64_t stream_key, TreeProvenance provenance) {
  validate_settings(settings);
  std::size_t n_small = 0;
  for (std::size_t r : rows) {
    if (r >= data.rows()) throw Error(ErrorCode::invalid_parameter, "training row index out of range");
    if (data.label(r) == Label::small) ++n_small;
  }
  if (n_small == 0 || n_small == rows.size()) {
    throw Error(ErrorCode::degenerate_input, "training rows must contain both classes");
  }
  TreeBuilder builder(data, settings);
  auto nodes = builder.build(std::vector<std::size_t>(rows.begin(), rows.end()), stream_key);
  provenance.seed = stream_key;
  return Tree(data.shared_schema(), std::move(nodes), settings, provenance, domain_of(data));
}

Tree fit_ctree(const Dataset& data, const TrainingSet& training, const CtreeSettings& settings) {
  if (!training.feasible()) throw Error(ErrorCode::degenerate_input, "cannot fit on an infeasible training set");
  TreeProvenance provenance;
  provenance.cell = training.plan.cell;
  provenance.repetition = training.repetition;
  provenance.attempts = training.attempts;
  provenance.psmall = training.plan.psmall;
  provenance.plarge = training.plan.plarge;
  const std::uint64_t key = derive_key(training.stream_key, purpose_tag(StreamPurpose::tree));
  return fit_ctree(data, training.rows, settings, key, provenance);
}

Tree fit_ctree_full(const Dataset& data, const CtreeSettings& settings, std::uint64_t seed) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TreeProvenance provenance;
  provenance.full_sample = true;
  const std::uint64_t key = substream_key(seed, {purpose_tag(StreamPurpose::tree), kFullSampleTag});
  return fit_ctree(data, rows, settings, key, provenance);
}

LeafFrequencies leaf_frequencies(const Tree& tree, std::span<const double> row) {
  const Node& leaf = tree.nodes()[tree.leaf_index(row)];
  return {leaf.freq_small(), leaf.freq_large()};
}

Label predict(const Tree& tree, std::span<const double> row, double threshold) {
  validate_threshold(threshold);
  return label_for(leaf_frequencies(tree, row).small, threshold);
}

std::vector<double> small_frequencies(const Tree& tree, const ColumnView& columns) {
  std::vector<double> out(columns.rows());
  for (std::size_t i = 0; i < columns.rows(); ++i) out[i] = tree.nodes()[tree.leaf_index(columns, i)].freq_small();
  return out;
}

std::vector<Label> predict_all(const Tree& tree, const ColumnView& columns, double threshold) {
  validate_threshold(threshold);
  std::vector<Label> out(columns.rows());
  for (std::size_t i = 0; i < columns.rows(); ++i) {
    out[i] = label_for(tree.nodes()[tree.leaf_index(columns, i)].freq_small(), threshold);
  }
  return out;
}

std::string to_text(const Tree& tree) {
  std::ostringstream out;
  const auto& s = tree.settings();
  out << "ctree alpha=" << format_number(s.alpha) << " min_split=" << s.min_split << " min_bucket=" << s.min_bucket
      << " permutations=" << s.permutations << '\n';
  const auto& p = tree.provenance();
  if (p.full_sample) {
    out << "provenance full_sample\n";
  } else {
    out << "provenance cell=" << p.cell << " repetition=" << p.repetition << " attempts=" << p.attempts
        << " psmall=" << format_number(p.psmall) << " plarge=" << format_number(p.plarge) << '\n';
  }
  render(tree, 0, 0, out);
  return out.str();
}

}  // namespace reprindt
