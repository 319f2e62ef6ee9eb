#include "reprindt/sampling.hpp"

#include <algorithm>
#include <span>

#include "reprindt/error.hpp"
#include "reprindt/rng.hpp"
#include "reprindt/rounding.hpp"

namespace reprindt {

namespace {

bool valid_fraction(double p) { return p > 0.0 && p <= 1.0; }

// Uniform k-subset of `pool` without replacement, appended to `out`.
void take_subset(std::vector<std::size_t> pool, std::size_t k, Stream& stream, std::vector<std::size_t>& out) {
  stream.partial_shuffle(std::span<std::size_t>(pool), k);
  out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
}

std::vector<std::size_t> rows_of_class(const Dataset& data, Label label) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.label(i) == label) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> draw_unstratified(const Dataset& data, const SamplingPlan& plan, std::uint64_t key) {
  const ClassCounts targets = unstratified_targets(data, plan.psmall, plan.plarge);
  std::vector<std::size_t> rows;
  rows.reserve(targets.small + targets.large);
  Stream small_stream(derive_key(key, 0));
  Stream large_stream(derive_key(key, 1));
  take_subset(rows_of_class(data, Label::small), targets.small, small_stream, rows);
  take_subset(rows_of_class(data, Label::large), targets.large, large_stream, rows);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

const char* to_string(StratificationKind kind) noexcept {
  switch (kind) {
    case StratificationKind::unstratified: return "unstratified";
    case StratificationKind::proportional: return "proportional";
    case StratificationKind::min_criterion: return "min_criterion";
  }
  return "unknown";
}

void validate_plan(const SamplingPlan& plan, const Dataset& data) {
  if (!valid_fraction(plan.psmall)) throw Error(ErrorCode::invalid_parameter, "psmall must lie in (0, 1]");
  if (!valid_fraction(plan.plarge)) throw Error(ErrorCode::invalid_parameter, "plarge must lie in (0, 1]");
  if (plan.mode.kind == StratificationKind::unstratified) return;
  if (plan.mode.predictor >= data.predictors()) {
    throw Error(ErrorCode::invalid_parameter, "stratifying predictor index out of range");
  }
  if (data.predictor(plan.mode.predictor).kind != PredictorKind::categorical) {
    throw Error(ErrorCode::invalid_parameter,
                "stratifying predictor '" + data.predictor(plan.mode.predictor).name + "' must be categorical");
  }
  if (plan.mode.kind == StratificationKind::min_criterion) {
    if (plan.mode.min_count < 1) throw Error(ErrorCode::invalid_parameter, "min_count must be at least 1");
    if (plan.mode.max_retries < 1) throw Error(ErrorCode::invalid_parameter, "max_retries must be at least 1");
  }
}

std::uint64_t sampling_stream_key(const SamplingPlan& plan, std::size_t repetition, std::size_t attempt) {
  return substream_key(plan.seed, {purpose_tag(StreamPurpose::sampling), plan.cell, repetition, attempt});
}

ClassCounts unstratified_targets(const Dataset& data, double psmall, double plarge) {
  return {round_half_up(psmall * static_cast<double>(data.n_small())),
          round_half_up(plarge * static_cast<double>(data.n_large()))};
}

double balance_ratio(double psmall, std::size_t n_small, std::size_t n_large) {
  return psmall * static_cast<double>(n_small) / static_cast<double>(n_large);
}

TrainingSet undersample(const Dataset& data, const SamplingPlan& plan, std::size_t repetition) {
  validate_plan(plan, data);
  const ClassCounts targets = unstratified_targets(data, plan.psmall, plan.plarge);
  if (targets.small == 0 || targets.large == 0) {
    throw Error(ErrorCode::empty_sample, "a class target rounds to zero rows");
  }
  TrainingSet set;
  set.plan = plan;
  set.repetition = repetition;
  set.attempts = 1;
  set.stream_key = sampling_stream_key(plan, repetition, 0);
  set.rows = draw_unstratified(data, plan, set.stream_key);
  return set;
}

TrainingSet undersample_proportional(const Dataset& data, const SamplingPlan& plan, std::size_t repetition) {
  validate_plan(plan, data);
  if (plan.mode.kind != StratificationKind::proportional) {
    throw Error(ErrorCode::invalid_parameter, "plan is not in proportional mode");
  }
  const std::size_t predictor = plan.mode.predictor;
  const std::size_t levels = data.predictor(predictor).levels.size();

  // strata[class][level]
  std::vector<std::vector<std::size_t>> strata[2];
  for (auto& per_class : strata) per_class.assign(levels, {});
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto level = static_cast<std::size_t>(data.value(predictor, i));
    strata[static_cast<int>(data.label(i))][level].push_back(i);
  }

  TrainingSet set;
  set.plan = plan;
  set.repetition = repetition;
  set.attempts = 1;
  set.stream_key = sampling_stream_key(plan, repetition, 0);
  for (int c = 0; c < 2; ++c) {
    const double fraction = c == 0 ? plan.psmall : plan.plarge;
    std::size_t taken = 0;
    for (std::size_t level = 0; level < levels; ++level) {
      const std::size_t k = round_half_up(fraction * static_cast<double>(strata[c][level].size()));
      Stream stream(derive_key(derive_key(set.stream_key, static_cast<std::uint64_t>(c)), level));
      take_subset(strata[c][level], k, stream, set.rows);
      taken += k;
    }
    if (taken == 0) {
      throw Error(ErrorCode::empty_sample,
                  std::string("every stratum of the ") + (c == 0 ? "small" : "large") + " class rounds to zero rows");
    }
  }
  std::sort(set.rows.begin(), set.rows.end());
  return set;
}

TrainingSet undersample_min_criterion(const Dataset& data, const SamplingPlan& plan, std::size_t repetition) {
  validate_plan(plan, data);
  if (plan.mode.kind != StratificationKind::min_criterion) {
    throw Error(ErrorCode::invalid_parameter, "plan is not in min_criterion mode");
  }
  const ClassCounts targets = unstratified_targets(data, plan.psmall, plan.plarge);
  if (targets.small == 0 || targets.large == 0) {
    throw Error(ErrorCode::empty_sample, "a class target rounds to zero rows");
  }
  const std::size_t predictor = plan.mode.predictor;
  const std::size_t levels = data.predictor(predictor).levels.size();

  TrainingSet set;
  set.plan = plan;
  set.repetition = repetition;
  std::vector<std::size_t> level_counts(levels);
  for (std::size_t attempt = 0; attempt < plan.mode.max_retries; ++attempt) {
    set.attempts = attempt + 1;
    set.stream_key = sampling_stream_key(plan, repetition, attempt);
    set.rows = draw_unstratified(data, plan, set.stream_key);
    std::fill(level_counts.begin(), level_counts.end(), 0);
    for (std::size_t row : set.rows) ++level_counts[static_cast<std::size_t>(data.value(predictor, row))];
    const bool meets_minimum = std::all_of(level_counts.begin(), level_counts.end(),
                                           [&](std::size_t count) { return count >= plan.mode.min_count; });
    if (meets_minimum) {
      set.status = SampleStatus::feasible;
      return set;
    }
  }
  set.status = SampleStatus::infeasible;
  return set;
}

TrainingSet draw_training_set(const Dataset& data, const SamplingPlan& plan, std::size_t repetition) {
  switch (plan.mode.kind) {
    case StratificationKind::unstratified: return undersample(data, plan, repetition);
    case StratificationKind::proportional: return undersample_proportional(data, plan, repetition);
    case StratificationKind::min_criterion: return undersample_min_criterion(data, plan, repetition);
  }
  throw Error(ErrorCode::invalid_parameter, "unknown sampling mode");
}

}  // namespace reprindt
