#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "reprindt/data.hpp"

namespace reprindt {

enum class StratificationKind : std::uint8_t { unstratified, proportional, min_criterion };

const char* to_string(StratificationKind kind) noexcept;

struct SamplingMode {
  StratificationKind kind = StratificationKind::unstratified;
  std::size_t predictor = 0;    // stratifying predictor (proportional, min_criterion)
  std::size_t min_count = 1;    // min_criterion only
  std::size_t max_retries = 10; // total attempts, min_criterion only

  static SamplingMode unstratified() { return {}; }
  static SamplingMode proportional(std::size_t predictor) {
    return {StratificationKind::proportional, predictor, 1, 10};
  }
  static SamplingMode min_criterion(std::size_t predictor, std::size_t min_count, std::size_t max_retries = 10) {
    return {StratificationKind::min_criterion, predictor, min_count, max_retries};
  }

  bool operator==(const SamplingMode&) const = default;
};

struct SamplingPlan {
  double psmall = 1.0;
  double plarge = 0.1;
  SamplingMode mode;
  std::uint64_t seed = 0;
  std::size_t cell = 0;  // grid cell index; part of the stream derivation

  bool operator==(const SamplingPlan&) const = default;
};

// Throws InvalidParameter on fractions outside (0, 1], min_count or
// max_retries of zero, or a stratifying predictor that is missing or numeric.
void validate_plan(const SamplingPlan& plan, const Dataset& data);

enum class SampleStatus : std::uint8_t { feasible, infeasible };

struct TrainingSet {
  std::vector<std::size_t> rows;  // ascending dataset row indices, no duplicates
  SamplingPlan plan;
  std::size_t repetition = 0;
  std::size_t attempts = 0;       // draws consumed (min_criterion may redraw)
  SampleStatus status = SampleStatus::feasible;
  std::uint64_t stream_key = 0;   // key of the accepted (or last) draw

  bool feasible() const noexcept { return status == SampleStatus::feasible; }
};

// Stream for (plan.seed, plan.cell, repetition, attempt).
std::uint64_t sampling_stream_key(const SamplingPlan& plan, std::size_t repetition, std::size_t attempt);

// Target rows per class under round-half-up.
ClassCounts unstratified_targets(const Dataset& data, double psmall, double plarge);

TrainingSet undersample(const Dataset& data, const SamplingPlan& plan, std::size_t repetition);
TrainingSet undersample_proportional(const Dataset& data, const SamplingPlan& plan, std::size_t repetition);
TrainingSet undersample_min_criterion(const Dataset& data, const SamplingPlan& plan, std::size_t repetition);

// Dispatches on plan.mode.kind.
TrainingSet draw_training_set(const Dataset& data, const SamplingPlan& plan, std::size_t repetition);

// psmall * n_small / n_large: the large-class fraction that would match the
// small-class subsample in size.
double balance_ratio(double psmall, std::size_t n_small, std::size_t n_large);

}  // namespace reprindt
