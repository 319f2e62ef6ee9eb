#include "reprindt/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "reprindt/error.hpp"

namespace reprindt {

std::string format_decimal(double value, int digits) {
  if (!std::isfinite(value)) throw Error(ErrorCode::invalid_value, "cannot format a non-finite value");
  constexpr int kGuardDigits = 12;
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", kGuardDigits, std::fabs(value));
  std::string text(buffer);
  const std::size_t dot = text.find('.');
  std::string integral = text.substr(0, dot);
  std::string fraction = text.substr(dot + 1);
  const bool round_up = fraction[static_cast<std::size_t>(digits)] >= '5';
  fraction.resize(static_cast<std::size_t>(digits));
  std::string all = integral + fraction;
  if (round_up) {
    std::size_t i = all.size();
    while (i > 0) {
      --i;
      if (all[i] == '9') {
        all[i] = '0';
      } else {
        ++all[i];
        break;
      }
      if (i == 0) all.insert(all.begin(), '1');
    }
  }
  const std::size_t int_len = all.size() - static_cast<std::size_t>(digits);
  std::string out = all.substr(0, int_len);
  if (digits > 0) out += "." + all.substr(int_len);
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  if (value < 0.0 && !zero) out.insert(out.begin(), '-');
  return out;
}

std::string format_fraction(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

namespace {

std::string accuracy_cell(const CellResult& result, double value) {
  return result.status == CellStatus::feasible ? format_accuracy(value) : "0.0";
}

}  // namespace

void write_grid_table(std::ostream& out, std::span<const ModeRun> runs, GridTable which) {
  if (runs.empty()) return;
  out << "plarge\tpsmall";
  for (const auto& run : runs) {
    out << '\t' << run.name << "_acc_large\t" << run.name << "_acc_small\t" << run.name << "_balanced\t" << run.name
        << "_status";
  }
  out << '\n';
  const std::size_t cells = runs.front().results.size();
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& first = runs.front().results[c];
    out << format_fraction(first.cell.plarge) << '\t' << format_fraction(first.cell.psmall);
    for (const auto& run : runs) {
      const CellResult& r = run.results.at(c);
      const AccuracyTriple& t = which == GridTable::best_tree ? r.best_tree : r.ensemble;
      out << '\t' << accuracy_cell(r, t.acc_large) << '\t' << accuracy_cell(r, t.acc_small) << '\t'
          << accuracy_cell(r, t.balanced) << '\t' << to_string(r.status);
    }
    out << '\n';
  }
}

void write_threshold_table(std::ostream& out, std::span<const double> thresholds, std::span<const ThresholdRow> rows) {
  out << "model\tpsmall\tplarge";
  for (double t : thresholds) out << '\t' << format_fraction(t);
  out << '\n';
  for (const auto& row : rows) {
    out << row.model << '\t' << row.psmall << '\t' << row.plarge;
    for (const auto& triple : row.triples) out << '\t' << (row.feasible ? format_accuracy(triple.balanced) : "0.0");
    out << '\n';
  }
}

void write_importance_table(std::ostream& out, std::span<const ModeRun> runs) {
  out << "mode\tpredictor\tmean_loss\tnormalized_pct\ttrees\tzero_filled\n";
  for (const auto& run : runs) {
    if (!run.importance) continue;
    for (const auto& p : run.importance->predictors) {
      out << run.name << '\t' << p.name << '\t' << format_decimal(p.mean_loss, 4) << '\t'
          << (p.normalized ? format_decimal(*p.normalized, 2) : std::string("NA")) << '\t'
          << run.importance->tree_count << '\t' << run.importance->zero_filled << '\n';
    }
  }
}

}  // namespace reprindt
