// Serial reference against the OpenMP kernels: grid evaluation and ensemble
// importance on a 6146-row synthetic dataset. Prints timings and checks
// that both paths agree.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "reprindt/engine.hpp"
#include "reprindt/importance.hpp"

using namespace reprindt;

namespace {

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same(const std::vector<CellResult>& a, const std::vector<CellResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].status != b[c].status || !(a[c].best_tree == b[c].best_tree) || !(a[c].ensemble == b[c].ensemble)) {
      return false;
    }
    if (a[c].best.size() != b[c].best.size()) return false;
    for (std::size_t i = 0; i < a[c].best.size(); ++i) {
      if (!(a[c].best[i].tree == b[c].best[i].tree)) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t repetitions = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  SyntheticSpec spec;
  spec.n = 6146;
  spec.imbalance = 528.0 / 5618.0;
  spec.signal = {{{"PRN", PredictorKind::categorical, {"I", "you", "he", "she", "we", "they"}}, 0.4, {}},
                 {{"MLU", PredictorKind::numeric, {}}, 0.6, {}},
                 {{"AGE", PredictorKind::categorical, {"2-3", "4-5", "6-7", "8-12"}}, 0.15, {}}};
  spec.noise_predictors = 2;
  const Dataset data = generate_synthetic(spec);

  GridSpec grid;
  grid.repetitions = repetitions;
  grid.tree.permutations = 999;

  std::vector<CellResult> serial, parallel;
  const double t_serial = seconds([&] { serial = run_grid_serial(data, grid); });
  const double t_parallel = seconds([&] { parallel = run_grid(data, grid, threads); });
  const bool grid_ok = same(serial, parallel);
  std::printf("grid        %zu cells x %zu reps  serial %.3f s  parallel(%d) %.3f s  speedup %.2f  %s\n",
              serial.size(), repetitions, t_serial, threads, t_parallel, t_serial / t_parallel,
              grid_ok ? "identical" : "MISMATCH");

  const auto pooled = pool_best_trees(serial, grid.k_best);
  ImportanceOptions options;
  options.threads = threads;
  options.permutation_repeats = 5;
  ImportanceReport a, b;
  const double i_serial = seconds([&] { a = ensemble_importance_serial(pooled.trees, data, 1, pooled.missing, options); });
  const double i_parallel = seconds([&] { b = ensemble_importance(pooled.trees, data, 1, pooled.missing, options); });
  bool importance_ok = true;
  for (std::size_t p = 0; p < a.predictors.size(); ++p) {
    importance_ok = importance_ok && a.predictors[p].mean_loss == b.predictors[p].mean_loss;
  }
  std::printf("importance  %zu trees x %zu predictors  serial %.3f s  parallel(%d) %.3f s  speedup %.2f  %s\n",
              pooled.trees.size(), a.predictors.size(), i_serial, threads, i_parallel, i_serial / i_parallel,
              importance_ok ? "identical" : "MISMATCH");
  return grid_ok && importance_ok ? 0 : 1;
}
