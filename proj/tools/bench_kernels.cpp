#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Dense>

#include "scso/kernels.hpp"

using namespace scso;
using Clock = std::chrono::steady_clock;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> d(20.0, 50.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(gen);
  return m;
}

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-26s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n", name,
              1e3 * serial_s, 1e3 * parallel_s, serial_s / parallel_s,
              identical ? "bit-identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; both modes run serially\n");
#endif

  std::mt19937_64 gen(12345);
  const int reps = 5;
  bool all_identical = true;

  {
    const auto pts = random_matrix(600, 29, gen);
    Eigen::MatrixXd a, b;
    const double ts =
        best_of(reps, [&] { kernels::cubic_kernel_matrix(pts, a, kernels::Exec::Serial); });
    const double tp =
        best_of(reps, [&] { kernels::cubic_kernel_matrix(pts, b, kernels::Exec::Parallel); });
    const bool same = (a.array() == b.array()).all();
    all_identical = all_identical && same;
    report("kernel matrix 600x29", ts, tp, same);
  }

  {
    const auto centers = random_matrix(300, 29, gen);
    const auto x = random_matrix(5000, 29, gen);
    Eigen::VectorXd w = Eigen::VectorXd::Random(300);
    Eigen::VectorXd beta = Eigen::VectorXd::Random(29);
    Eigen::VectorXd a, b;
    const double ts = best_of(
        reps, [&] { kernels::rbf_eval_batch(centers, w, beta, 0.75, x, a, kernels::Exec::Serial); });
    const double tp = best_of(reps, [&] {
      kernels::rbf_eval_batch(centers, w, beta, 0.75, x, b, kernels::Exec::Parallel);
    });
    const bool same = (a.array() == b.array()).all();
    all_identical = all_identical && same;
    report("surrogate batch 5000x300", ts, tp, same);
  }

  {
    const auto h = random_matrix(4000, 29, gen);
    const Eigen::VectorXd mu = h.colwise().mean();
    Eigen::MatrixXd a, b;
    const double ts =
        best_of(reps, [&] { kernels::covariance_matrix(h, mu, a, kernels::Exec::Serial); });
    const double tp =
        best_of(reps, [&] { kernels::covariance_matrix(h, mu, b, kernels::Exec::Parallel); });
    const bool same = (a.array() == b.array()).all();
    all_identical = all_identical && same;
    report("covariance 4000x29", ts, tp, same);
  }

  return all_identical ? 0 : 1;
}
