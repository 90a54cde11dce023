#include "scso/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scso::kernels {

namespace {

inline double cubic_dist(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                         Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    s += d * d;
  }
  const double r = std::sqrt(s);
  return r * r * r;
}

}  // namespace

void cubic_kernel_matrix(const Eigen::MatrixXd& points, Eigen::MatrixXd& phi, Exec mode) {
  const Eigen::Index k = points.rows();
  phi.resize(k, k);
  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index i = 0; i < k; ++i) {
      phi(i, i) = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (j == i) continue;
        phi(i, j) = cubic_dist(points, i, points, j);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < k; ++i) {
      phi(i, i) = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (j == i) continue;
        phi(i, j) = cubic_dist(points, i, points, j);
      }
    }
  }
}

void rbf_eval_batch(const Eigen::MatrixXd& centers, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& beta, double alpha, const Eigen::MatrixXd& x,
                    Eigen::VectorXd& out, Exec mode) {
  const Eigen::Index m = x.rows();
  out.resize(m);
  auto eval_one = [&](Eigen::Index i) {
    double acc = alpha;
    for (Eigen::Index j = 0; j < centers.rows(); ++j)
      acc += w(j) * cubic_dist(x, i, centers, j);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      acc += beta(c) * x(i, c);
    out(i) = acc;
  };
  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index i = 0; i < m; ++i) eval_one(i);
  } else {
    for (Eigen::Index i = 0; i < m; ++i) eval_one(i);
  }
}

void covariance_matrix(const Eigen::MatrixXd& h, const Eigen::VectorXd& mu,
                       Eigen::MatrixXd& sigma, Exec mode) {
  const Eigen::Index n = h.cols();
  const Eigen::Index rows = h.rows();
  sigma.resize(n, n);
  const double inv = rows > 0 ? 1.0 / static_cast<double>(rows) : 0.0;
  // One (a, b) entry per task; the sum over rows stays in row order so the
  // result does not depend on the thread count.
  auto entry = [&](Eigen::Index a, Eigen::Index b) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r)
      acc += (h(r, a) - mu(a)) * (h(r, b) - mu(b));
    return acc * inv;
  };
  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) {
        const double v = entry(a, b);
        sigma(a, b) = v;
        sigma(b, a) = v;
      }
  } else {
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) {
        const double v = entry(a, b);
        sigma(a, b) = v;
        sigma(b, a) = v;
      }
  }
}

}  // namespace scso::kernels
