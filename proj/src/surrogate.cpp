#include "scso/surrogate.hpp"

#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "scso/errors.hpp"

namespace scso {

namespace {

// Collapses rows equal within 1e-9 (max norm) onto their first occurrence,
// averaging the values of each duplicate cluster.
void deduplicate(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                 Eigen::MatrixXd& uniq, Eigen::VectorXd& vals) {
  const Eigen::Index k = points.rows();
  std::vector<Eigen::Index> rep;           // row index of each kept point
  std::vector<double> sum;
  std::vector<int> count;
  for (Eigen::Index i = 0; i < k; ++i) {
    bool merged = false;
    for (std::size_t u = 0; u < rep.size(); ++u) {
      if ((points.row(i) - points.row(rep[u])).cwiseAbs().maxCoeff() < 1e-9) {
        sum[u] += values(i);
        ++count[u];
        merged = true;
        break;
      }
    }
    if (!merged) {
      rep.push_back(i);
      sum.push_back(values(i));
      count.push_back(1);
    }
  }
  uniq.resize(static_cast<Eigen::Index>(rep.size()), points.cols());
  vals.resize(static_cast<Eigen::Index>(rep.size()));
  for (std::size_t u = 0; u < rep.size(); ++u) {
    uniq.row(static_cast<Eigen::Index>(u)) = points.row(rep[u]);
    vals(static_cast<Eigen::Index>(u)) = sum[u] / count[u];
  }
}

}  // namespace

RbfModel train_rbf(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                   kernels::Exec mode) {
  if (points.rows() != values.size())
    throw DimensionMismatch("got " + std::to_string(points.rows()) + " points but " +
                            std::to_string(values.size()) + " values");

  Eigen::MatrixXd pts;
  Eigen::VectorXd f;
  deduplicate(points, values, pts, f);

  const Eigen::Index k = pts.rows();
  const Eigen::Index n = pts.cols();
  if (k < n + 2)
    throw TooFewPoints("need at least " + std::to_string(n + 2) + " distinct points in " +
                       std::to_string(n) + " dimensions, have " + std::to_string(k));

  Eigen::MatrixXd phi;
  kernels::cubic_kernel_matrix(pts, phi, mode);

  const Eigen::Index dim = k + n + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  a.topLeftCorner(k, k) = phi;
  a.block(0, k, k, n) = pts;
  a.block(0, k + n, k, 1).setOnes();
  a.block(k, 0, n, k) = pts.transpose();
  a.block(k + n, 0, 1, k).setOnes();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs.head(k) = f;

  const double scale = phi.cwiseAbs().mean() + 1.0;

  RbfModel model;
  model.centers = pts;

  // Ridge ladder: exact system first, then escalating regularization of the
  // kernel block until interpolation at the centers holds.
  double lambda = 0.0;
  while (true) {
    Eigen::MatrixXd areg = a;
    if (lambda > 0.0)
      areg.topLeftCorner(k, k).diagonal().array() += lambda * scale;

    const Eigen::VectorXd sol = areg.partialPivLu().solve(rhs);
    model.w = sol.head(k);
    model.beta = sol.segment(k, n);
    model.alpha = sol(k + n);

    bool ok = sol.allFinite();
    if (ok) {
      Eigen::VectorXd at_centers;
      predict_batch(model, pts, at_centers, mode);
      for (Eigen::Index i = 0; i < k && ok; ++i)
        ok = std::abs(at_centers(i) - f(i)) <= 1e-6 * (std::abs(f(i)) + 1.0);
    }
    if (ok) return model;

    if (lambda == 0.0)
      lambda = 1e-10;
    else
      lambda *= 10.0;
    if (lambda > 1e-4)
      throw SingularSystem("interpolation system still singular at ridge 1e-4");
  }
}

double predict(const RbfModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.centers.cols())
    throw DimensionMismatch("query has " + std::to_string(x.size()) + " dims, model has " +
                            std::to_string(model.centers.cols()));
  Eigen::VectorXd out;
  kernels::rbf_eval_batch(model.centers, model.w, model.beta, model.alpha, x.transpose(), out,
                          kernels::Exec::Serial);
  return out(0);
}

void predict_batch(const RbfModel& model, const Eigen::MatrixXd& x, Eigen::VectorXd& out,
                   kernels::Exec mode) {
  if (x.cols() != model.centers.cols())
    throw DimensionMismatch("queries have " + std::to_string(x.cols()) + " dims, model has " +
                            std::to_string(model.centers.cols()));
  kernels::rbf_eval_batch(model.centers, model.w, model.beta, model.alpha, x, out, mode);
}

}  // namespace scso
