#pragma once

#include <Eigen/Dense>

#include "scso/kernels.hpp"

namespace scso {

/// Cubic radial-basis interpolant with a linear tail:
///   s(x) = sum_j w_j ||x - c_j||^3 + beta . x + alpha.
/// The weights satisfy sum_j w_j = 0 and sum_j w_j c_j = 0, which pins the
/// linear part and makes the model reproduce affine functions exactly.
struct RbfModel {
  Eigen::MatrixXd centers;  // one row per (deduplicated) training point
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
  double alpha = 0.0;

  int dims() const { return static_cast<int>(centers.cols()); }
};

/// Fits the interpolant through (points, values); one row of `points` per
/// sample. Exact duplicate rows are collapsed to their first occurrence with
/// the duplicate values averaged. Throws TooFewPoints when fewer than
/// dims + 2 distinct points remain, and SingularSystem when the linear
/// system stays unsolvable after ridge escalation.
RbfModel train_rbf(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                   kernels::Exec mode = kernels::Exec::Parallel);

double predict(const RbfModel& model, const Eigen::VectorXd& x);

void predict_batch(const RbfModel& model, const Eigen::MatrixXd& x, Eigen::VectorXd& out,
                   kernels::Exec mode = kernels::Exec::Parallel);

}  // namespace scso
