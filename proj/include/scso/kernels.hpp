#pragma once

#include <Eigen/Dense>

namespace scso::kernels {

/// Execution mode for the data-parallel kernels. Serial is the reference
/// implementation the parallel path is tested against; both orders the
/// floating-point work identically per output entry, so results are
/// bit-identical across modes and thread counts.
enum class Exec { Serial, Parallel };

/// phi(i, j) = ||x_i - x_j||^3 over the rows of `points`.
void cubic_kernel_matrix(const Eigen::MatrixXd& points, Eigen::MatrixXd& phi, Exec mode);

/// out(i) = sum_j w(j) ||x_i - c_j||^3 + beta . x_i + alpha, rows of `x`.
void rbf_eval_batch(const Eigen::MatrixXd& centers, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& beta, double alpha, const Eigen::MatrixXd& x,
                    Eigen::VectorXd& out, Exec mode);

/// sigma = (1/rows) sum_r (h_r - mu)(h_r - mu)^T over the rows of `h`.
/// Each output entry is a serial sum in row order.
void covariance_matrix(const Eigen::MatrixXd& h, const Eigen::VectorXd& mu,
                       Eigen::MatrixXd& sigma, Exec mode);

}  // namespace scso::kernels
