#pragma once

#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scso/kernels.hpp"
#include "scso/rng.hpp"
#include "scso/surrogate.hpp"

namespace scso {

struct Eda2Config {
  int population = 200;
  int archive_length = 10;    // how many past selected sets join the current one
  int max_iterations = 100;
  double truncation = 0.30;   // selected fraction, ceil(truncation * population)
};

/// Axis-aligned box the search is confined to.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box uniform(int dims, double lo, double hi);
  int dims() const { return static_cast<int>(lo.size()); }
};

/// Indices of the ceil(truncation * n) lowest-fitness individuals, best
/// first; equal fitness keeps insertion order.
std::vector<int> select_truncation(const Eigen::VectorXd& fitness, double truncation);

/// Maximum-likelihood mean of the selected rows.
Eigen::VectorXd estimate_mean(const Eigen::MatrixXd& selected);

/// Covariance of the archive rows centered at the freshly estimated mean
/// (not the archive's own mean), divisor = number of rows. Centering at the
/// new mean stretches the model along the direction the mean just moved.
Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& archive, const Eigen::VectorXd& mu_new,
                                    kernels::Exec mode = kernels::Exec::Parallel);

/// Gaussian sampler mu + L z with L from a Cholesky factorization of
/// sigma + eps I, eps escalated from 1e-10 x scale until the factorization
/// succeeds (CovarianceDegenerate past 1e-2 x scale).
struct GaussianSampler {
  Eigen::VectorXd mu;
  Eigen::MatrixXd chol_l;
};

GaussianSampler make_sampler(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// mu + L z, then clamped into the box.
Eigen::VectorXd sample_transform(const GaussianSampler& s, const Eigen::VectorXd& z,
                                 const Box& bounds);
Eigen::VectorXd sample_one(const GaussianSampler& s, Rng& rng, const Box& bounds);

/// Batch cost function: fills out(i) for every row of pts.
class BatchObjective {
 public:
  virtual ~BatchObjective() = default;
  virtual void evaluate(const Eigen::MatrixXd& pts, Eigen::VectorXd& out) const = 0;
};

/// Surrogate-backed objective, evaluated with the parallel kernel.
class RbfObjective : public BatchObjective {
 public:
  explicit RbfObjective(RbfModel model, kernels::Exec mode = kernels::Exec::Parallel)
      : model_(std::move(model)), mode_(mode) {}
  void evaluate(const Eigen::MatrixXd& pts, Eigen::VectorXd& out) const override {
    predict_batch(model_, pts, out, mode_);
  }

 private:
  RbfModel model_;
  kernels::Exec mode_;
};

class FunctionObjective : public BatchObjective {
 public:
  explicit FunctionObjective(std::function<double(const Eigen::VectorXd&)> f) : f_(std::move(f)) {}
  void evaluate(const Eigen::MatrixXd& pts, Eigen::VectorXd& out) const override {
    out.resize(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) out(i) = f_(pts.row(i));
  }

 private:
  std::function<double(const Eigen::VectorXd&)> f_;
};

/// Ask/tell driver. ask() hands out the population to evaluate; tell()
/// consumes the fitness vector, refits the Gaussian model from the selected
/// sets of the last archive_length + 1 generations, and prepares the next
/// population with the incumbent injected in row 0.
class Eda2 {
 public:
  Eda2(const Eda2Config& config, const Box& bounds, Rng& rng);

  const Eigen::MatrixXd& ask();
  void tell(const Eigen::VectorXd& fitness);

  int generation() const { return generation_; }
  const Eigen::VectorXd& best_point() const { return best_point_; }
  double best_value() const { return best_value_; }

 private:
  Eda2Config config_;
  Box bounds_;
  Rng* rng_;
  Eigen::MatrixXd population_;
  std::deque<Eigen::MatrixXd> selected_window_;  // most recent last
  Eigen::VectorXd best_point_;
  double best_value_ = 0.0;
  int generation_ = 0;
  bool have_best_ = false;
};

struct Eda2Result {
  Eigen::VectorXd best_point;
  double best_value = 0.0;
  std::vector<double> history;  // best value after each generation, initial included
};

/// Runs the configured number of iterations of the full loop against a
/// batch objective. max_iterations = 0 evaluates only the initial
/// population.
Eda2Result run_eda2(const BatchObjective& objective, const Box& bounds, const Eda2Config& config,
                    Rng& rng);

}  // namespace scso
