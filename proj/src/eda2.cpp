#include "scso/eda2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "scso/errors.hpp"

namespace scso {

Box Box::uniform(int dims, double lo, double hi) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(dims, lo);
  b.hi = Eigen::VectorXd::Constant(dims, hi);
  return b;
}

std::vector<int> select_truncation(const Eigen::VectorXd& fitness, double truncation) {
  const int n = static_cast<int>(fitness.size());
  const int keep = static_cast<int>(std::ceil(truncation * n));
  if (n == 0 || keep <= 0)
    throw EmptySelection("truncation selection kept no individuals");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness(a) < fitness(b); });
  order.resize(static_cast<std::size_t>(std::min(keep, n)));
  return order;
}

Eigen::VectorXd estimate_mean(const Eigen::MatrixXd& selected) {
  if (selected.rows() == 0)
    throw EmptySelection("cannot estimate a mean from zero points");
  return selected.colwise().mean();
}

Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& archive, const Eigen::VectorXd& mu_new,
                                    kernels::Exec mode) {
  if (archive.rows() == 0)
    throw EmptyArchive("cannot estimate a covariance from an empty archive");
  if (archive.cols() != mu_new.size())
    throw DimensionMismatch("archive has " + std::to_string(archive.cols()) +
                            " columns, mean has " + std::to_string(mu_new.size()));
  Eigen::MatrixXd sigma;
  kernels::covariance_matrix(archive, mu_new, sigma, mode);
  return sigma;
}

GaussianSampler make_sampler(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(mu.size());
  // max() keeps the ladder strictly positive for garbage (negative-trace)
  // inputs, which would otherwise loop forever on eps = 0.
  const double scale = std::max(sigma.trace() / static_cast<double>(n), 0.0) + 1.0;
  double eps = 1e-10 * scale;
  const double cap = 1e-2 * scale;
  while (true) {
    Eigen::MatrixXd reg = sigma;
    reg.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
      GaussianSampler s;
      s.mu = mu;
      s.chol_l = llt.matrixL();
      return s;
    }
    eps *= 10.0;
    if (eps > cap)
      throw CovarianceDegenerate("covariance not factorizable below ridge cap");
  }
}

Eigen::VectorXd sample_transform(const GaussianSampler& s, const Eigen::VectorXd& z,
                                 const Box& bounds) {
  Eigen::VectorXd x = s.mu + s.chol_l * z;
  return x.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
}

Eigen::VectorXd sample_one(const GaussianSampler& s, Rng& rng, const Box& bounds) {
  Eigen::VectorXd z(s.mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return sample_transform(s, z, bounds);
}

Eda2::Eda2(const Eda2Config& config, const Box& bounds, Rng& rng)
    : config_(config), bounds_(bounds), rng_(&rng) {
  const int n = bounds_.dims();
  population_.resize(config_.population, n);
  for (Eigen::Index i = 0; i < population_.rows(); ++i)
    for (Eigen::Index c = 0; c < n; ++c)
      population_(i, c) = rng_->uniform(bounds_.lo(c), bounds_.hi(c));
}

const Eigen::MatrixXd& Eda2::ask() { return population_; }

void Eda2::tell(const Eigen::VectorXd& fitness) {
  if (fitness.size() != population_.rows())
    throw DimensionMismatch("got " + std::to_string(fitness.size()) + " fitness values for " +
                            std::to_string(population_.rows()) + " individuals");

  for (Eigen::Index i = 0; i < fitness.size(); ++i) {
    if (!have_best_ || fitness(i) < best_value_) {
      have_best_ = true;
      best_value_ = fitness(i);
      best_point_ = population_.row(i);
    }
  }

  const std::vector<int> sel = select_truncation(fitness, config_.truncation);
  Eigen::MatrixXd selected(static_cast<Eigen::Index>(sel.size()), population_.cols());
  for (std::size_t k = 0; k < sel.size(); ++k)
    selected.row(static_cast<Eigen::Index>(k)) = population_.row(sel[k]);

  selected_window_.push_back(std::move(selected));
  while (static_cast<int>(selected_window_.size()) > config_.archive_length + 1)
    selected_window_.pop_front();

  const Eigen::VectorXd mu = estimate_mean(selected_window_.back());

  Eigen::Index rows = 0;
  for (const auto& s : selected_window_) rows += s.rows();
  Eigen::MatrixXd archive(rows, population_.cols());
  Eigen::Index at = 0;
  for (const auto& s : selected_window_) {
    archive.middleRows(at, s.rows()) = s;
    at += s.rows();
  }

  const Eigen::MatrixXd sigma = estimate_covariance(archive, mu);
  const GaussianSampler sampler = make_sampler(mu, sigma);

  // Elitism: the incumbent rides along in row 0 of the next population.
  population_.row(0) = best_point_;
  for (Eigen::Index i = 1; i < population_.rows(); ++i)
    population_.row(i) = sample_one(sampler, *rng_, bounds_);
  ++generation_;
}

Eda2Result run_eda2(const BatchObjective& objective, const Box& bounds, const Eda2Config& config,
                    Rng& rng) {
  Eda2 driver(config, bounds, rng);
  Eda2Result res;
  Eigen::VectorXd fitness;
  for (int gen = 0; gen <= config.max_iterations; ++gen) {
    objective.evaluate(driver.ask(), fitness);
    driver.tell(fitness);
    res.history.push_back(driver.best_value());
  }
  res.best_point = driver.best_point();
  res.best_value = driver.best_value();
  return res;
}

}  // namespace scso
