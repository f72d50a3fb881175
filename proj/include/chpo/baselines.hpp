#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "chpo/problem.hpp"

namespace chpo {

/// N distinct uniform samples.
RunResult random_search(const ChpoProblem &problem, std::uint64_t seed);

struct GridPlan {
  std::vector<std::size_t> levels;
  std::vector<std::vector<ParamValue>> chosen_values;

  std::size_t size() const;
};

/// Start every dimension at floor(N^(1/n)) (at least 1), then upgrade
/// dimensions in index order to ceil(N^(1/n)) while the product stays <= N.
std::vector<std::size_t> grid_levels(std::size_t budget, std::size_t dimension);

/// Levels are additionally capped by each dimension's cardinality.
GridPlan make_grid_plan(const SearchSpace &space, std::size_t budget, Rng &rng);

/// Evaluates the Cartesian product of a random grid; may use fewer than N
/// evaluations, never more.
RunResult grid_search(const ChpoProblem &problem, std::uint64_t seed);

struct GpSettings {
  double length_scale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

/// Zero-mean GP with a squared-exponential kernel over normalized
/// coordinates.
class GpSurrogate {
public:
  explicit GpSurrogate(GpSettings settings = {}) : settings_(settings) {}

  /// Jitter escalates from 1e-8 to 1e-4 when the covariance is not positive
  /// definite; throws std::runtime_error past that.
  void fit(const std::vector<std::vector<double>> &x,
           const std::vector<double> &y);

  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };
  Prediction predict(const std::vector<double> &x) const;

  double kernel(const std::vector<double> &a,
                const std::vector<double> &b) const;
  double jitter() const noexcept { return jitter_; }

private:
  GpSettings settings_;
  std::vector<std::vector<double>> x_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Zero-mean, unit-variance copy of y (unit scale kept when y is constant).
std::vector<double> standardize(const std::vector<double> &y);

/// Expected improvement over `incumbent` for a maximization problem.
double expected_improvement(double mean, double variance, double incumbent);

struct BoSettings {
  GpSettings gp;
  std::size_t random_candidates = 1000;
  std::size_t local_candidates = 100;
  double local_sd = 0.1;
};

/// floor(N/2) uniform warm-start evaluations, then one EI-maximizing
/// evaluation per remaining unit of budget.
RunResult bayes_opt(const ChpoProblem &problem, std::uint64_t seed,
                    const BoSettings &settings = {});

} // namespace chpo
