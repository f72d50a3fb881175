#include "chpo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace chpo {

namespace {

enum StreamTag : std::uint64_t { kRandom = 11, kGrid = 12, kBayes = 13 };

// k^n, saturating above `cap`.
std::size_t power_capped(std::size_t k, std::size_t n, std::size_t cap) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (k != 0 && r > cap / k) return cap + 1;
    r *= k;
  }
  return r;
}

} // namespace

RunResult random_search(const ChpoProblem &problem, std::uint64_t seed) {
  RunRecorder recorder(problem);
  Rng rng(derive_seed(seed, kRandom));
  for (std::size_t i = 0; i < problem.budget; ++i) {
    const auto cfg = sample_novel(problem.space, rng,
                                  recorder.experience().configurations());
    recorder.evaluate(cfg, Phase::random, 0);
  }
  return recorder.finish();
}

std::size_t GridPlan::size() const {
  return std::accumulate(levels.begin(), levels.end(), std::size_t{1},
                         std::multiplies<>());
}

std::vector<std::size_t> grid_levels(std::size_t budget, std::size_t dimension) {
  if (dimension == 0) return {};
  std::size_t lo = 1;
  while (power_capped(lo + 1, dimension, budget) <= budget) ++lo;
  const std::size_t hi = power_capped(lo, dimension, budget) == budget ? lo
                                                                       : lo + 1;
  std::vector<std::size_t> levels(dimension, lo);
  std::size_t product = power_capped(lo, dimension, budget);
  for (std::size_t d = 0; d < dimension && hi > lo; ++d) {
    const std::size_t upgraded = product / lo * hi;
    if (upgraded > budget) break;
    levels[d] = hi;
    product = upgraded;
  }
  return levels;
}

GridPlan make_grid_plan(const SearchSpace &space, std::size_t budget,
                        Rng &rng) {
  GridPlan plan;
  plan.levels = grid_levels(budget, space.dimension());
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto &p = space.param(d);
    if (const auto card = p.cardinality()) {
      plan.levels[d] = std::min<std::size_t>(plan.levels[d], *card);
    }
    std::vector<ParamValue> values;
    switch (p.kind) {
    case ParamKind::categorical: {
      std::vector<std::size_t> idx(p.options.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t k = 0; k < plan.levels[d]; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
        std::swap(idx[k], idx[pick(rng)]);
        values.emplace_back(p.options[idx[k]]);
      }
      break;
    }
    case ParamKind::integer_range: {
      std::set<std::int64_t> seen;
      while (values.size() < plan.levels[d]) {
        const auto v = std::get<std::int64_t>(sample_value(p, rng));
        if (seen.insert(v).second) values.emplace_back(v);
      }
      break;
    }
    case ParamKind::real_range: {
      std::set<double> seen;
      while (values.size() < plan.levels[d]) {
        const auto v = std::get<double>(sample_value(p, rng));
        if (seen.insert(v).second) values.emplace_back(v);
      }
      break;
    }
    }
    plan.chosen_values.push_back(std::move(values));
  }
  return plan;
}

RunResult grid_search(const ChpoProblem &problem, std::uint64_t seed) {
  RunRecorder recorder(problem);
  Rng rng(derive_seed(seed, kGrid));
  const auto plan = make_grid_plan(problem.space, problem.budget, rng);
  const auto n = problem.space.dimension();
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    Configuration cfg;
    for (std::size_t d = 0; d < n; ++d) {
      cfg.values.push_back(plan.chosen_values[d][digit[d]]);
    }
    recorder.evaluate(cfg, Phase::grid, 0);
    // Odometer increment, last dimension fastest.
    for (std::size_t d = n; d-- > 0;) {
      if (++digit[d] < plan.levels[d]) break;
      digit[d] = 0;
    }
  }
  return recorder.finish();
}

double GpSurrogate::kernel(const std::vector<double> &a,
                           const std::vector<double> &b) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return settings_.signal_variance *
         std::exp(-0.5 * sq / (settings_.length_scale * settings_.length_scale));
}

void GpSurrogate::fit(const std::vector<std::vector<double>> &x,
                      const std::vector<double> &y) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("GP needs matching, non-empty x and y");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel(x[i], x[j]);
    }
  }
  k.diagonal().array() += settings_.noise_variance;
  Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(y.data(), n);

  for (double jitter = 0.0;;
       jitter = jitter == 0.0 ? 1e-8 : jitter * 10.0) {
    if (jitter > 1e-4 * 1.0000001) {
      throw std::runtime_error("GP covariance is singular even with jitter");
    }
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt_.compute(kj);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      break;
    }
  }
  x_ = x;
  alpha_ = llt_.solve(target);
}

GpSurrogate::Prediction GpSurrogate::predict(const std::vector<double> &x) const {
  const auto n = static_cast<Eigen::Index>(x_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x, x_[i]);
  Prediction p;
  p.mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  p.variance = std::max(settings_.signal_variance - v.squaredNorm(), 0.0);
  return p;
}

std::vector<double> standardize(const std::vector<double> &y) {
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / n);
  if (!(sd > 1e-12)) sd = 1.0;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - mean) / sd;
  return out;
}

double expected_improvement(double mean, double variance, double incumbent) {
  const double improvement = mean - incumbent;
  if (!(variance > 0.0)) return std::max(improvement, 0.0);
  const double sd = std::sqrt(variance);
  const double z = improvement / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(improvement * cdf + sd * pdf, 0.0);
}

RunResult bayes_opt(const ChpoProblem &problem, std::uint64_t seed,
                    const BoSettings &settings) {
  if (problem.budget < 2) {
    throw std::invalid_argument("Bayesian optimization needs a budget >= 2");
  }
  RunRecorder recorder(problem);
  const auto &space = problem.space;
  Rng rng(derive_seed(seed, kBayes));
  const auto warm = problem.budget / 2;
  for (std::size_t i = 0; i < warm; ++i) {
    const auto cfg =
        sample_novel(space, rng, recorder.experience().configurations());
    recorder.evaluate(cfg, Phase::bayes_warm, 0);
  }

  std::normal_distribution<double> step(0.0, settings.local_sd);
  for (std::size_t round = 1; recorder.remaining() > 0; ++round) {
    const auto &exp = recorder.experience();
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto &e : exp.entries()) {
      x.push_back(normalize(space, e.config).coords);
      y.push_back(e.score);
    }
    GpSurrogate gp(settings.gp);
    const auto ys = standardize(y);
    gp.fit(x, ys);
    const double incumbent = *std::max_element(ys.begin(), ys.end());
    const auto best_norm = normalize(space, exp.best().config).coords;

    std::vector<Configuration> candidates;
    candidates.reserve(settings.random_candidates + settings.local_candidates);
    for (std::size_t i = 0; i < settings.random_candidates; ++i) {
      candidates.push_back(sample_uniform(space, rng));
    }
    for (std::size_t i = 0; i < settings.local_candidates; ++i) {
      auto u = best_norm;
      for (auto &c : u) c += step(rng);
      candidates.push_back(denormalize(space, u));
    }

    const Configuration *choice = nullptr;
    double best_ei = -1.0;
    for (const auto &cfg : candidates) {
      if (exp.contains(cfg)) continue;
      const auto pred = gp.predict(normalize(space, cfg).coords);
      const double ei = expected_improvement(pred.mean, pred.variance, incumbent);
      if (ei > best_ei) {
        best_ei = ei;
        choice = &cfg;
      }
    }
    const Configuration next =
        choice ? *choice : sample_novel(space, rng, exp.configurations());
    recorder.evaluate(next, Phase::bayes_acquired, round);
  }
  return recorder.finish();
}

} // namespace chpo
