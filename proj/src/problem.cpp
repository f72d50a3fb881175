#include "chpo/problem.hpp"

#include <cmath>
#include <random>
#include <string>

namespace chpo {

void ChpoProblem::validate() const {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (!objective) throw std::invalid_argument("problem has no objective");
  if (space.dimension() == 0) throw std::invalid_argument("empty search space");
  if (default_config) space.check(*default_config);
}

std::string_view to_string(Phase phase) {
  switch (phase) {
  case Phase::init:
    return "init";
  case Phase::human_experience:
    return "he";
  case Phase::parameter_analysis:
    return "pa";
  case Phase::random:
    return "rs";
  case Phase::grid:
    return "gs";
  case Phase::bayes_warm:
    return "bo-init";
  case Phase::bayes_acquired:
    return "bo";
  }
  return "?";
}

RunRecorder::RunRecorder(const ChpoProblem &problem)
    : problem_(problem), start_(Clock::now()) {
  problem_.validate();
  log_.reserve(problem_.budget);
}

double RunRecorder::evaluate(const Configuration &config, Phase phase,
                             std::size_t iteration) {
  if (used() >= problem_.budget) {
    throw std::logic_error("evaluation budget exhausted");
  }
  if (experience_.contains(config)) {
    throw std::logic_error("configuration evaluated twice");
  }
  problem_.space.check(config);
  double score = 0.0;
  const auto t0 = Clock::now();
  try {
    score = problem_.objective(config);
  } catch (const std::exception &e) {
    objective_time_ += Clock::now() - t0;
    throw SolveError(std::string("objective failed: ") + e.what(), log_);
  }
  objective_time_ += Clock::now() - t0;
  if (!std::isfinite(score)) {
    throw SolveError("objective returned a non-finite score", log_);
  }
  experience_.add(config, score);
  log_.push_back({config, score, phase, iteration});
  return score;
}

RunResult RunRecorder::finish() const {
  RunResult result;
  result.log = log_;
  result.evaluations_used = log_.size();
  if (!experience_.empty()) {
    const auto &best = experience_.best();
    result.best_config = best.config;
    result.best_score = best.score;
  }
  const auto wall = Clock::now() - start_;
  result.analysis_time =
      std::chrono::duration<double>(std::max(wall - objective_time_,
                                             Clock::duration::zero()));
  return result;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

} // namespace chpo
