#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "chpo/experience.hpp"
#include "chpo/search_space.hpp"

namespace chpo {

/// Scores a configuration; higher is better.
using ObjectiveFn = std::function<double(const Configuration &)>;

/// A budget-constrained optimization problem: maximize `objective` over
/// `space` using exactly `budget` evaluations.
struct ChpoProblem {
  SearchSpace space;
  ObjectiveFn objective;
  double f_ideal = 1.0;
  std::size_t budget = 0;
  std::optional<Configuration> default_config;

  void validate() const;
};

enum class Phase {
  init,
  human_experience,
  parameter_analysis,
  random,
  grid,
  bayes_warm,
  bayes_acquired,
};

std::string_view to_string(Phase phase);

struct LogRecord {
  Configuration config;
  double score = 0.0;
  Phase phase = Phase::init;
  std::size_t iteration = 0;
};

struct RunResult {
  Configuration best_config;
  double best_score = 0.0;
  std::vector<LogRecord> log;
  std::chrono::duration<double> analysis_time{0.0};
  std::size_t evaluations_used = 0;
};

/// An objective failure, carrying everything evaluated before it.
class SolveError : public std::runtime_error {
public:
  SolveError(const std::string &what, std::vector<LogRecord> partial_log)
      : std::runtime_error(what), partial_log_(std::move(partial_log)) {}

  const std::vector<LogRecord> &partial_log() const noexcept {
    return partial_log_;
  }
  std::size_t evaluations_used() const noexcept { return partial_log_.size(); }

private:
  std::vector<LogRecord> partial_log_;
};

/// Owns the evaluation ledger of one run: calls the objective, refuses
/// repeats and over-budget calls, and separates objective time from
/// analysis time.
class RunRecorder {
public:
  explicit RunRecorder(const ChpoProblem &problem);

  double evaluate(const Configuration &config, Phase phase,
                  std::size_t iteration);

  const ExperienceSet &experience() const noexcept { return experience_; }
  std::size_t used() const noexcept { return log_.size(); }
  std::size_t remaining() const noexcept { return problem_.budget - used(); }

  RunResult finish() const;

private:
  using Clock = std::chrono::steady_clock;

  const ChpoProblem &problem_;
  ExperienceSet experience_;
  std::vector<LogRecord> log_;
  Clock::time_point start_;
  Clock::duration objective_time_{0};
};

/// Stream seed for a named sub-task of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0);

} // namespace chpo
