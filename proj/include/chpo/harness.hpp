#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chpo/baselines.hpp"
#include "chpo/driver.hpp"
#include "chpo/objectives.hpp"

namespace chpo {

/// Malformed or inconsistent experiment spec (CLI exit code 2).
class SpecError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSpecSchemaVersion = 1;

enum class ProblemKind { synthetic, feature_subset, space_bowl };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::synthetic;
  SyntheticSettings synthetic;
  // feature-subset
  std::string dataset;            // registry name
  std::filesystem::path registry; // registry file
  std::filesystem::path csv;      // direct path, alternative to the registry
  std::string label;
  FeatureSubsetSettings subset;
  // space-bowl
  std::optional<SearchSpace> space;
  double center = 0.3;
};

struct AlgorithmSpec {
  std::string name;
  std::string type;  // rs, gs, bo or et
  double p = 0.5;
  std::size_t m = 5;
  EtVariant variant = EtVariant::full;
  BoSettings bo;
};

struct SensitivitySpec {
  std::string axis;  // "p" or "m"
  std::vector<double> values;
};

struct ExperimentSpec {
  int schema = kSpecSchemaVersion;
  std::string name = "experiment";
  std::size_t budget = 0;
  std::size_t repetitions = 50;
  std::uint64_t seed = 0;
  ProblemSpec problem;
  std::vector<AlgorithmSpec> algorithms;
  std::optional<SensitivitySpec> sensitivity;

  void validate() const;
};

/// Parses the experiment document. Relative paths inside it resolve against
/// `base_dir`. Throws SpecError.
ExperimentSpec parse_experiment_spec(std::string_view text,
                                     const std::filesystem::path &base_dir);
ExperimentSpec load_experiment_spec(const std::filesystem::path &path);

/// A concrete problem built from a spec. Thread-safe to share across runs.
/// The default configuration is scored once at build time; calls() counts
/// only the evaluations made by runs after that.
class ProblemInstance {
public:
  static std::shared_ptr<ProblemInstance> build(const ExperimentSpec &spec);

  const ChpoProblem &problem() const noexcept { return problem_; }
  /// Score of the default configuration, if the problem has one.
  std::optional<double> default_score() const;
  std::uint64_t calls() const noexcept { return calls_->load(); }

private:
  ChpoProblem problem_;
  std::shared_ptr<std::atomic<std::uint64_t>> calls_ =
      std::make_shared<std::atomic<std::uint64_t>>(0);
  std::optional<double> default_score_;
};

struct RunOutcome {
  std::string algorithm;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  double metric = 0.0;
  std::string error;
};

struct ReportRow {
  std::string algorithm;
  std::size_t budget = 0;
  std::size_t repetitions = 0;
  std::string metric;  // "pirate" or "best_score"
  double mean = 0.0;
  double stddev = 0.0;
  double mean_best = 0.0;
  double stddev_best = 0.0;
  std::size_t evaluations = 0;
  double mean_analysis_s = 0.0;
  std::string status = "ok";
};

struct Report {
  std::string experiment;
  std::string mode;
  std::vector<ReportRow> rows;
  std::vector<RunOutcome> runs;
  SearchSpace space;
  std::uint64_t objective_calls = 0;  // budgeted calls across all runs
  bool failed = false;
};

struct RunOptions {
  std::size_t workers = 1;
};

Report run_experiment(const ExperimentSpec &spec, const RunOptions &options = {});
Report run_sensitivity(const ExperimentSpec &spec, const SensitivitySpec &axis,
                       const RunOptions &options = {});
Report run_ablation(const ExperimentSpec &spec, const RunOptions &options = {});

/// Summary document. Everything before the "[timing]" line is a pure
/// function of the experiment file; the timing section holds wall-clock figures.
void write_report(std::ostream &out, const Report &report);
/// One record per evaluation: algorithm, rep, seed, eval, iteration, phase,
/// one column per hyperparameter, score, cumulative best.
void write_run_log(std::ostream &out, const Report &report);

/// The deterministic part of a report document.
std::string report_body(std::string_view document);

} // namespace chpo
