#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "chpo/human_experience.hpp"
#include "chpo/parameter_analysis.hpp"
#include "chpo/problem.hpp"

namespace chpo {

class BudgetError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class EtVariant { full, he_only, pa_only };

std::string_view to_string(EtVariant variant);
EtVariant parse_variant(std::string_view text);

struct EtSettings {
  double p = 0.5;      // share of the budget spent on random initialization
  std::size_t m = 5;   // proposal rounds
  std::uint64_t seed = 0;
  EtVariant variant = EtVariant::full;
  HeOptions he;
  PaOptions pa;
};

struct BudgetPlan {
  std::size_t initial_count = 0;
  std::size_t per_method_batch = 0;

  bool operator==(const BudgetPlan &) const = default;
};

/// per_method_batch = floor(n(1-p)/(2m)); the initialization absorbs the
/// remainder so that initial_count + 2 m per_method_batch == n.
BudgetPlan budget_plan(std::size_t n, double p, std::size_t m);

/// Random initialization followed by m rounds in which the knowledge-driven
/// proposer and the importance-pruning proposer each contribute a batch.
/// Calls the objective exactly problem.budget times.
RunResult solve(const ChpoProblem &problem, const EtSettings &settings);

/// Percent improvement of f_opt over f_def.
double pirate(double f_opt, double f_def);

/// Scores the default configuration outside the budget and compares.
double pirate(const RunResult &result, const ChpoProblem &problem);

} // namespace chpo
