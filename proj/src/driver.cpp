#include "chpo/driver.hpp"

#include <cmath>
#include <set>
#include <string>

namespace chpo {

namespace {

enum StreamTag : std::uint64_t { kInit = 1, kHe = 2, kPa = 3, kFill = 4 };

// Fallback when experience is still too small for a proposer.
std::vector<Configuration> uniform_batch(const SearchSpace &space,
                                         std::size_t num, Rng &rng,
                                         std::set<Configuration> exclude) {
  std::vector<Configuration> out;
  while (out.size() < num) {
    auto cfg = sample_novel(space, rng, exclude);
    exclude.insert(cfg);
    out.push_back(std::move(cfg));
  }
  return out;
}

} // namespace

std::string_view to_string(EtVariant variant) {
  switch (variant) {
  case EtVariant::full:
    return "full";
  case EtVariant::he_only:
    return "he-only";
  case EtVariant::pa_only:
    return "pa-only";
  }
  return "?";
}

EtVariant parse_variant(std::string_view text) {
  if (text == "full") return EtVariant::full;
  if (text == "he-only" || text == "hea") return EtVariant::he_only;
  if (text == "pa-only" || text == "paa") return EtVariant::pa_only;
  throw std::invalid_argument("unknown variant '" + std::string(text) + "'");
}

BudgetPlan budget_plan(std::size_t n, double p, std::size_t m) {
  if (!(p > 0.0 && p < 1.0)) throw BudgetError("p must lie in (0, 1)");
  if (m < 1) throw BudgetError("m must be at least 1");
  // The epsilon keeps products such as 10 * (1 - 0.9) from flooring to 0.
  const double share = static_cast<double>(n) * (1.0 - p) /
                       (2.0 * static_cast<double>(m));
  const auto batch = static_cast<std::size_t>(std::floor(share + 1e-9));
  if (batch == 0) {
    throw BudgetError("budget " + std::to_string(n) + " with p=" +
                      std::to_string(p) + ", m=" + std::to_string(m) +
                      " leaves no evaluations per proposal batch");
  }
  const auto proposals = 2 * m * batch;
  if (proposals >= n) {
    throw BudgetError("budget leaves no initial evaluations");
  }
  return {n - proposals, batch};
}

RunResult solve(const ChpoProblem &problem, const EtSettings &settings) {
  problem.validate();
  const auto plan = budget_plan(problem.budget, settings.p, settings.m);
  const auto &space = problem.space;
  RunRecorder recorder(problem);

  Rng init_rng(derive_seed(settings.seed, kInit));
  for (std::size_t i = 0; i < plan.initial_count; ++i) {
    const auto cfg =
        sample_novel(space, init_rng, recorder.experience().configurations());
    recorder.evaluate(cfg, Phase::init, 0);
  }

  std::size_t he_batch = plan.per_method_batch;
  std::size_t pa_batch = plan.per_method_batch;
  if (settings.variant == EtVariant::he_only) {
    he_batch *= 2;
    pa_batch = 0;
  } else if (settings.variant == EtVariant::pa_only) {
    pa_batch *= 2;
    he_batch = 0;
  }

  for (std::size_t it = 1; it <= settings.m; ++it) {
    const auto &exp = recorder.experience();
    Rng fill_rng(derive_seed(settings.seed, kFill, it));

    std::vector<Configuration> he, pa;
    if (he_batch > 0) {
      he = exp.size() >= 2
               ? propose_human_experience(exp, space, he_batch, problem.f_ideal,
                                          derive_seed(settings.seed, kHe, it),
                                          settings.he)
               : uniform_batch(space, he_batch, fill_rng, exp.configurations());
    }
    if (pa_batch > 0) {
      pa = exp.size() >= 3
               ? propose_parameter_analysis(exp, space, pa_batch,
                                            derive_seed(settings.seed, kPa, it),
                                            settings.pa)
               : uniform_batch(space, pa_batch, fill_rng, exp.configurations());
    }

    // Both proposers saw the same experience; resolve clashes between them
    // (and any proposer slip) before spending budget.
    std::set<Configuration> pending = exp.configurations();
    std::vector<std::pair<Configuration, Phase>> batch;
    auto enqueue = [&](std::vector<Configuration> &cfgs, Phase phase) {
      for (auto &cfg : cfgs) {
        if (!space.contains(cfg) || pending.contains(cfg)) {
          cfg = sample_novel(space, fill_rng, pending);
        }
        pending.insert(cfg);
        batch.emplace_back(std::move(cfg), phase);
      }
    };
    enqueue(he, Phase::human_experience);
    enqueue(pa, Phase::parameter_analysis);

    for (const auto &[cfg, phase] : batch) recorder.evaluate(cfg, phase, it);
  }
  return recorder.finish();
}

double pirate(double f_opt, double f_def) {
  return (f_opt - f_def) / std::max(std::abs(f_def), kRelativeEpsilon) * 100.0;
}

double pirate(const RunResult &result, const ChpoProblem &problem) {
  if (!problem.default_config) {
    throw std::invalid_argument("problem has no default configuration");
  }
  return pirate(result.best_score, problem.objective(*problem.default_config));
}

} // namespace chpo
