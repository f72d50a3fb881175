#include "chpo/parameter_analysis.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace chpo {

std::vector<LabeledRow> label_experience(const ExperienceSet &exp,
                                         const SearchSpace &space) {
  const auto t = exp.size();
  if (t < 3) {
    throw std::invalid_argument(
        "parameter analysis needs at least three evaluated configurations");
  }
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return exp[a].score < exp[b].score;
  });
  const auto psize = (t + 2) / 3;
  std::vector<LabeledRow> rows;
  rows.reserve(t);
  for (std::size_t rank = 1; rank <= t; ++rank) {
    const auto &entry = exp[order[rank - 1]];
    rows.push_back({normalize(space, entry.config).coords,
                    static_cast<int>((rank + psize - 1) / psize)});
  }
  return rows;
}

KeyParams select_key_params(const std::vector<double> &importances) {
  std::vector<std::size_t> order(importances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return importances[a] > importances[b];
  });
  KeyParams key;
  const bool all_zero = std::all_of(importances.begin(), importances.end(),
                                    [](double v) { return v <= 0.0; });
  for (auto i : order) {
    if (!all_zero && key.cumulative_importance >= 0.5) break;
    key.indices.push_back(i);
    key.cumulative_importance += importances[i];
  }
  return key;
}

std::vector<Configuration> propose_parameter_analysis(const ExperienceSet &exp,
                                                      const SearchSpace &space,
                                                      std::size_t num,
                                                      std::uint64_t seed,
                                                      const PaOptions &options) {
  if (num == 0) throw std::invalid_argument("num must be positive");
  const auto rows = label_experience(exp, space);

  ForestSettings forest = options.forest;
  forest.seed = seed;
  const auto model = ForestModel::fit(rows, forest);
  const auto key = select_key_params(model.importances());

  // The best entry is the last one after a stable ascending sort, i.e. the
  // latest-inserted among equal top scores.
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < exp.size(); ++i) {
    if (exp[i].score >= exp[best_index].score) best_index = i;
  }
  const auto &best = exp[best_index].config;

  Rng rng(seed ^ 0xd1b54a32d192ed03ULL);
  std::set<Configuration> exclude = exp.configurations();
  std::vector<Configuration> out;
  out.reserve(num);
  while (out.size() < num) {
    bool placed = false;
    for (int attempt = 0; attempt < options.retries_per_candidate; ++attempt) {
      Configuration cfg = best;
      for (auto d : key.indices) cfg.values[d] = sample_value(space.param(d), rng);
      if (exclude.insert(cfg).second) {
        out.push_back(std::move(cfg));
        placed = true;
        break;
      }
    }
    if (!placed) {
      auto cfg = sample_novel(space, rng, exclude);
      exclude.insert(cfg);
      out.push_back(std::move(cfg));
    }
  }
  return out;
}

} // namespace chpo
