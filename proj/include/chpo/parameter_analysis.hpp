#pragma once

#include <cstdint>
#include <vector>

#include "chpo/experience.hpp"
#include "chpo/random_forest.hpp"
#include "chpo/search_space.hpp"

namespace chpo {

struct KeyParams {
  std::vector<std::size_t> indices;  // importance-descending
  double cumulative_importance = 0.0;
};

/// Ranks entries by ascending score and cuts them into three performance
/// classes of size ceil(t/3): 1 (low), 2 (mid), 3 (high). Rows come back in
/// ascending-score order (stable for equal scores).
std::vector<LabeledRow> label_experience(const ExperienceSet &exp,
                                         const SearchSpace &space);

/// Greedy importance-descending prefix whose cumulative importance first
/// reaches 0.5. All-zero importances select every parameter.
KeyParams select_key_params(const std::vector<double> &importances);

struct PaOptions {
  ForestSettings forest;
  int retries_per_candidate = 50;
};

/// Exactly `num` unevaluated configurations whose key coordinates are drawn
/// uniformly and whose other coordinates copy the best entry. Requires at
/// least three experience entries.
std::vector<Configuration> propose_parameter_analysis(const ExperienceSet &exp,
                                                      const SearchSpace &space,
                                                      std::size_t num,
                                                      std::uint64_t seed,
                                                      const PaOptions &options = {});

} // namespace chpo
