#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chpo/experience.hpp"
#include "chpo/neuralnet.hpp"
#include "chpo/search_space.hpp"

namespace chpo {

struct HeCandidate {
  Configuration config;
  double confidence_gap = 0.0;
};

/// The proposer/verifier pair in normalized coordinates. `adjust` maps a base
/// point and a requested gain (percent) to an adjustment vector; `verify`
/// maps a base point and an adjustment to the predicted gain (percent).
struct NetworkPair {
  std::function<std::vector<double>(std::span<const double> base,
                                    double pdiff_percent)>
      adjust;
  std::function<double(std::span<const double> base,
                       std::span<const double> adjust)>
      verify;
};

using PairTrainer = std::function<NetworkPair(
    const std::vector<AdjustmentTriple> &triples, std::size_t dimension,
    std::uint64_t seed)>;

/// Strict weak ordering; candidates ordered first are proposed first.
using CandidateOrder =
    std::function<bool(const HeCandidate &, const HeCandidate &)>;

bool ascending_gap(const HeCandidate &a, const HeCandidate &b);

struct HeOptions {
  TrainSettings train;
  TripleBase triple_base = TripleBase::source;
  PairTrainer trainer;    // empty: train_mlp_pair with `train`
  CandidateOrder order;   // empty: ascending_gap
};

/// Hidden width used for both networks of a `dimension`-d space.
std::size_t hidden_width(std::size_t dimension);

/// Trains the adjustment network on (base ++ gain -> adjust) and the
/// verification network on (base ++ adjust -> gain). Gains enter both
/// networks as fractions standardized over the triple set.
NetworkPair train_mlp_pair(const std::vector<AdjustmentTriple> &triples,
                           std::size_t dimension, std::uint64_t seed,
                           const TrainSettings &settings = {});

/// For every entry: request its own PSpace from the adjustment network, clip
/// the adjusted point into the unit box, and score the disagreement with the
/// verification network. One candidate per entry, no filtering.
std::vector<HeCandidate> generate_candidates(const ExperienceSet &exp,
                                             const SearchSpace &space,
                                             double f_ideal,
                                             const NetworkPair &pair);

/// Drops candidates already evaluated or repeated, orders the rest and keeps
/// at most `num`.
std::vector<Configuration>
select_candidates(std::vector<HeCandidate> candidates, const ExperienceSet &exp,
                  std::size_t num, const CandidateOrder &order = ascending_gap);

/// Exactly `num` unevaluated configurations; short candidate lists are padded
/// with fresh uniform samples. Requires at least two experience entries.
std::vector<Configuration> propose_human_experience(const ExperienceSet &exp,
                                                    const SearchSpace &space,
                                                    std::size_t num,
                                                    double f_ideal,
                                                    std::uint64_t seed,
                                                    const HeOptions &options = {});

} // namespace chpo
