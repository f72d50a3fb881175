#include "chpo/human_experience.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace chpo {

namespace {

// Affine map between percent gains and the networks' standardized scale.
struct GainScale {
  double mean = 0.0;
  double sd = 1.0;

  double to_net(double percent) const { return (percent / 100.0 - mean) / sd; }
  double to_percent(double net) const { return (net * sd + mean) * 100.0; }
};

GainScale fit_gain_scale(const std::vector<AdjustmentTriple> &triples) {
  GainScale scale;
  double sum = 0.0;
  for (const auto &t : triples) sum += t.pdiff / 100.0;
  scale.mean = sum / static_cast<double>(triples.size());
  double ss = 0.0;
  for (const auto &t : triples) {
    const double d = t.pdiff / 100.0 - scale.mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(triples.size()));
  scale.sd = sd > 1e-12 && std::isfinite(sd) ? sd : 1.0;
  return scale;
}

} // namespace

bool ascending_gap(const HeCandidate &a, const HeCandidate &b) {
  return a.confidence_gap < b.confidence_gap;
}

std::size_t hidden_width(std::size_t dimension) {
  return std::max<std::size_t>(16, 2 * dimension);
}

NetworkPair train_mlp_pair(const std::vector<AdjustmentTriple> &triples,
                           std::size_t dimension, std::uint64_t seed,
                           const TrainSettings &settings) {
  if (triples.empty()) throw std::invalid_argument("no training triples");
  const auto n = static_cast<Eigen::Index>(dimension);
  const auto rows = static_cast<Eigen::Index>(triples.size());
  const auto width = hidden_width(dimension);
  const GainScale scale = fit_gain_scale(triples);

  TrainingData adjust_data{Eigen::MatrixXd(n + 1, rows),
                           Eigen::MatrixXd(n, rows)};
  TrainingData verify_data{Eigen::MatrixXd(2 * n, rows),
                           Eigen::MatrixXd(1, rows)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto &t = triples[static_cast<std::size_t>(r)];
    const double gain = scale.to_net(t.pdiff);
    for (Eigen::Index d = 0; d < n; ++d) {
      const double base = t.base.coords[static_cast<std::size_t>(d)];
      const double adj = t.adjust[static_cast<std::size_t>(d)];
      adjust_data.inputs(d, r) = base;
      adjust_data.targets(d, r) = adj;
      verify_data.inputs(d, r) = base;
      verify_data.inputs(n + d, r) = adj;
    }
    adjust_data.inputs(n, r) = gain;
    verify_data.targets(0, r) = gain;
  }

  auto adjust_net = MlpNetwork::init(
      {dimension + 1, width, width, dimension}, seed);
  auto verify_net = MlpNetwork::init({2 * dimension, width, width, 1},
                                     seed ^ 0x9e3779b97f4a7c15ULL);
  adjust_net.train(adjust_data, settings);
  verify_net.train(verify_data, settings);

  NetworkPair pair;
  pair.adjust = [net = std::move(adjust_net), scale](
                    std::span<const double> base, double pdiff_percent) {
    Eigen::VectorXd in(static_cast<Eigen::Index>(base.size()) + 1);
    for (std::size_t d = 0; d < base.size(); ++d) in(d) = base[d];
    in(in.size() - 1) = scale.to_net(pdiff_percent);
    const Eigen::VectorXd out = net.forward(in);
    return std::vector<double>(out.data(), out.data() + out.size());
  };
  pair.verify = [net = std::move(verify_net), scale](
                    std::span<const double> base,
                    std::span<const double> adjust) {
    Eigen::VectorXd in(static_cast<Eigen::Index>(base.size() + adjust.size()));
    for (std::size_t d = 0; d < base.size(); ++d) in(d) = base[d];
    for (std::size_t d = 0; d < adjust.size(); ++d) {
      in(base.size() + d) = adjust[d];
    }
    return scale.to_percent(net.forward(in)(0));
  };
  return pair;
}

std::vector<HeCandidate> generate_candidates(const ExperienceSet &exp,
                                             const SearchSpace &space,
                                             double f_ideal,
                                             const NetworkPair &pair) {
  std::vector<HeCandidate> out;
  out.reserve(exp.size());
  for (const auto &entry : exp.entries()) {
    const auto base = normalize(space, entry.config);
    const double requested = pspace(entry.score, f_ideal);
    const auto adjust = pair.adjust(base.coords, requested);
    if (adjust.size() != space.dimension()) {
      throw std::logic_error("adjustment network returned wrong dimension");
    }
    std::vector<double> target(base.coords);
    for (std::size_t d = 0; d < target.size(); ++d) {
      target[d] = std::clamp(target[d] + adjust[d], 0.0, 1.0);
    }
    const double verified = pair.verify(base.coords, adjust);
    double gap = std::abs(requested - verified);
    if (!std::isfinite(gap)) gap = std::numeric_limits<double>::infinity();
    out.push_back({denormalize(space, target), gap});
  }
  return out;
}

std::vector<Configuration>
select_candidates(std::vector<HeCandidate> candidates, const ExperienceSet &exp,
                  std::size_t num, const CandidateOrder &order) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   order ? order : CandidateOrder(ascending_gap));
  std::set<Configuration> taken;
  std::vector<Configuration> out;
  for (auto &c : candidates) {
    if (out.size() == num) break;
    if (exp.contains(c.config) || !taken.insert(c.config).second) continue;
    out.push_back(std::move(c.config));
  }
  return out;
}

std::vector<Configuration> propose_human_experience(const ExperienceSet &exp,
                                                    const SearchSpace &space,
                                                    std::size_t num,
                                                    double f_ideal,
                                                    std::uint64_t seed,
                                                    const HeOptions &options) {
  if (exp.size() < 2) {
    throw std::invalid_argument(
        "human experience needs at least two evaluated configurations");
  }
  if (num == 0) throw std::invalid_argument("num must be positive");

  const auto triples = build_triples(exp, space, options.triple_base);
  const NetworkPair pair =
      options.trainer
          ? options.trainer(triples, space.dimension(), seed)
          : train_mlp_pair(triples, space.dimension(), seed, options.train);

  auto out = select_candidates(generate_candidates(exp, space, f_ideal, pair),
                               exp, num,
                               options.order ? options.order
                                             : CandidateOrder(ascending_gap));

  if (out.size() < num) {
    std::set<Configuration> exclude = exp.configurations();
    exclude.insert(out.begin(), out.end());
    Rng rng(seed ^ 0x5851f42d4c957f2dULL);
    while (out.size() < num) {
      auto cfg = sample_novel(space, rng, exclude);
      exclude.insert(cfg);
      out.push_back(std::move(cfg));
    }
  }
  return out;
}

} // namespace chpo
