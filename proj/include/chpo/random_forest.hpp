#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace chpo {

struct LabeledRow {
  std::vector<double> features;
  int label = 0;
};

struct ForestSettings {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(n_features))
  std::size_t min_samples_leaf = 1;
  std::size_t max_depth = 0;     // 0: unlimited
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Axis-aligned binary classification tree; x goes left when
/// x[feature] <= threshold.
class DecisionTree {
public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    int label = 0;
  };

  int predict(std::span<const double> x) const;
  const std::vector<Node> &nodes() const noexcept { return nodes_; }
  std::size_t split_count() const;

private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

/// Bagged Gini trees with mean-decrease-in-impurity importances.
class ForestModel {
public:
  static ForestModel fit(const std::vector<LabeledRow> &rows,
                         const ForestSettings &settings = {});

  /// Majority vote, ties to the smallest label.
  int predict(std::span<const double> x) const;

  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<DecisionTree> &trees() const noexcept { return trees_; }

  /// Non-negative, summing to 1 when any tree split; all zero otherwise.
  const std::vector<double> &importances() const noexcept {
    return importances_;
  }

private:
  std::size_t n_features_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<double> importances_;
};

} // namespace chpo
