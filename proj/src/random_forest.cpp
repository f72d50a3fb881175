#include "chpo/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace chpo {

namespace {

double gini(const std::vector<std::size_t> &counts, std::size_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

// Majority class index; ties go to the smallest index (= smallest label).
std::size_t majority(const std::vector<std::size_t> &counts) {
  return static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

} // namespace

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto &n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                              : n.right;
  }
  return nodes_[i].label;
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node &n) { return n.feature >= 0; }));
}

class TreeBuilder {
public:
  TreeBuilder(const std::vector<std::vector<double>> &x,
              const std::vector<std::size_t> &y,
              const std::vector<int> &class_labels,
              const ForestSettings &settings, std::size_t max_features,
              std::mt19937_64 &rng)
      : x_(x), y_(y), labels_(class_labels), settings_(settings),
        max_features_(max_features), rng_(rng),
        n_features_(x.empty() ? 0 : x.front().size()) {}

  DecisionTree build(std::vector<std::size_t> sample,
                     std::vector<double> &importance) {
    total_ = sample.size();
    importance_ = &importance;
    DecisionTree tree;
    tree_ = &tree;
    grow(sample, 0);
    return tree;
  }

private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = -1.0;
  };

  std::vector<std::size_t> class_counts(const std::vector<std::size_t> &idx) const {
    std::vector<std::size_t> counts(labels_.size(), 0);
    for (auto i : idx) ++counts[y_[i]];
    return counts;
  }

  Split best_split(const std::vector<std::size_t> &idx,
                   const std::vector<std::size_t> &counts, double impurity) {
    std::vector<std::size_t> features(n_features_);
    std::iota(features.begin(), features.end(), 0);
    Split best;
    std::size_t visited = 0;
    std::vector<std::pair<double, std::size_t>> order(idx.size());
    const double n = static_cast<double>(idx.size());
    for (std::size_t k = 0; k < n_features_ && visited < max_features_; ++k) {
      // Partial Fisher-Yates: draw features without replacement.
      std::uniform_int_distribution<std::size_t> pick(k, n_features_ - 1);
      std::swap(features[k], features[pick(rng_)]);
      const auto f = features[k];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        order[i] = {x_[idx[i]][f], y_[idx[i]]};
      }
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;  // constant
      ++visited;
      std::vector<std::size_t> left(labels_.size(), 0);
      std::vector<std::size_t> right = counts;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        ++left[order[i].second];
        --right[order[i].second];
        if (order[i].first == order[i + 1].first) continue;
        const auto nl = i + 1;
        const auto nr = order.size() - nl;
        if (nl < settings_.min_samples_leaf || nr < settings_.min_samples_leaf) {
          continue;
        }
        const double decrease =
            impurity - (static_cast<double>(nl) / n) * gini(left, nl) -
            (static_cast<double>(nr) / n) * gini(right, nr);
        if (decrease > best.decrease) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (order[i].first + order[i + 1].first);
          best.decrease = decrease;
        }
      }
    }
    return best;
  }

  std::size_t grow(const std::vector<std::size_t> &idx, std::size_t depth) {
    const auto node_id = tree_->nodes_.size();
    tree_->nodes_.emplace_back();
    const auto counts = class_counts(idx);
    tree_->nodes_[node_id].label = labels_[majority(counts)];
    const double impurity = gini(counts, idx.size());
    const bool depth_ok = settings_.max_depth == 0 || depth < settings_.max_depth;
    if (impurity <= 1e-12 || !depth_ok ||
        idx.size() < 2 * settings_.min_samples_leaf) {
      return node_id;
    }
    const Split split = best_split(idx, counts, impurity);
    if (split.feature < 0) return node_id;

    (*importance_)[static_cast<std::size_t>(split.feature)] +=
        static_cast<double>(idx.size()) / static_cast<double>(total_) *
        split.decrease;
    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (x_[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left
                                                                         : right)
          .push_back(i);
    }
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    auto &node = tree_->nodes_[node_id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }

  const std::vector<std::vector<double>> &x_;
  const std::vector<std::size_t> &y_;
  const std::vector<int> &labels_;
  const ForestSettings &settings_;
  std::size_t max_features_;
  std::mt19937_64 &rng_;
  std::size_t n_features_;
  std::size_t total_ = 0;
  std::vector<double> *importance_ = nullptr;
  DecisionTree *tree_ = nullptr;
};

ForestModel ForestModel::fit(const std::vector<LabeledRow> &rows,
                             const ForestSettings &settings) {
  if (rows.empty()) throw std::invalid_argument("forest needs training rows");
  if (settings.n_trees == 0) throw std::invalid_argument("n_trees must be >= 1");
  if (settings.min_samples_leaf == 0) {
    throw std::invalid_argument("min_samples_leaf must be >= 1");
  }
  const auto n_features = rows.front().features.size();
  std::vector<std::vector<double>> x;
  x.reserve(rows.size());
  std::map<int, std::size_t> label_index;
  for (const auto &r : rows) {
    if (r.features.size() != n_features) {
      throw std::invalid_argument("rows have inconsistent feature counts");
    }
    x.push_back(r.features);
    label_index.emplace(r.label, 0);
  }
  std::vector<int> labels;
  for (auto &[label, index] : label_index) {
    index = labels.size();
    labels.push_back(label);
  }
  std::vector<std::size_t> y;
  y.reserve(rows.size());
  for (const auto &r : rows) y.push_back(label_index.at(r.label));

  const std::size_t max_features =
      settings.max_features > 0
          ? std::min(settings.max_features, n_features)
          : static_cast<std::size_t>(
                std::ceil(std::sqrt(static_cast<double>(n_features))));

  ForestModel model;
  model.n_features_ = n_features;
  model.importances_.assign(n_features, 0.0);
  for (std::size_t t = 0; t < settings.n_trees; ++t) {
    // Independent stream per tree so trees can be grown in any order.
    std::seed_seq seq{static_cast<std::uint32_t>(settings.seed),
                      static_cast<std::uint32_t>(settings.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> sample(rows.size());
    if (settings.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, rows.size() - 1);
      for (auto &s : sample) s = draw(rng);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    std::vector<double> tree_importance(n_features, 0.0);
    TreeBuilder builder(x, y, labels, settings, max_features, rng);
    model.trees_.push_back(builder.build(std::move(sample), tree_importance));
    for (std::size_t f = 0; f < n_features; ++f) {
      model.importances_[f] += tree_importance[f];
    }
  }
  const double total =
      std::accumulate(model.importances_.begin(), model.importances_.end(), 0.0);
  if (total > 0.0) {
    for (auto &v : model.importances_) v /= total;
  }
  return model;
}

int ForestModel::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw std::invalid_argument("feature vector has wrong dimension");
  }
  std::map<int, std::size_t> votes;
  for (const auto &tree : trees_) ++votes[tree.predict(x)];
  int best = votes.begin()->first;
  std::size_t best_votes = 0;
  for (const auto &[label, count] : votes) {
    if (count > best_votes) {
      best = label;
      best_votes = count;
    }
  }
  return best;
}

} // namespace chpo
