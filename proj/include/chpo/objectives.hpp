#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chpo/search_space.hpp"

namespace chpo {

enum class SyntheticFunction { quadratic_bowl, branin_2d, hartmann_6d, rastrigin };

std::string_view to_string(SyntheticFunction fn);
SyntheticFunction parse_synthetic_function(std::string_view text);

struct SyntheticSettings {
  SyntheticFunction function = SyntheticFunction::quadratic_bowl;
  std::size_t active_dims = 2;  // bowl and rastrigin only
  std::size_t dummy_dims = 0;
  double noise_sd = 0.0;
  std::uint64_t noise_seed = 0;
  double bowl_center = 0.3;
};

/// Benchmark function turned into a maximization score, over a space of real
/// ranges x0..x{k-1} followed by inert dummy dimensions d0..d{m-1} on [0,1].
///
///   quadratic-bowl  1 - sum (x_i - c)^2 on [0,1]^k        ideal 1
///   branin-2d       -branin(x) on [-5,10] x [0,15]       ideal -0.397887
///   hartmann-6d     -hartmann6(x) on [0,1]^6             ideal 3.32237
///   rastrigin       -rastrigin(x) on [-5.12,5.12]^k      ideal 0
///
/// Noise, when enabled, is a deterministic function of the configuration and
/// the noise seed.
class SyntheticObjective {
public:
  explicit SyntheticObjective(SyntheticSettings settings);

  const SearchSpace &space() const noexcept { return space_; }
  const SyntheticSettings &settings() const noexcept { return settings_; }
  std::size_t active_dims() const noexcept { return active_; }
  double f_ideal() const noexcept { return f_ideal_; }

  /// The textbook function value (minimization form for branin, hartmann and
  /// rastrigin; the squared distance for the bowl).
  double base_value(std::span<const double> active) const;

  double operator()(const Configuration &cfg) const;

  /// Center of every domain.
  Configuration default_config() const;
  /// A global optimizer, dummy dimensions at their lower bound.
  Configuration optimum() const;

private:
  SyntheticSettings settings_;
  std::size_t active_ = 0;
  double f_ideal_ = 0.0;
  SearchSpace space_;
};

class DatasetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TabularDataset {
  std::string name;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;  // rows x features
  std::vector<int> labels;   // codes into class_names
  std::vector<std::string> class_names;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t columns() const noexcept { return feature_names.size(); }
};

/// Comma-separated file with a header row. Numeric columns parse as reals;
/// any other feature column is coded by first appearance, as is the label.
/// Empty and '?' cells are rejected with their row and column.
TabularDataset load_csv(const std::filesystem::path &path,
                        std::string_view label_column);
TabularDataset parse_csv(std::string_view text, std::string_view label_column,
                         std::string name = "dataset");

struct DatasetEntry {
  std::filesystem::path path;
  std::string label_column;
};

/// `<name> = <path> <label-column>` per line; relative paths resolve against
/// `base_dir`.
std::map<std::string, DatasetEntry>
parse_dataset_registry(std::string_view text,
                       const std::filesystem::path &base_dir);

struct FeatureSubsetSettings {
  std::size_t group_size = 3;
  std::size_t k = 5;
  std::size_t folds = 3;
  std::uint64_t fold_seed = 0;
};

/// Feature subset selection scored by stratified k-fold k-NN accuracy.
/// Features are bundled into groups of `group_size`; each group is one
/// categorical hyperparameter whose option index, read little-endian, is the
/// on/off mask of the group's features. Option labels spell the mask in
/// feature order, e.g. "100" keeps only the group's first feature.
class FeatureSubsetObjective {
public:
  FeatureSubsetObjective(TabularDataset data,
                         FeatureSubsetSettings settings = {});

  const SearchSpace &space() const noexcept { return space_; }
  const TabularDataset &dataset() const noexcept { return data_; }
  const FeatureSubsetSettings &settings() const noexcept { return settings_; }
  double f_ideal() const noexcept { return 1.0; }

  std::vector<bool> decode(const Configuration &cfg) const;
  /// Every feature kept; the reference configuration for PIRate.
  Configuration all_features() const;

  double operator()(const Configuration &cfg) const;
  /// Mean fold accuracy; an all-off mask scores 0.
  double evaluate_mask(const std::vector<bool> &mask) const;

  /// Fold index of every row.
  const std::vector<std::size_t> &fold_of() const noexcept { return fold_of_; }

private:
  TabularDataset data_;
  FeatureSubsetSettings settings_;
  SearchSpace space_;
  std::vector<std::size_t> fold_of_;
  std::vector<std::vector<std::size_t>> train_rows_;
  std::vector<std::vector<std::size_t>> test_rows_;
};

} // namespace chpo
