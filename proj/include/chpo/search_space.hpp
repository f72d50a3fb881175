#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace chpo {

using Rng = std::mt19937_64;

class SpaceError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class ParamKind { integer_range, real_range, categorical };

std::string_view to_string(ParamKind kind);

/// One hyperparameter and its domain. Range bounds are inclusive; the order of
/// categorical options defines their normalized position.
struct HyperparameterDef {
  std::string name;
  ParamKind kind = ParamKind::real_range;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::string> options;

  static HyperparameterDef integer(std::string name, std::int64_t lo,
                                   std::int64_t hi);
  static HyperparameterDef real(std::string name, double lo, double hi);
  static HyperparameterDef categorical(std::string name,
                                       std::vector<std::string> options);

  /// Number of distinct values, or nullopt for real ranges with lo < hi.
  std::optional<std::uint64_t> cardinality() const;

  void validate() const;
};

/// A value of a single hyperparameter: integer, real or option label.
using ParamValue = std::variant<std::int64_t, double, std::string>;

std::string format_value(const ParamValue &value);

struct Configuration {
  std::vector<ParamValue> values;

  std::size_t size() const noexcept { return values.size(); }
  auto operator<=>(const Configuration &) const = default;
};

struct NormalizedConfiguration {
  std::vector<double> coords;

  std::size_t size() const noexcept { return coords.size(); }
  auto operator<=>(const NormalizedConfiguration &) const = default;
};

class SearchSpace {
public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<HyperparameterDef> params);

  std::size_t dimension() const noexcept { return params_.size(); }
  const std::vector<HyperparameterDef> &params() const noexcept {
    return params_;
  }
  const HyperparameterDef &param(std::size_t i) const { return params_.at(i); }

  /// Product of the per-parameter cardinalities; nullopt when any dimension
  /// is continuous or the product overflows.
  std::optional<std::uint64_t> cardinality() const;

  /// Throws SpaceError when cfg does not lie in the space.
  void check(const Configuration &cfg) const;
  bool contains(const Configuration &cfg) const;

private:
  std::vector<HyperparameterDef> params_;
};

NormalizedConfiguration normalize(const SearchSpace &space,
                                  const Configuration &cfg);

/// Coordinates are clipped to [0,1] first; integer and categorical
/// dimensions round to nearest with ties to even.
Configuration denormalize(const SearchSpace &space,
                          std::span<const double> coords);
inline Configuration denormalize(const SearchSpace &space,
                                 const NormalizedConfiguration &norm) {
  return denormalize(space, norm.coords);
}

ParamValue sample_value(const HyperparameterDef &def, Rng &rng);
Configuration sample_uniform(const SearchSpace &space, Rng &rng);

/// Draws a configuration not present in `exclude`. Falls back to enumerating
/// the remaining points of small finite spaces when rejection sampling stalls.
/// Throws SpaceError when the space has no unexcluded point left.
Configuration sample_novel(const SearchSpace &space, Rng &rng,
                           const std::set<Configuration> &exclude);

/// Parses the declarative space grammar, one hyperparameter per line:
///
///   <name> = int <lo> <hi>
///   <name> = real <lo> <hi>
///   <name> = cat <option> <option> ...
///
/// Blank lines and lines starting with '#' are ignored.
SearchSpace parse_search_space(std::string_view text);
HyperparameterDef parse_param_entry(std::string_view name,
                                    std::string_view definition);

} // namespace chpo
