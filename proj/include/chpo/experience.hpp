#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "chpo/search_space.hpp"

namespace chpo {

/// Denominator guard for the relative-difference formulas; scores of exactly
/// zero are legal for accuracy-style objectives.
inline constexpr double kRelativeEpsilon = 1e-9;

struct ExperienceEntry {
  Configuration config;
  double score = 0.0;
};

/// Evaluated (configuration, score) pairs in insertion order. Configurations
/// are unique.
class ExperienceSet {
public:
  void add(Configuration config, double score);

  bool contains(const Configuration &config) const {
    return index_.contains(config);
  }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<ExperienceEntry> &entries() const noexcept {
    return entries_;
  }
  const ExperienceEntry &operator[](std::size_t i) const { return entries_[i]; }
  const std::set<Configuration> &configurations() const noexcept {
    return index_;
  }

  /// Highest score; ties go to the earliest inserted entry.
  const ExperienceEntry &best() const;

  /// One row per entry, columns in space order then `score`, with a header.
  void write(std::ostream &out, const SearchSpace &space) const;
  static ExperienceSet read(std::istream &in, const SearchSpace &space);

private:
  std::vector<ExperienceEntry> entries_;
  std::set<Configuration> index_;
};

/// Normalized difference b - a.
std::vector<double> cdiffer(const Configuration &a, const Configuration &b,
                            const SearchSpace &space);

/// Relative performance change from fa to fb, in percent.
double pdiffer(double fa, double fb);

/// Relative headroom of f below the ideal score, in percent. f above the
/// ideal is treated as sitting at the ideal.
double pspace(double f, double f_ideal);

struct AdjustmentTriple {
  NormalizedConfiguration base;
  double pdiff = 0.0;
  std::vector<double> adjust;
};

/// Which end of an ordered pair (j -> i) supplies the triple's base point.
enum class TripleBase { source, destination };

/// All t(t-1) ordered-pair triples, before deduplication.
std::vector<AdjustmentTriple>
enumerate_triples(const ExperienceSet &exp, const SearchSpace &space,
                  TripleBase base = TripleBase::source);

/// Keeps the first triple among those sharing an identical (base, pdiff).
std::vector<AdjustmentTriple>
dedup_triples(std::vector<AdjustmentTriple> triples);

/// Training rows for the adjustment/verification networks.
std::vector<AdjustmentTriple> build_triples(const ExperienceSet &exp,
                                            const SearchSpace &space,
                                            TripleBase base = TripleBase::source);

} // namespace chpo
