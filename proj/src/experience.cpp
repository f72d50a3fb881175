#include "chpo/experience.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace chpo {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T> T parse_field(const std::string &s, std::size_t row) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("experience log row " + std::to_string(row) +
                             ": cannot parse '" + s + "'");
  }
  return v;
}

} // namespace

void ExperienceSet::add(Configuration config, double score) {
  if (!std::isfinite(score)) {
    throw std::invalid_argument("experience score must be finite");
  }
  if (!index_.insert(config).second) {
    throw std::invalid_argument("configuration already in experience");
  }
  entries_.push_back({std::move(config), score});
}

const ExperienceEntry &ExperienceSet::best() const {
  if (entries_.empty()) throw std::logic_error("best() of empty experience");
  const ExperienceEntry *best = &entries_.front();
  for (const auto &e : entries_) {
    if (e.score > best->score) best = &e;
  }
  return *best;
}

void ExperienceSet::write(std::ostream &out, const SearchSpace &space) const {
  for (const auto &p : space.params()) out << p.name << ',';
  out << "score\n";
  std::ostringstream num;
  num.precision(17);
  for (const auto &e : entries_) {
    for (const auto &v : e.config.values) out << format_value(v) << ',';
    num.str({});
    num << e.score;
    out << num.str() << '\n';
  }
}

ExperienceSet ExperienceSet::read(std::istream &in, const SearchSpace &space) {
  ExperienceSet exp;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("experience log is empty");
  }
  const auto header = split_fields(line);
  if (header.size() != space.dimension() + 1 || header.back() != "score") {
    throw std::runtime_error("experience log header does not match space");
  }
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    if (header[i] != space.param(i).name) {
      throw std::runtime_error("experience log column '" + header[i] +
                               "' does not match '" + space.param(i).name + "'");
    }
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("experience log row " + std::to_string(row) +
                               " has wrong field count");
    }
    Configuration cfg;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
      switch (space.param(i).kind) {
      case ParamKind::integer_range:
        cfg.values.emplace_back(parse_field<std::int64_t>(fields[i], row));
        break;
      case ParamKind::real_range:
        cfg.values.emplace_back(parse_field<double>(fields[i], row));
        break;
      case ParamKind::categorical:
        cfg.values.emplace_back(fields[i]);
        break;
      }
    }
    space.check(cfg);
    exp.add(std::move(cfg), parse_field<double>(fields.back(), row));
  }
  return exp;
}

std::vector<double> cdiffer(const Configuration &a, const Configuration &b,
                            const SearchSpace &space) {
  const auto na = normalize(space, a);
  const auto nb = normalize(space, b);
  std::vector<double> d(na.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = nb.coords[i] - na.coords[i];
  return d;
}

double pdiffer(double fa, double fb) {
  return (fb - fa) / std::max(std::abs(fa), kRelativeEpsilon) * 100.0;
}

double pspace(double f, double f_ideal) {
  const double headroom = std::max(f_ideal - f, 0.0);
  return headroom / std::max(std::abs(f), kRelativeEpsilon) * 100.0;
}

std::vector<AdjustmentTriple> enumerate_triples(const ExperienceSet &exp,
                                                const SearchSpace &space,
                                                TripleBase base) {
  const auto t = exp.size();
  if (t < 2) {
    throw std::invalid_argument("need at least two experience entries");
  }
  std::vector<NormalizedConfiguration> norm;
  norm.reserve(t);
  for (const auto &e : exp.entries()) norm.push_back(normalize(space, e.config));

  std::vector<AdjustmentTriple> rows;
  rows.reserve(t * (t - 1));
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      if (i == j) continue;
      // Pair j -> i: from the source j to the destination i.
      AdjustmentTriple row;
      row.base = base == TripleBase::source ? norm[j] : norm[i];
      row.pdiff = pdiffer(exp[j].score, exp[i].score);
      row.adjust.resize(space.dimension());
      for (std::size_t d = 0; d < space.dimension(); ++d) {
        row.adjust[d] = norm[i].coords[d] - norm[j].coords[d];
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<AdjustmentTriple>
dedup_triples(std::vector<AdjustmentTriple> triples) {
  std::set<std::pair<std::vector<double>, double>> seen;
  std::vector<AdjustmentTriple> kept;
  kept.reserve(triples.size());
  for (auto &row : triples) {
    if (seen.emplace(row.base.coords, row.pdiff).second) {
      kept.push_back(std::move(row));
    }
  }
  return kept;
}

std::vector<AdjustmentTriple> build_triples(const ExperienceSet &exp,
                                            const SearchSpace &space,
                                            TripleBase base) {
  return dedup_triples(enumerate_triples(exp, space, base));
}

} // namespace chpo
