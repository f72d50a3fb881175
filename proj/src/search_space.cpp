#include "chpo/search_space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace chpo {

namespace {

constexpr int kRejectionAttempts = 1000;
constexpr std::uint64_t kMaxEnumeration = std::uint64_t{1} << 20;

bool is_integral(double v) {
  return std::isfinite(v) && std::nearbyint(v) == v &&
         std::abs(v) < 9.0e15;
}

bool valid_label(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == ',' || c == '\n' || c == '\r' || c == '"' ||
           std::isspace(static_cast<unsigned char>(c));
  });
}

double parse_number(std::string_view token, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() ||
      !std::isfinite(v)) {
    throw SpaceError("invalid number '" + std::string(token) + "' for " +
                     std::string(what));
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

ParamValue value_at(const HyperparameterDef &def, std::uint64_t digit) {
  switch (def.kind) {
  case ParamKind::integer_range:
    return static_cast<std::int64_t>(def.lo) + static_cast<std::int64_t>(digit);
  case ParamKind::real_range:
    return def.lo;
  case ParamKind::categorical:
    return def.options[digit];
  }
  return def.lo;
}

} // namespace

std::string_view to_string(ParamKind kind) {
  switch (kind) {
  case ParamKind::integer_range:
    return "int";
  case ParamKind::real_range:
    return "real";
  case ParamKind::categorical:
    return "cat";
  }
  return "?";
}

HyperparameterDef HyperparameterDef::integer(std::string name, std::int64_t lo,
                                             std::int64_t hi) {
  HyperparameterDef def{std::move(name), ParamKind::integer_range,
                        static_cast<double>(lo), static_cast<double>(hi), {}};
  def.validate();
  return def;
}

HyperparameterDef HyperparameterDef::real(std::string name, double lo,
                                          double hi) {
  HyperparameterDef def{std::move(name), ParamKind::real_range, lo, hi, {}};
  def.validate();
  return def;
}

HyperparameterDef
HyperparameterDef::categorical(std::string name,
                               std::vector<std::string> options) {
  HyperparameterDef def{std::move(name), ParamKind::categorical, 0.0, 0.0,
                        std::move(options)};
  def.validate();
  return def;
}

std::optional<std::uint64_t> HyperparameterDef::cardinality() const {
  switch (kind) {
  case ParamKind::integer_range:
    return static_cast<std::uint64_t>(hi - lo) + 1;
  case ParamKind::real_range:
    if (lo == hi) return 1;
    return std::nullopt;
  case ParamKind::categorical:
    return options.size();
  }
  return std::nullopt;
}

void HyperparameterDef::validate() const {
  if (!valid_label(name)) {
    throw SpaceError("invalid hyperparameter name '" + name + "'");
  }
  switch (kind) {
  case ParamKind::integer_range:
    if (!is_integral(lo) || !is_integral(hi)) {
      throw SpaceError("integer bounds of '" + name + "' must be integers");
    }
    [[fallthrough]];
  case ParamKind::real_range:
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw SpaceError("bounds of '" + name + "' must satisfy lo <= hi");
    }
    if (!options.empty()) {
      throw SpaceError("range hyperparameter '" + name + "' has options");
    }
    break;
  case ParamKind::categorical: {
    if (options.empty()) {
      throw SpaceError("categorical '" + name + "' has no options");
    }
    std::unordered_set<std::string> seen;
    for (const auto &opt : options) {
      if (!valid_label(opt)) {
        throw SpaceError("invalid option '" + opt + "' in '" + name + "'");
      }
      if (!seen.insert(opt).second) {
        throw SpaceError("duplicate option '" + opt + "' in '" + name + "'");
      }
    }
    break;
  }
  }
}

std::string format_value(const ParamValue &value) {
  if (const auto *i = std::get_if<std::int64_t>(&value)) {
    return std::to_string(*i);
  }
  if (const auto *d = std::get_if<double>(&value)) {
    std::ostringstream os;
    os.precision(17);
    os << *d;
    return os.str();
  }
  return std::get<std::string>(value);
}

SearchSpace::SearchSpace(std::vector<HyperparameterDef> params)
    : params_(std::move(params)) {
  if (params_.empty()) {
    throw SpaceError("search space needs at least one hyperparameter");
  }
  std::unordered_set<std::string> names;
  for (const auto &p : params_) {
    p.validate();
    if (!names.insert(p.name).second) {
      throw SpaceError("duplicate hyperparameter name '" + p.name + "'");
    }
  }
}

std::optional<std::uint64_t> SearchSpace::cardinality() const {
  std::uint64_t total = 1;
  for (const auto &p : params_) {
    const auto c = p.cardinality();
    if (!c) return std::nullopt;
    if (*c != 0 && total > std::numeric_limits<std::uint64_t>::max() / *c) {
      return std::nullopt;
    }
    total *= *c;
  }
  return total;
}

void SearchSpace::check(const Configuration &cfg) const {
  if (cfg.size() != params_.size()) {
    throw SpaceError("configuration has " + std::to_string(cfg.size()) +
                     " values, space has " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto &p = params_[i];
    const auto &v = cfg.values[i];
    switch (p.kind) {
    case ParamKind::integer_range: {
      const auto *x = std::get_if<std::int64_t>(&v);
      if (!x || *x < p.lo || *x > p.hi) {
        throw SpaceError("value of '" + p.name + "' outside its domain");
      }
      break;
    }
    case ParamKind::real_range: {
      const auto *x = std::get_if<double>(&v);
      if (!x || !(*x >= p.lo && *x <= p.hi)) {
        throw SpaceError("value of '" + p.name + "' outside its domain");
      }
      break;
    }
    case ParamKind::categorical: {
      const auto *x = std::get_if<std::string>(&v);
      if (!x || std::find(p.options.begin(), p.options.end(), *x) ==
                    p.options.end()) {
        throw SpaceError("value of '" + p.name + "' is not one of its options");
      }
      break;
    }
    }
  }
}

bool SearchSpace::contains(const Configuration &cfg) const {
  try {
    check(cfg);
    return true;
  } catch (const SpaceError &) {
    return false;
  }
}

NormalizedConfiguration normalize(const SearchSpace &space,
                                  const Configuration &cfg) {
  space.check(cfg);
  NormalizedConfiguration out;
  out.coords.reserve(space.dimension());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto &p = space.param(i);
    const auto &v = cfg.values[i];
    double u = 0.0;
    switch (p.kind) {
    case ParamKind::integer_range:
      if (p.hi > p.lo) {
        u = (static_cast<double>(std::get<std::int64_t>(v)) - p.lo) /
            (p.hi - p.lo);
      }
      break;
    case ParamKind::real_range:
      if (p.hi > p.lo) u = (std::get<double>(v) - p.lo) / (p.hi - p.lo);
      break;
    case ParamKind::categorical: {
      const auto m = p.options.size();
      if (m > 1) {
        const auto k = std::find(p.options.begin(), p.options.end(),
                                 std::get<std::string>(v)) -
                       p.options.begin();
        u = static_cast<double>(k) / static_cast<double>(m - 1);
      }
      break;
    }
    }
    out.coords.push_back(std::clamp(u, 0.0, 1.0));
  }
  return out;
}

Configuration denormalize(const SearchSpace &space,
                          std::span<const double> coords) {
  if (coords.size() != space.dimension()) {
    throw SpaceError("normalized configuration has wrong dimension");
  }
  Configuration cfg;
  cfg.values.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto &p = space.param(i);
    const double u = std::isfinite(coords[i]) ? std::clamp(coords[i], 0.0, 1.0)
                                              : 0.0;
    switch (p.kind) {
    case ParamKind::integer_range: {
      const double k = std::nearbyint(u * (p.hi - p.lo));
      cfg.values.emplace_back(static_cast<std::int64_t>(p.lo + k));
      break;
    }
    case ParamKind::real_range:
      cfg.values.emplace_back(std::clamp(p.lo + u * (p.hi - p.lo), p.lo, p.hi));
      break;
    case ParamKind::categorical: {
      const auto m = p.options.size();
      const auto k = static_cast<std::size_t>(
          std::nearbyint(u * static_cast<double>(m - 1)));
      cfg.values.emplace_back(p.options[std::min(k, m - 1)]);
      break;
    }
    }
  }
  return cfg;
}

ParamValue sample_value(const HyperparameterDef &def, Rng &rng) {
  switch (def.kind) {
  case ParamKind::integer_range: {
    std::uniform_int_distribution<std::int64_t> dist(
        static_cast<std::int64_t>(def.lo), static_cast<std::int64_t>(def.hi));
    return dist(rng);
  }
  case ParamKind::real_range: {
    if (def.lo == def.hi) return def.lo;
    std::uniform_real_distribution<double> dist(def.lo, def.hi);
    return dist(rng);
  }
  case ParamKind::categorical: {
    std::uniform_int_distribution<std::size_t> dist(0, def.options.size() - 1);
    return def.options[dist(rng)];
  }
  }
  return def.lo;
}

Configuration sample_uniform(const SearchSpace &space, Rng &rng) {
  Configuration cfg;
  cfg.values.reserve(space.dimension());
  for (const auto &p : space.params()) {
    cfg.values.push_back(sample_value(p, rng));
  }
  return cfg;
}

Configuration sample_novel(const SearchSpace &space, Rng &rng,
                           const std::set<Configuration> &exclude) {
  for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
    auto cfg = sample_uniform(space, rng);
    if (!exclude.contains(cfg)) return cfg;
  }
  const auto total = space.cardinality();
  if (!total || *total > kMaxEnumeration) {
    throw SpaceError("could not draw an unevaluated configuration");
  }
  std::vector<Configuration> remaining;
  for (std::uint64_t index = 0; index < *total; ++index) {
    Configuration cfg;
    std::uint64_t rest = index;
    for (const auto &p : space.params()) {
      const auto c = *p.cardinality();
      cfg.values.push_back(value_at(p, rest % c));
      rest /= c;
    }
    if (!exclude.contains(cfg)) remaining.push_back(std::move(cfg));
  }
  if (remaining.empty()) {
    throw SpaceError("search space exhausted: every configuration evaluated");
  }
  std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
  return remaining[pick(rng)];
}

HyperparameterDef parse_param_entry(std::string_view name,
                                    std::string_view definition) {
  std::istringstream in{std::string(definition)};
  std::string kind;
  in >> kind;
  std::vector<std::string> rest;
  for (std::string tok; in >> tok;) rest.push_back(tok);
  const std::string pname(trim(name));
  if (kind == "int" || kind == "real") {
    if (rest.size() != 2) {
      throw SpaceError("'" + pname + "': " + kind + " needs <lo> <hi>");
    }
    const double lo = parse_number(rest[0], pname);
    const double hi = parse_number(rest[1], pname);
    if (kind == "real") return HyperparameterDef::real(pname, lo, hi);
    if (!is_integral(lo) || !is_integral(hi)) {
      throw SpaceError("integer bounds of '" + pname + "' must be integers");
    }
    return HyperparameterDef::integer(pname, static_cast<std::int64_t>(lo),
                                      static_cast<std::int64_t>(hi));
  }
  if (kind == "cat") {
    return HyperparameterDef::categorical(pname, std::move(rest));
  }
  throw SpaceError("'" + pname + "': unknown kind '" + kind +
                   "' (expected int, real or cat)");
}

SearchSpace parse_search_space(std::string_view text) {
  std::vector<HyperparameterDef> params;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    auto line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw SpaceError("line " + std::to_string(line_no) +
                       ": expected '<name> = <kind> ...'");
    }
    params.push_back(parse_param_entry(line.substr(0, eq), line.substr(eq + 1)));
  }
  return SearchSpace(std::move(params));
}

} // namespace chpo
