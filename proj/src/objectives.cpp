#include "chpo/objectives.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace chpo {

namespace {

constexpr double kBraninMin = 0.39788735772973816;
constexpr double kHartmannMax = 3.322368011415515;

constexpr double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};
constexpr double kHartmannA[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                     {0.05, 10, 17, 0.1, 8, 14},
                                     {3, 3.5, 1.7, 10, 17, 8},
                                     {17, 8, 0.05, 10, 0.1, 14}};
constexpr double kHartmannP[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
constexpr double kHartmannArgmin[6] = {0.20169, 0.150011, 0.476874,
                                       0.275332, 0.311652, 0.6573};

double branin(double x1, double x2) {
  using std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

double hartmann6(std::span<const double> x) {
  double outer = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x[j] - kHartmannP[i][j];
      inner += kHartmannA[i][j] * d * d;
    }
    outer += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -outer;
}

// FNV-1a over the value bytes; stable across runs.
std::uint64_t hash_config(const Configuration &cfg, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (const auto &v : cfg.values) {
    if (const auto *d = std::get_if<double>(&v)) {
      mix(std::bit_cast<std::uint64_t>(*d));
    } else if (const auto *i = std::get_if<std::int64_t>(&v)) {
      mix(static_cast<std::uint64_t>(*i));
    } else {
      for (char c : std::get<std::string>(v)) mix(static_cast<unsigned char>(c));
    }
  }
  return h;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.emplace_back(trim(field));
  return fields;
}

bool parse_double(std::string_view s, double &out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

std::string_view to_string(SyntheticFunction fn) {
  switch (fn) {
  case SyntheticFunction::quadratic_bowl:
    return "quadratic-bowl";
  case SyntheticFunction::branin_2d:
    return "branin-2d";
  case SyntheticFunction::hartmann_6d:
    return "hartmann-6d";
  case SyntheticFunction::rastrigin:
    return "rastrigin";
  }
  return "?";
}

SyntheticFunction parse_synthetic_function(std::string_view text) {
  if (text == "quadratic-bowl") return SyntheticFunction::quadratic_bowl;
  if (text == "branin-2d") return SyntheticFunction::branin_2d;
  if (text == "hartmann-6d") return SyntheticFunction::hartmann_6d;
  if (text == "rastrigin" || text == "rastrigin-kd") {
    return SyntheticFunction::rastrigin;
  }
  throw std::invalid_argument("unknown synthetic function '" +
                              std::string(text) + "'");
}

SyntheticObjective::SyntheticObjective(SyntheticSettings settings)
    : settings_(settings) {
  if (settings_.noise_sd < 0.0) {
    throw std::invalid_argument("noise_sd must be non-negative");
  }
  std::vector<HyperparameterDef> params;
  auto add_active = [&](std::size_t k, double lo, double hi) {
    for (std::size_t i = 0; i < k; ++i) {
      params.push_back(HyperparameterDef::real("x" + std::to_string(i), lo, hi));
    }
  };
  switch (settings_.function) {
  case SyntheticFunction::quadratic_bowl:
    if (!(settings_.bowl_center >= 0.0 && settings_.bowl_center <= 1.0)) {
      throw std::invalid_argument("bowl center must lie in [0, 1]");
    }
    active_ = settings_.active_dims;
    add_active(active_, 0.0, 1.0);
    f_ideal_ = 1.0;
    break;
  case SyntheticFunction::branin_2d:
    active_ = 2;
    params.push_back(HyperparameterDef::real("x0", -5.0, 10.0));
    params.push_back(HyperparameterDef::real("x1", 0.0, 15.0));
    f_ideal_ = -kBraninMin;
    break;
  case SyntheticFunction::hartmann_6d:
    active_ = 6;
    add_active(6, 0.0, 1.0);
    f_ideal_ = kHartmannMax;
    break;
  case SyntheticFunction::rastrigin:
    active_ = settings_.active_dims;
    add_active(active_, -5.12, 5.12);
    f_ideal_ = 0.0;
    break;
  }
  if (active_ == 0) throw std::invalid_argument("need at least one active dim");
  for (std::size_t i = 0; i < settings_.dummy_dims; ++i) {
    params.push_back(HyperparameterDef::real("d" + std::to_string(i), 0.0, 1.0));
  }
  space_ = SearchSpace(std::move(params));
}

double SyntheticObjective::base_value(std::span<const double> x) const {
  switch (settings_.function) {
  case SyntheticFunction::quadratic_bowl: {
    double s = 0.0;
    for (double v : x) s += (v - settings_.bowl_center) * (v - settings_.bowl_center);
    return s;
  }
  case SyntheticFunction::branin_2d:
    return branin(x[0], x[1]);
  case SyntheticFunction::hartmann_6d:
    return hartmann6(x);
  case SyntheticFunction::rastrigin: {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return s;
  }
  }
  return 0.0;
}

double SyntheticObjective::operator()(const Configuration &cfg) const {
  space_.check(cfg);
  std::vector<double> x(active_);
  for (std::size_t i = 0; i < active_; ++i) x[i] = std::get<double>(cfg.values[i]);
  const double f = base_value(x);
  double score = settings_.function == SyntheticFunction::quadratic_bowl
                     ? 1.0 - f
                     : -f;
  if (settings_.noise_sd > 0.0) {
    std::mt19937_64 rng(hash_config(cfg, settings_.noise_seed));
    std::normal_distribution<double> noise(0.0, settings_.noise_sd);
    score += noise(rng);
  }
  return score;
}

Configuration SyntheticObjective::default_config() const {
  Configuration cfg;
  for (const auto &p : space_.params()) cfg.values.emplace_back(0.5 * (p.lo + p.hi));
  return cfg;
}

Configuration SyntheticObjective::optimum() const {
  Configuration cfg;
  for (std::size_t i = 0; i < active_; ++i) {
    switch (settings_.function) {
    case SyntheticFunction::quadratic_bowl:
      cfg.values.emplace_back(settings_.bowl_center);
      break;
    case SyntheticFunction::branin_2d:
      cfg.values.emplace_back(i == 0 ? std::numbers::pi : 2.275);
      break;
    case SyntheticFunction::hartmann_6d:
      cfg.values.emplace_back(kHartmannArgmin[i]);
      break;
    case SyntheticFunction::rastrigin:
      cfg.values.emplace_back(0.0);
      break;
    }
  }
  for (std::size_t i = 0; i < settings_.dummy_dims; ++i) cfg.values.emplace_back(0.0);
  return cfg;
}

TabularDataset parse_csv(std::string_view text, std::string_view label_column,
                         std::string name) {
  std::vector<std::vector<std::string>> lines;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    if (trim(line).empty()) continue;
    lines.push_back(split_csv_line(line));
  }
  if (lines.empty()) throw DatasetError(name + ": file is empty");
  const auto header = lines.front();
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw DatasetError(name + ": label column '" + std::string(label_column) +
                       "' not found");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const auto n_rows = lines.size() - 1;
  if (n_rows == 0) throw DatasetError(name + ": dataset has no rows");

  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].size() != header.size()) {
      throw DatasetError(name + ": row " + std::to_string(r) + " has " +
                         std::to_string(lines[r].size()) + " fields, expected " +
                         std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto &cell = lines[r][c];
      if (cell.empty() || cell == "?") {
        throw DatasetError(name + ": row " + std::to_string(r) + ", column '" +
                           header[c] + "': missing or unparseable value '" +
                           cell + "'");
      }
    }
  }

  TabularDataset ds;
  ds.name = std::move(name);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) ds.feature_names.push_back(header[c]);
  }
  ds.features.resize(static_cast<Eigen::Index>(n_rows),
                     static_cast<Eigen::Index>(ds.feature_names.size()));
  Eigen::Index fc = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    std::vector<double> column(n_rows);
    bool numeric = true;
    for (std::size_t r = 0; r < n_rows && numeric; ++r) {
      numeric = parse_double(lines[r + 1][c], column[r]);
    }
    if (!numeric) {
      std::unordered_map<std::string, double> codes;
      for (std::size_t r = 0; r < n_rows; ++r) {
        const auto [it, _] = codes.try_emplace(
            lines[r + 1][c], static_cast<double>(codes.size()));
        column[r] = it->second;
      }
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      ds.features(static_cast<Eigen::Index>(r), fc) = column[r];
    }
    ++fc;
  }
  std::unordered_map<std::string, int> class_codes;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto &cell = lines[r + 1][label_col];
    const auto [it, inserted] =
        class_codes.try_emplace(cell, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(cell);
    ds.labels.push_back(it->second);
  }
  if (ds.class_names.size() < 2) {
    throw DatasetError(ds.name + ": label column has fewer than two classes");
  }
  return ds;
}

TabularDataset load_csv(const std::filesystem::path &path,
                        std::string_view label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), label_column, path.stem().string());
}

std::map<std::string, DatasetEntry>
parse_dataset_registry(std::string_view text,
                       const std::filesystem::path &base_dir) {
  std::map<std::string, DatasetEntry> registry;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    std::istringstream rest{std::string(eq == std::string_view::npos
                                            ? std::string_view{}
                                            : line.substr(eq + 1))};
    std::string path, label, extra;
    if (eq == std::string_view::npos || !(rest >> path >> label) ||
        (rest >> extra)) {
      throw DatasetError("dataset registry line " + std::to_string(line_no) +
                         ": expected '<name> = <path> <label-column>'");
    }
    std::filesystem::path p(path);
    if (p.is_relative()) p = base_dir / p;
    registry[std::string(trim(line.substr(0, eq)))] = {p, label};
  }
  return registry;
}

FeatureSubsetObjective::FeatureSubsetObjective(TabularDataset data,
                                               FeatureSubsetSettings settings)
    : data_(std::move(data)), settings_(settings) {
  if (settings_.group_size == 0 || settings_.group_size > 16) {
    throw std::invalid_argument("group_size must be in [1, 16]");
  }
  if (settings_.k == 0) throw std::invalid_argument("k must be positive");
  if (settings_.folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (data_.columns() == 0) throw DatasetError(data_.name + ": no features");
  if (data_.rows() < 2 * settings_.folds) {
    throw DatasetError(data_.name + ": too few rows for " +
                       std::to_string(settings_.folds) + "-fold validation");
  }

  std::vector<HyperparameterDef> params;
  for (std::size_t start = 0, g = 0; start < data_.columns();
       start += settings_.group_size, ++g) {
    const auto width = std::min(settings_.group_size, data_.columns() - start);
    std::vector<std::string> options;
    for (std::size_t code = 0; code < (std::size_t{1} << width); ++code) {
      std::string label(width, '0');
      for (std::size_t j = 0; j < width; ++j) {
        if ((code >> j) & 1U) label[j] = '1';
      }
      options.push_back(std::move(label));
    }
    params.push_back(
        HyperparameterDef::categorical("g" + std::to_string(g), std::move(options)));
  }
  space_ = SearchSpace(std::move(params));

  // Stratified assignment: shuffle each class, then deal rows round-robin
  // with one counter running across classes.
  std::mt19937_64 rng(settings_.fold_seed);
  fold_of_.assign(data_.rows(), 0);
  const auto n_classes = data_.class_names.size();
  std::size_t dealer = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < data_.rows(); ++r) {
      if (data_.labels[r] == static_cast<int>(c)) members.push_back(r);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(members[i - 1], members[pick(rng)]);
    }
    for (auto r : members) fold_of_[r] = dealer++ % settings_.folds;
  }
  train_rows_.resize(settings_.folds);
  test_rows_.resize(settings_.folds);
  for (std::size_t r = 0; r < data_.rows(); ++r) {
    for (std::size_t f = 0; f < settings_.folds; ++f) {
      (fold_of_[r] == f ? test_rows_[f] : train_rows_[f]).push_back(r);
    }
  }
}

std::vector<bool> FeatureSubsetObjective::decode(const Configuration &cfg) const {
  space_.check(cfg);
  std::vector<bool> mask(data_.columns(), false);
  for (std::size_t g = 0; g < cfg.size(); ++g) {
    const auto &label = std::get<std::string>(cfg.values[g]);
    for (std::size_t j = 0; j < label.size(); ++j) {
      mask[g * settings_.group_size + j] = label[j] == '1';
    }
  }
  return mask;
}

Configuration FeatureSubsetObjective::all_features() const {
  Configuration cfg;
  for (const auto &p : space_.params()) cfg.values.emplace_back(p.options.back());
  return cfg;
}

double FeatureSubsetObjective::operator()(const Configuration &cfg) const {
  return evaluate_mask(decode(cfg));
}

double FeatureSubsetObjective::evaluate_mask(const std::vector<bool> &mask) const {
  if (mask.size() != data_.columns()) {
    throw std::invalid_argument("feature mask has wrong length");
  }
  std::vector<Eigen::Index> kept;
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c]) kept.push_back(static_cast<Eigen::Index>(c));
  }
  if (kept.empty()) return 0.0;

  const auto n_classes = data_.class_names.size();
  double accuracy_sum = 0.0;
  std::vector<std::pair<double, std::size_t>> dist;
  std::vector<std::size_t> votes(n_classes);
  for (std::size_t f = 0; f < settings_.folds; ++f) {
    const auto &train = train_rows_[f];
    const auto &test = test_rows_[f];
    // Min-max scaling fitted on the training fold only.
    const auto d = kept.size();
    std::vector<double> lo(d), span(d);
    for (std::size_t j = 0; j < d; ++j) {
      double mn = data_.features(static_cast<Eigen::Index>(train[0]), kept[j]);
      double mx = mn;
      for (auto r : train) {
        const double v = data_.features(static_cast<Eigen::Index>(r), kept[j]);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      lo[j] = mn;
      span[j] = mx > mn ? mx - mn : 0.0;
    }
    auto scaled = [&](std::size_t r, std::size_t j) {
      if (span[j] == 0.0) return 0.0;
      return (data_.features(static_cast<Eigen::Index>(r), kept[j]) - lo[j]) /
             span[j];
    };
    std::vector<double> train_x(train.size() * d);
    for (std::size_t i = 0; i < train.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) train_x[i * d + j] = scaled(train[i], j);
    }
    const auto k = std::min(settings_.k, train.size());
    std::size_t correct = 0;
    std::vector<double> q(d);
    for (auto r : test) {
      for (std::size_t j = 0; j < d; ++j) q[j] = scaled(r, j);
      dist.resize(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = train_x[i * d + j] - q[j];
          s += diff * diff;
        }
        dist[i] = {s, i};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                        dist.end());
      std::fill(votes.begin(), votes.end(), 0);
      for (std::size_t i = 0; i < k; ++i) {
        ++votes[static_cast<std::size_t>(data_.labels[train[dist[i].second]])];
      }
      const auto predicted = static_cast<int>(
          std::max_element(votes.begin(), votes.end()) - votes.begin());
      if (predicted == data_.labels[r]) ++correct;
    }
    accuracy_sum += static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return accuracy_sum / static_cast<double>(settings_.folds);
}

} // namespace chpo
