#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "chpo/objectives.hpp"

using namespace chpo;

namespace {

// All-features 3-fold k-NN accuracy on zoo with fold seed 0.
constexpr double ZOO_ALL_FEATURES = 0.92067736185383253;

const std::filesystem::path kZoo = std::filesystem::path(CHPO_SOURCE_DIR) / "data" / "zoo.csv";

double branin_ref(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double b = 5.1 / (4 * pi * pi), c = 5 / pi, t = 1 / (8 * pi);
  return std::pow(x2 - b * x1 * x1 + c * x1 - 6, 2) + 10 * (1 - t) * std::cos(x1) + 10;
}

Configuration reals(std::initializer_list<double> v) {
  Configuration c;
  for (double x : v) c.values.emplace_back(x);
  return c;
}

// Plain k-NN cross-validation written against the public fold assignment.
double knn_oracle(const TabularDataset &d, const std::vector<std::size_t> &fold_of,
                  const std::vector<bool> &mask, std::size_t k, std::size_t folds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c]) cols.push_back(c);
  }
  if (cols.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t r = 0; r < d.rows(); ++r) (fold_of[r] == f ? te : tr).push_back(r);
    std::map<std::size_t, std::pair<double, double>> range;
    for (auto c : cols) {
      double lo = 1e300, hi = -1e300;
      for (auto r : tr) {
        lo = std::min(lo, d.features(r, c));
        hi = std::max(hi, d.features(r, c));
      }
      range[c] = {lo, hi};
    }
    auto sc = [&](std::size_t r, std::size_t c) {
      const auto [lo, hi] = range[c];
      return hi > lo ? (d.features(r, c) - lo) / (hi - lo) : 0.0;
    };
    int correct = 0;
    for (auto q : te) {
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t i = 0; i < tr.size(); ++i) {
        double s = 0.0;
        for (auto c : cols) s += std::pow(sc(tr[i], c) - sc(q, c), 2);
        dist.push_back({s, i});
      }
      std::sort(dist.begin(), dist.end());
      std::map<int, int> votes;
      for (std::size_t i = 0; i < k; ++i) ++votes[d.labels[tr[dist[i].second]]];
      int best = -1, best_votes = -1;
      for (const auto &[label, v] : votes) {
        if (v > best_votes) best = label, best_votes = v;
      }
      correct += best == d.labels[q];
    }
    total += static_cast<double>(correct) / static_cast<double>(te.size());
  }
  return total / static_cast<double>(folds);
}

} // namespace

TEST_SUITE("objectives") {

TEST_CASE("branin") {
  SyntheticObjective obj({.function = SyntheticFunction::branin_2d});
  const std::vector<double> opt{std::numbers::pi, 2.275};
  CHECK(obj.base_value(opt) == doctest::Approx(0.397887).epsilon(1e-4));
  CHECK(obj.base_value(opt) == doctest::Approx(branin_ref(std::numbers::pi, 2.275)));
  const std::vector<double> other{-3.0, 12.0};
  CHECK(obj.base_value(other) == doctest::Approx(branin_ref(-3.0, 12.0)));
  CHECK(obj(obj.optimum()) == doctest::Approx(obj.f_ideal()).epsilon(1e-6));
  CHECK(obj.space().param(0).lo == -5.0);
  CHECK(obj.space().param(1).hi == 15.0);
}

TEST_CASE("hartmann-6d reaches its known maximum") {
  SyntheticObjective obj({.function = SyntheticFunction::hartmann_6d});
  const auto at_opt = obj(reals({0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573}));
  CHECK(at_opt == doctest::Approx(3.32237).epsilon(1e-5));
  CHECK(obj.f_ideal() == doctest::Approx(3.32237).epsilon(1e-5));
  CHECK(obj(obj.default_config()) < at_opt);
}

TEST_CASE("quadratic bowl and rastrigin") {
  SyntheticObjective bowl({.active_dims = 3});
  CHECK(bowl(bowl.optimum()) == bowl.f_ideal());
  CHECK(bowl(reals({0.0, 0.0, 0.0})) == doctest::Approx(1.0 - 3 * 0.09));
  SyntheticObjective rast({.function = SyntheticFunction::rastrigin, .active_dims = 2});
  CHECK(rast(reals({0.0, 0.0})) == 0.0);
  CHECK(rast(reals({1.0, 0.0})) == doctest::Approx(-1.0));
}

TEST_CASE("dummy dimensions are inert") {
  SyntheticObjective obj({.active_dims = 2, .dummy_dims = 8});
  REQUIRE(obj.space().dimension() == 10);
  CHECK(obj.space().param(2).name == "d0");
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    auto a = sample_uniform(obj.space(), rng);
    auto b = sample_uniform(obj.space(), rng);
    b.values[0] = a.values[0];
    b.values[1] = a.values[1];
    CHECK(obj(a) == obj(b));
  }
}

TEST_CASE("noise is a deterministic function of the configuration") {
  SyntheticObjective obj({.noise_sd = 0.1, .noise_seed = 4});
  SyntheticObjective quiet({});
  const auto c = reals({0.2, 0.6});
  CHECK(obj(c) == obj(c));
  CHECK(obj(c) != quiet(c));
  SyntheticObjective other({.noise_sd = 0.1, .noise_seed = 5});
  CHECK(obj(c) != other(c));
}

TEST_CASE("function names") {
  CHECK(parse_synthetic_function("hartmann-6d") == SyntheticFunction::hartmann_6d);
  CHECK(to_string(SyntheticFunction::branin_2d) == "branin-2d");
  CHECK_THROWS(parse_synthetic_function("ackley"));
}

TEST_CASE("zoo loads with the published shape") {
  const auto zoo = load_csv(kZoo, "type");
  CHECK(zoo.rows() == 101);
  CHECK(zoo.columns() == 17);
  CHECK(zoo.class_names.size() == 7);
}

TEST_CASE("csv errors") {
  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,x\n2,y\n", "label"),
                       doctest::Contains("label"), DatasetError);
  CHECK_THROWS_AS(parse_csv("a,label\n", "label"), DatasetError);
  CHECK_THROWS_AS(parse_csv("", "label"), DatasetError);
  CHECK_THROWS_WITH_AS(parse_csv("a,label\n1,x\n?,y\n", "label"),
                       doctest::Contains("row 2"), DatasetError);
  CHECK_THROWS_AS(parse_csv("a,label\n1,x\n2\n", "label"), DatasetError);
  CHECK_THROWS_AS(parse_csv("a,label\n1,x\n2,x\n", "label"), DatasetError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "label"), DatasetError);
}

TEST_CASE("csv codes text columns by first appearance") {
  const auto d = parse_csv("color,size,label\nred,1.5,b\nblue,2,a\nred,3,b\n", "label");
  CHECK(d.features(0, 0) == 0.0);
  CHECK(d.features(1, 0) == 1.0);
  CHECK(d.features(2, 1) == 3.0);
  CHECK(d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.class_names == std::vector<std::string>{"b", "a"});
}

TEST_CASE("dataset registry") {
  const auto reg = parse_dataset_registry("# c\nzoo = zoo.csv type\n", "/data");
  REQUIRE(reg.contains("zoo"));
  CHECK(reg.at("zoo").path == std::filesystem::path("/data/zoo.csv"));
  CHECK(reg.at("zoo").label_column == "type");
  CHECK_THROWS_AS(parse_dataset_registry("zoo zoo.csv\n", "/"), DatasetError);
}

TEST_CASE("feature groups decode little-endian") {
  FeatureSubsetObjective obj(load_csv(kZoo, "type"));
  const auto &space = obj.space();
  REQUIRE(space.dimension() == 6);
  CHECK(space.param(0).options.size() == 8);
  CHECK(space.param(5).options.size() == 4);  // short final group of 2
  CHECK(space.param(0).options[1] == "100");
  CHECK(space.param(0).options[6] == "011");
  Configuration cfg;
  cfg.values.emplace_back(std::string("100"));
  for (int g = 1; g < 5; ++g) cfg.values.emplace_back(std::string("000"));
  cfg.values.emplace_back(std::string("01"));
  const auto mask = obj.decode(cfg);
  std::vector<bool> expect(17, false);
  expect[0] = expect[16] = true;
  CHECK(mask == expect);
  CHECK(obj.decode(obj.all_features()) == std::vector<bool>(17, true));
}

TEST_CASE("folds are stratified") {
  FeatureSubsetObjective obj(load_csv(kZoo, "type"));
  const auto &d = obj.dataset();
  for (std::size_t c = 0; c < d.class_names.size(); ++c) {
    std::vector<int> per_fold(3);
    for (std::size_t r = 0; r < d.rows(); ++r) {
      if (d.labels[r] == static_cast<int>(c)) ++per_fold[obj.fold_of()[r]];
    }
    const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("k-NN accuracy agrees with an independent implementation") {
  FeatureSubsetObjective obj(load_csv(kZoo, "type"));
  Rng rng(8);
  for (int i = 0; i < 12; ++i) {
    const auto cfg = i == 0 ? obj.all_features() : sample_uniform(obj.space(), rng);
    const auto mask = obj.decode(cfg);
    CHECK(obj(cfg) == doctest::Approx(knn_oracle(obj.dataset(), obj.fold_of(), mask, 5, 3))
                          .epsilon(1e-12));
  }
  CHECK(obj.evaluate_mask(std::vector<bool>(17, false)) == 0.0);
}

TEST_CASE("zoo accuracy is reproducible and pinned") {
  FeatureSubsetObjective a(load_csv(kZoo, "type"));
  FeatureSubsetObjective b(load_csv(kZoo, "type"));
  const double all = a(a.all_features());
  CHECK(all == b(b.all_features()));
  CHECK(all == doctest::Approx(ZOO_ALL_FEATURES).epsilon(1e-15));
}

} // TEST_SUITE
