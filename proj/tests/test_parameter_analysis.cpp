#include <doctest.h>

#include <algorithm>

#include "chpo/parameter_analysis.hpp"

using namespace chpo;

namespace {

ExperienceSet scored(std::size_t t, const SearchSpace &space, std::uint64_t seed,
                     double (*f)(const Configuration &)) {
  Rng rng(seed);
  ExperienceSet exp;
  while (exp.size() < t) {
    auto cfg = sample_uniform(space, rng);
    if (!exp.contains(cfg)) {
      const double s = f(cfg);
      exp.add(std::move(cfg), s);
    }
  }
  return exp;
}

double first_dim_only(const Configuration &c) {
  const double x = std::get<double>(c.values[0]);
  return 1.0 - (x - 0.7) * (x - 0.7);
}

SearchSpace cube(std::size_t n) {
  std::vector<HyperparameterDef> p;
  for (std::size_t i = 0; i < n; ++i) {
    p.push_back(HyperparameterDef::real("p" + std::to_string(i), 0, 1));
  }
  return SearchSpace(std::move(p));
}

std::vector<int> labels_for(std::size_t t) {
  SearchSpace space = cube(1);
  ExperienceSet exp;
  // Insert in a scrambled order; labels follow score rank.
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t k = (i * 5 + 3) % t;
    exp.add(Configuration{{0.01 * static_cast<double>(k)}},
            static_cast<double>(k));
  }
  std::vector<int> out;
  for (const auto &r : label_experience(exp, space)) out.push_back(r.label);
  return out;
}

} // namespace

TEST_SUITE("parameter_analysis") {

TEST_CASE("performance classes") {
  CHECK(labels_for(7) == std::vector<int>{1, 1, 1, 2, 2, 2, 3});
  CHECK(labels_for(9) == std::vector<int>{1, 1, 1, 2, 2, 2, 3, 3, 3});
  CHECK(labels_for(3) == std::vector<int>{1, 2, 3});
  CHECK(labels_for(4) == std::vector<int>{1, 1, 2, 2});
  CHECK_THROWS(labels_for(2));
}

TEST_CASE("rows are in ascending score order") {
  const auto space = cube(1);
  ExperienceSet exp;
  exp.add(Configuration{{0.9}}, 3.0);
  exp.add(Configuration{{0.1}}, 1.0);
  exp.add(Configuration{{0.5}}, 2.0);
  const auto rows = label_experience(exp, space);
  CHECK(rows[0].features[0] == 0.1);
  CHECK(rows[1].features[0] == 0.5);
  CHECK(rows[2].features[0] == 0.9);
}

TEST_CASE("key parameter selection") {
  auto k = select_key_params({0.3, 0.25, 0.2, 0.15, 0.1});
  CHECK(k.indices == std::vector<std::size_t>{0, 1});
  CHECK(k.cumulative_importance == doctest::Approx(0.55));
  CHECK(select_key_params({0.6, 0.4}).indices == std::vector<std::size_t>{0});
  CHECK(select_key_params({0.1, 0.5, 0.4}).indices == std::vector<std::size_t>{1});
  CHECK(select_key_params({0.0, 0.0, 0.0}).indices ==
        std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("candidates copy the best entry outside the key parameters") {
  const auto space = cube(3);
  const auto exp = scored(30, space, 2, first_dim_only);
  const std::uint64_t seed = 5;
  ForestSettings fs;
  fs.seed = seed;
  const auto key = select_key_params(
      ForestModel::fit(label_experience(exp, space), fs).importances());
  const auto &best = exp.best().config;
  const auto out = propose_parameter_analysis(exp, space, 6, seed);
  REQUIRE(out.size() == 6);
  for (const auto &c : out) {
    CHECK_FALSE(exp.contains(c));
    for (std::size_t d = 0; d < 3; ++d) {
      const bool is_key = std::find(key.indices.begin(), key.indices.end(), d) !=
                          key.indices.end();
      if (!is_key) CHECK(c.values[d] == best.values[d]);
    }
  }
}

TEST_CASE("the decisive dimension is found") {
  const auto space = cube(4);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto exp = scored(60, space, 100 + seed, first_dim_only);
    ForestSettings fs;
    fs.seed = seed;
    const auto key = select_key_params(
        ForestModel::fit(label_experience(exp, space), fs).importances());
    hits += std::find(key.indices.begin(), key.indices.end(), 0) != key.indices.end();
  }
  CHECK(hits >= 9);
}

TEST_CASE("exhausted key grids fall back to fresh samples") {
  // One binary key dimension: at most one new point differs from best there.
  SearchSpace space({HyperparameterDef::categorical("k", {"a", "b"}),
                     HyperparameterDef::integer("z", 0, 3)});
  ExperienceSet exp;
  exp.add(Configuration{{std::string("a"), std::int64_t{0}}}, 0.1);
  exp.add(Configuration{{std::string("b"), std::int64_t{0}}}, 0.9);
  exp.add(Configuration{{std::string("a"), std::int64_t{1}}}, 0.2);
  const auto out = propose_parameter_analysis(exp, space, 4, 1);
  REQUIRE(out.size() == 4);
  std::set<Configuration> seen;
  for (const auto &c : out) {
    CHECK(space.contains(c));
    CHECK_FALSE(exp.contains(c));
    CHECK(seen.insert(c).second);
  }
}

TEST_CASE("proposals are deterministic") {
  const auto space = cube(3);
  const auto exp = scored(12, space, 4, first_dim_only);
  CHECK(propose_parameter_analysis(exp, space, 3, 9) ==
        propose_parameter_analysis(exp, space, 3, 9));
  CHECK_THROWS(propose_parameter_analysis(exp, space, 0, 9));
}

} // TEST_SUITE
