// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chpo/baselines.hpp"
#include "chpo/driver.hpp"
#include "chpo/experience.hpp"
#include "chpo/harness.hpp"
#include "chpo/neuralnet.hpp"
#include "chpo/objectives.hpp"
#include "chpo/random_forest.hpp"

using namespace chpo;

namespace {

const std::filesystem::path kSpecs = std::filesystem::path(CHPO_SOURCE_DIR) / "specs";

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool ok = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

RunOptions all_cores() {
  return {.workers = std::max(1u, std::thread::hardware_concurrency())};
}

const ReportRow &row(const Report &r, const std::string &name) {
  for (const auto &x : r.rows) {
    if (x.algorithm == name) return x;
  }
  throw std::runtime_error("report has no row " + name);
}

std::string body(const Report &r) {
  std::ostringstream out;
  write_report(out, r);
  return report_body(out.str());
}

// Paired best-score differences a - b over repetitions, as mean and t.
std::pair<double, double> paired(const Report &r, const std::string &a,
                                 const std::string &b) {
  std::map<std::size_t, double> sa, sb;
  for (const auto &run : r.runs) {
    if (!run.result) continue;
    if (run.algorithm == a) sa[run.repetition] = run.result->best_score;
    if (run.algorithm == b) sb[run.repetition] = run.result->best_score;
  }
  std::vector<double> d;
  for (const auto &[rep, v] : sa) {
    if (sb.contains(rep)) d.push_back(v - sb[rep]);
  }
  const double n = static_cast<double>(d.size());
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  return {mean, se > 0.0 ? mean / se : 0.0};
}

// --- 1 -------------------------------------------------------------------

struct SweepObjective {
  std::string name;
  SyntheticSettings settings;
};

Verdict budget_invariant() {
  const std::vector<SweepObjective> objectives{
      {"bowl", {.active_dims = 2}},
      {"branin", {.function = SyntheticFunction::branin_2d}},
      {"hartmann", {.function = SyntheticFunction::hartmann_6d}},
      {"bowl+dummy", {.active_dims = 2, .dummy_dims = 3}},
  };
  // Seeds per (algorithm, N). The trained proposers cost O(N^2) per round,
  // so the sweep leans on cheap cells for breadth.
  const std::vector<std::string> algos{"rs", "gs", "bo", "et", "hea", "paa"};
  auto seeds_for = [](const std::string &a, std::size_t n) -> std::size_t {
    if (n <= 16) return 10;
    const bool trained = a == "et" || a == "hea";
    if (n == 64) return trained ? 3 : 8;
    return trained ? 1 : 10;
  };

  const auto t0 = Clock::now();
  std::size_t cases = 0, passed = 0;
  std::string first_failure;
  for (std::size_t n : {8, 16, 64, 128}) {
    const std::size_t m = n == 8 ? 1 : n == 16 ? 2 : 5;
    for (const auto &algo : algos) {
      for (std::uint64_t seed = 0; seed < seeds_for(algo, n); ++seed) {
        const auto &spec = objectives[(seed + cases) % objectives.size()];
        SyntheticObjective obj(spec.settings);
        std::size_t calls = 0;
        ChpoProblem problem;
        problem.space = obj.space();
        problem.objective = [&](const Configuration &c) {
          ++calls;
          return obj(c);
        };
        problem.f_ideal = obj.f_ideal();
        problem.budget = n;
        problem.default_config = obj.default_config();

        std::size_t expect = n;
        RunResult r;
        if (algo == "rs") {
          r = random_search(problem, seed);
        } else if (algo == "gs") {
          const auto levels = grid_levels(n, obj.space().dimension());
          expect = std::accumulate(levels.begin(), levels.end(), std::size_t{1},
                                   std::multiplies<>());
          r = grid_search(problem, seed);
        } else if (algo == "bo") {
          r = bayes_opt(problem, seed);
        } else {
          const auto variant = algo == "et"    ? EtVariant::full
                               : algo == "hea" ? EtVariant::he_only
                                               : EtVariant::pa_only;
          r = solve(problem, {.m = m, .seed = seed, .variant = variant});
        }
        std::set<Configuration> distinct;
        for (const auto &rec : r.log) distinct.insert(rec.config);
        const bool ok = calls == expect && expect <= n && r.log.size() == calls &&
                        r.evaluations_used == calls && distinct.size() == calls;
        ++cases;
        passed += ok;
        if (!ok && first_failure.empty()) {
          first_failure = format(" first failure %s N=%zu seed=%llu on %s: %zu calls, "
                                 "expected %zu;",
                                 algo.c_str(), n, static_cast<unsigned long long>(seed),
                                 spec.name.c_str(), calls, expect);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {passed == cases && cases >= 200 && secs < 60.0,
          format("%zu/%zu cases exact;%s %.1f s (limit 60 s)", passed, cases,
                 first_failure.c_str(), secs)};
}

// --- 2 -------------------------------------------------------------------

Verdict budget_arithmetic() {
  const auto a = budget_plan(128, 0.5, 5);
  const auto b = budget_plan(10, 0.5, 1);
  return {a == BudgetPlan{68, 6} && b == BudgetPlan{6, 2},
          format("plan(128,0.5,5)=(%zu,%zu) plan(10,0.5,1)=(%zu,%zu)", a.initial_count,
                 a.per_method_batch, b.initial_count, b.per_method_batch)};
}

// --- 3 -------------------------------------------------------------------

Verdict formulas() {
  int bad = 0;
  // Each example must equal the same expression evaluated by hand in double,
  // and sit within rounding of its decimal value.
  auto expect = [&](double got, double by_hand, double decimal) {
    if (got != by_hand || std::abs(got - decimal) > 1e-12 * std::max(1.0, std::abs(decimal))) {
      ++bad;
    }
  };
  expect(pdiffer(0.5, 0.6), (0.6 - 0.5) / 0.5 * 100.0, 20.0);
  expect(pdiffer(0.7, 0.7), 0.0, 0.0);
  expect(pdiffer(0.0, 0.1), 0.1 / 1e-9 * 100.0, 1e10);
  expect(pspace(0.8, 1.0), (1.0 - 0.8) / 0.8 * 100.0, 25.0);
  expect(pspace(1.0, 1.0), 0.0, 0.0);
  expect(pspace(0.5, 1.0), 0.5 / 0.5 * 100.0, 100.0);
  expect(pirate(0.6, 0.5), (0.6 - 0.5) / 0.5 * 100.0, 20.0);
  expect(pirate(0.5, 0.5), 0.0, 0.0);
  expect(pirate(0.45, 0.5), (0.45 - 0.5) / 0.5 * 100.0, -10.0);

  const SearchSpace unit({HyperparameterDef::real("a", 0, 1),
                          HyperparameterDef::real("b", 0, 1)});
  const Configuration ca{{0.2, 0.9}}, cb{{0.5, 0.7}};
  const auto d = cdiffer(ca, cb, unit);
  if (d != std::vector<double>{0.5 - 0.2, 0.7 - 0.9}) ++bad;
  if (cdiffer(ca, ca, unit) != std::vector<double>{0.0, 0.0}) ++bad;

  // Ordered-pair triples against brute force.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int counts_ok = 0;
  for (std::size_t t = 2; t <= 12; ++t) {
    ExperienceSet exp;
    while (exp.size() < t) exp.add(Configuration{{u(rng), u(rng)}}, u(rng));
    std::vector<std::tuple<std::vector<double>, double, std::vector<double>>> brute;
    for (std::size_t j = 0; j < t; ++j) {
      for (std::size_t i = 0; i < t; ++i) {
        if (i == j) continue;
        const auto &src = exp[j].config.values, &dst = exp[i].config.values;
        const double s0 = std::get<double>(src[0]), s1 = std::get<double>(src[1]);
        const double d0 = std::get<double>(dst[0]), d1 = std::get<double>(dst[1]);
        brute.emplace_back(std::vector<double>{s0, s1},
                           pdiffer(exp[j].score, exp[i].score),
                           std::vector<double>{d0 - s0, d1 - s1});
      }
    }
    std::vector<std::tuple<std::vector<double>, double, std::vector<double>>> got;
    for (const auto &tr : enumerate_triples(exp, unit)) {
      got.emplace_back(tr.base.coords, tr.pdiff, tr.adjust);
    }
    std::sort(brute.begin(), brute.end());
    std::sort(got.begin(), got.end());
    counts_ok += got == brute && brute.size() == t * (t - 1);
  }
  if (counts_ok != 11) ++bad;
  return {bad == 0, format("%d mismatches; triple counts t(t-1) agree for %d/11 sizes", bad,
                           counts_ok)};
}

// --- 4 -------------------------------------------------------------------

Verdict gradients() {
  const auto t0 = Clock::now();
  const std::vector<std::vector<std::size_t>> shapes{
      {3, 8, 2}, {5, 16, 16, 5}, {2, 4, 1}, {7, 14, 14, 1}, {1, 3, 3}};
  int cases = 0, ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const auto &sizes : shapes) {
      std::mt19937_64 rng(seed * 977 + sizes.size());
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      TrainingData data{Eigen::MatrixXd(sizes.front(), 7), Eigen::MatrixXd(sizes.back(), 7)};
      data.inputs = data.inputs.unaryExpr([&](double) { return u(rng); });
      data.targets = data.targets.unaryExpr([&](double) { return u(rng); });
      auto net = MlpNetwork::init(sizes, seed + 1000);
      const auto analytic = net.gradient(data);
      auto params = net.parameters();
      double diff = 0.0, na = 0.0, nn = 0.0;
      const double h = 1e-5;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        net.set_parameters(params);
        const double up = net.objective(data);
        params[i] = keep - h;
        net.set_parameters(params);
        const double down = net.objective(data);
        params[i] = keep;
        const double numeric = (up - down) / (2 * h);
        diff += (numeric - analytic[i]) * (numeric - analytic[i]);
        na += analytic[i] * analytic[i];
        nn += numeric * numeric;
      }
      net.set_parameters(params);
      const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
      worst = std::max(worst, rel);
      ++cases;
      ok += rel < 1e-4;
    }
  }
  const double secs = seconds_since(t0);
  return {ok == cases && cases >= 20 && secs < 10.0,
          format("%d/%d cases below 1e-4, worst relative error %.2e; %.2f s (limit 10 s)", ok,
                 cases, worst, secs)};
}

// --- 5 -------------------------------------------------------------------

Verdict forest_importance() {
  const auto t0 = Clock::now();
  int strict = 0, sums = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed + 500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<LabeledRow> rows(500);
    for (auto &r : rows) {
      r.features.resize(5);
      for (auto &f : r.features) f = u(rng);
      r.label = r.features[0] > 0.5 ? 1 : 0;
    }
    const auto forest = ForestModel::fit(rows, {.seed = seed});
    const auto &imp = forest.importances();
    bool largest = true;
    for (std::size_t f = 1; f < imp.size(); ++f) largest = largest && imp[0] > imp[f];
    strict += largest;
    sums += std::abs(std::accumulate(imp.begin(), imp.end(), 0.0) - 1.0) <= 1e-9;
  }
  const double secs = seconds_since(t0);
  return {strict >= 9 && sums == 10 && secs < 30.0,
          format("decisive feature strictly largest in %d/10 seeds, sum 1+-1e-9 in %d/10; "
                 "%.1f s (limit 30 s)",
                 strict, sums, secs)};
}

// --- 6 -------------------------------------------------------------------

Report bowl_dummy_report;

Verdict pruning() {
  const auto t0 = Clock::now();
  const auto spec = load_experiment_spec(kSpecs / "bowl_dummy.spec");
  if (spec.budget != 64 || spec.repetitions != 20 ||
      spec.problem.synthetic.active_dims != 2 || spec.problem.synthetic.dummy_dims != 8) {
    return {false, "bowl_dummy.spec does not describe the required setup"};
  }
  bowl_dummy_report = run_experiment(spec, all_cores());
  const auto &paa = row(bowl_dummy_report, "paa");
  const auto &rs = row(bowl_dummy_report, "rs");
  const auto [md, t] = paired(bowl_dummy_report, "paa", "rs");
  const double secs = seconds_since(t0);
  return {!bowl_dummy_report.failed && paa.mean_best >= rs.mean_best && secs < 120.0,
          format("mean best pa-only %.6f vs rs %.6f (paired diff %+.6f, t=%.2f); %.1f s "
                 "(limit 120 s)",
                 paa.mean_best, rs.mean_best, md, t, secs)};
}

// --- 7, 8 ----------------------------------------------------------------

Report hartmann_report, zoo_report;
double end_to_end_seconds = 0.0;

Verdict end_to_end() {
  const auto t0 = Clock::now();
  const auto hspec = load_experiment_spec(kSpecs / "hartmann.spec");
  const auto zspec = load_experiment_spec(kSpecs / "zoo.spec");
  if (hspec.budget != 64 || hspec.repetitions != 30 || zspec.budget != 128 ||
      zspec.repetitions != 30) {
    return {false, "hartmann.spec or zoo.spec does not describe the required setup"};
  }
  hartmann_report = run_experiment(hspec, all_cores());
  zoo_report = run_experiment(zspec, all_cores());
  end_to_end_seconds = seconds_since(t0);
  const auto &h_et = row(hartmann_report, "et"), &h_rs = row(hartmann_report, "rs");
  const auto &z_et = row(zoo_report, "et"), &z_rs = row(zoo_report, "rs"),
             &z_gs = row(zoo_report, "gs");
  const auto [hd, ht] = paired(hartmann_report, "et", "rs");
  const auto [zd, zt] = paired(zoo_report, "et", "rs");
  const bool ok = !hartmann_report.failed && !zoo_report.failed &&
                  h_et.mean_best >= h_rs.mean_best && z_et.mean_best >= z_rs.mean_best &&
                  z_et.mean > z_gs.mean && end_to_end_seconds < 1800.0;
  return {ok, format("hartmann best et %.5f vs rs %.5f (t=%.2f); zoo best et %.5f vs rs %.5f "
                     "(t=%.2f); zoo pirate et %.3f%% vs gs %.3f%% [diffs %+.5f, %+.5f]; "
                     "%.0f s (limit 1800 s)",
                     h_et.mean_best, h_rs.mean_best, ht, z_et.mean_best, z_rs.mean_best, zt,
                     z_et.mean, z_gs.mean, hd, zd, end_to_end_seconds)};
}

Verdict pirate_sanity() {
  if (zoo_report.rows.empty()) return {false, "zoo run missing"};
  const auto &et = row(zoo_report, "et");
  return {et.mean > 0.0 && et.metric == "pirate",
          format("mean pirate et %.3f%% (sd %.3f) over %zu reps", et.mean, et.stddev,
                 et.repetitions)};
}

// --- 9 -------------------------------------------------------------------

Verdict determinism() {
  int same = 0, total = 0;
  std::string which;
  auto compare = [&](const std::string &name, const Report &first, const Report &again) {
    ++total;
    if (body(first) == body(again)) {
      ++same;
    } else {
      which += " " + name;
    }
  };
  const auto custom = load_experiment_spec(kSpecs / "custom_space.spec");
  compare("custom_space", run_experiment(custom), run_experiment(custom, all_cores()));
  if (!bowl_dummy_report.rows.empty()) {
    compare("bowl_dummy", bowl_dummy_report,
            run_experiment(load_experiment_spec(kSpecs / "bowl_dummy.spec")));
  }
  if (!hartmann_report.rows.empty()) {
    compare("hartmann", hartmann_report,
            run_experiment(load_experiment_spec(kSpecs / "hartmann.spec")));
  }
  const auto sens = load_experiment_spec(kSpecs / "sensitivity.spec");
  compare("sensitivity", run_sensitivity(sens, *sens.sensitivity),
          run_sensitivity(sens, *sens.sensitivity, all_cores()));
  return {same == total && total == 4,
          format("%d/%d reruns byte-identical%s", same, total,
                 which.empty() ? "" : (";" + which + " differ").c_str())};
}

// --- 10 ------------------------------------------------------------------

Verdict sensitivity() {
  const auto spec = load_experiment_spec(kSpecs / "sensitivity.spec");
  std::string trend;
  int bad = 0;
  for (const auto &[axis, values] :
       std::vector<std::pair<std::string, std::vector<double>>>{{"p", {0.1, 0.5, 0.9}},
                                                               {"m", {1, 5, 10}}}) {
    const auto report = run_sensitivity(spec, {axis, values}, all_cores());
    if (report.rows.size() != values.size()) ++bad;
    for (std::size_t i = 0; i < std::min(values.size(), report.rows.size()); ++i) {
      const auto &r = report.rows[i];
      std::ostringstream label;
      label << spec.algorithms[0].name << "[" << axis << "=" << values[i] << "]";
      const bool ok = r.algorithm == label.str() && r.status == "ok" &&
                      r.repetitions == spec.repetitions &&
                      r.evaluations == spec.budget * spec.repetitions &&
                      std::isfinite(r.mean) && std::isfinite(r.stddev) &&
                      std::isfinite(r.mean_best) && std::isfinite(r.stddev_best);
      bad += !ok;
      trend += format(" %s=%.4f", r.algorithm.c_str(), r.mean_best);
    }
  }
  return {bad == 0, format("6 rows expected, %d bad; mean best:%s", bad, trend.c_str())};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"budget invariant", budget_invariant},
      {"budget arithmetic", budget_arithmetic},
      {"formula examples", formulas},
      {"gradient check", gradients},
      {"forest importance", forest_importance},
      {"pruning on dummy dimensions", pruning},
      {"end-to-end direction", end_to_end},
      {"zoo pirate sanity", pirate_sanity},
      {"determinism", determinism},
      {"sensitivity rows", sensitivity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.ok;
    std::printf("[%s] %2zu %s: %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
