#include "chpo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace chpo {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

template <typename T>
T parse_num(std::string_view value, std::string_view key, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw SpecError(where(line) + "invalid value '" + std::string(value) +
                    "' for '" + std::string(key) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw SpecError(where(line) + "non-finite value for '" +
                      std::string(key) + "'");
    }
  }
  return v;
}

std::vector<double> parse_list(std::string_view value, std::string_view key,
                               std::size_t line) {
  std::vector<double> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(parse_num<double>(item, key, line));
    value = comma == std::string_view::npos ? std::string_view{}
                                            : value.substr(comma + 1);
  }
  return out;
}

bool known_type(std::string_view t) {
  return t == "rs" || t == "gs" || t == "bo" || t == "et";
}

std::string fmt(double v, int decimals = 6) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string fmt_axis(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// 1 - mean squared distance to `center` in normalized coordinates.
double space_bowl(const SearchSpace &space, const Configuration &cfg,
                  double center) {
  const auto u = normalize(space, cfg);
  double s = 0.0;
  for (double c : u.coords) s += (c - center) * (c - center);
  return 1.0 - s / static_cast<double>(u.size());
}

} // namespace

void ExperimentSpec::validate() const {
  if (schema != kSpecSchemaVersion) {
    throw SpecError("unsupported schema version " + std::to_string(schema));
  }
  if (budget < 2) throw SpecError("budget must be at least 2");
  if (repetitions < 1) throw SpecError("repetitions must be at least 1");
  if (algorithms.empty()) throw SpecError("no algorithms configured");
  std::set<std::string> names;
  for (const auto &a : algorithms) {
    if (!known_type(a.type)) {
      throw SpecError("unknown algorithm '" + a.type + "'");
    }
    if (!names.insert(a.name).second) {
      throw SpecError("duplicate algorithm name '" + a.name + "'");
    }
  }
  if (problem.kind == ProblemKind::space_bowl && !problem.space) {
    throw SpecError("space-bowl problem needs a [space] section");
  }
  if (problem.kind == ProblemKind::feature_subset && problem.csv.empty() &&
      problem.dataset.empty()) {
    throw SpecError("feature-subset problem needs 'csv' or 'dataset'");
  }
  if (sensitivity) {
    if (sensitivity->axis != "p" && sensitivity->axis != "m") {
      throw SpecError("sensitivity axis must be 'p' or 'm'");
    }
    if (sensitivity->values.empty()) {
      throw SpecError("sensitivity needs at least one value");
    }
  }
}

ExperimentSpec parse_experiment_spec(std::string_view text,
                                     const std::filesystem::path &base_dir) {
  ExperimentSpec spec;
  spec.schema = 0;
  std::string section;
  AlgorithmSpec *alg = nullptr;
  std::string space_text;
  bool have_kind = false;
  std::size_t line_no = 0;
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    return path.is_relative() ? base_dir / path : path;
  };

  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw SpecError(where(line_no) + "unclosed section");
      const auto header = trim(line.substr(1, line.size() - 2));
      alg = nullptr;
      if (header.starts_with("algorithm")) {
        const auto name = trim(header.substr(9));
        if (name.empty()) {
          throw SpecError(where(line_no) + "algorithm section needs a name");
        }
        spec.algorithms.push_back({});
        alg = &spec.algorithms.back();
        alg->name = std::string(name);
        alg->type = alg->name;
        section = "algorithm";
      } else if (header == "problem" || header == "space" ||
                 header == "sensitivity") {
        section = std::string(header);
        if (section == "sensitivity" && !spec.sensitivity) {
          spec.sensitivity.emplace();
        }
      } else {
        throw SpecError(where(line_no) + "unknown section [" +
                        std::string(header) + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw SpecError(where(line_no) + "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    auto unknown = [&] {
      return SpecError(where(line_no) + "unknown key '" + key + "'" +
                       (section.empty() ? "" : " in [" + section + "]"));
    };

    if (section.empty()) {
      if (key == "schema") spec.schema = parse_num<int>(value, key, line_no);
      else if (key == "name") spec.name = std::string(value);
      else if (key == "budget") spec.budget = parse_num<std::size_t>(value, key, line_no);
      else if (key == "repetitions") spec.repetitions = parse_num<std::size_t>(value, key, line_no);
      else if (key == "seed") spec.seed = parse_num<std::uint64_t>(value, key, line_no);
      else throw unknown();
    } else if (section == "problem") {
      auto &pr = spec.problem;
      if (key == "kind") {
        have_kind = true;
        if (value == "synthetic") pr.kind = ProblemKind::synthetic;
        else if (value == "feature-subset") pr.kind = ProblemKind::feature_subset;
        else if (value == "space-bowl") pr.kind = ProblemKind::space_bowl;
        else throw SpecError(where(line_no) + "unknown problem kind '" +
                             std::string(value) + "'");
      } else if (key == "function") {
        try {
          pr.synthetic.function = parse_synthetic_function(value);
        } catch (const std::invalid_argument &e) {
          throw SpecError(where(line_no) + e.what());
        }
      } else if (key == "active_dims") pr.synthetic.active_dims = parse_num<std::size_t>(value, key, line_no);
      else if (key == "dummy_dims") pr.synthetic.dummy_dims = parse_num<std::size_t>(value, key, line_no);
      else if (key == "noise_sd") pr.synthetic.noise_sd = parse_num<double>(value, key, line_no);
      else if (key == "noise_seed") pr.synthetic.noise_seed = parse_num<std::uint64_t>(value, key, line_no);
      else if (key == "center") {
        pr.center = parse_num<double>(value, key, line_no);
        pr.synthetic.bowl_center = pr.center;
      }
      else if (key == "dataset") pr.dataset = std::string(value);
      else if (key == "registry") pr.registry = resolve(value);
      else if (key == "csv") pr.csv = resolve(value);
      else if (key == "label") pr.label = std::string(value);
      else if (key == "k") pr.subset.k = parse_num<std::size_t>(value, key, line_no);
      else if (key == "folds") pr.subset.folds = parse_num<std::size_t>(value, key, line_no);
      else if (key == "group_size") pr.subset.group_size = parse_num<std::size_t>(value, key, line_no);
      else if (key == "fold_seed") pr.subset.fold_seed = parse_num<std::uint64_t>(value, key, line_no);
      else throw unknown();
    } else if (section == "space") {
      space_text += std::string(line) + "\n";
    } else if (section == "sensitivity") {
      if (key == "axis") spec.sensitivity->axis = std::string(value);
      else if (key == "values") spec.sensitivity->values = parse_list(value, key, line_no);
      else throw unknown();
    } else if (section == "algorithm") {
      if (key == "type") alg->type = std::string(value);
      else if (key == "p") alg->p = parse_num<double>(value, key, line_no);
      else if (key == "m") alg->m = parse_num<std::size_t>(value, key, line_no);
      else if (key == "variant") {
        try {
          alg->variant = parse_variant(value);
        } catch (const std::invalid_argument &e) {
          throw SpecError(where(line_no) + e.what());
        }
      }
      else if (key == "length_scale") alg->bo.gp.length_scale = parse_num<double>(value, key, line_no);
      else if (key == "candidates") alg->bo.random_candidates = parse_num<std::size_t>(value, key, line_no);
      else throw unknown();
    }
  }

  if (spec.schema == 0) throw SpecError("missing 'schema' field");
  if (!have_kind) throw SpecError("[problem] section needs 'kind'");
  if (!space_text.empty()) {
    try {
      spec.problem.space = parse_search_space(space_text);
    } catch (const SpaceError &e) {
      throw SpecError(std::string("[space]: ") + e.what());
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open spec '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str(), path.parent_path());
}

std::shared_ptr<ProblemInstance> ProblemInstance::build(const ExperimentSpec &spec) {
  auto inst = std::make_shared<ProblemInstance>();
  auto &problem = inst->problem_;
  problem.budget = spec.budget;
  auto counted = [calls = inst->calls_](auto objective) {
    return [calls, objective](const Configuration &cfg) {
      calls->fetch_add(1, std::memory_order_relaxed);
      return (*objective)(cfg);
    };
  };
  const auto &pr = spec.problem;
  switch (pr.kind) {
  case ProblemKind::synthetic: {
    std::shared_ptr<const SyntheticObjective> obj;
    try {
      obj = std::make_shared<const SyntheticObjective>(pr.synthetic);
    } catch (const std::invalid_argument &e) {
      throw SpecError(std::string("[problem]: ") + e.what());
    }
    problem.space = obj->space();
    problem.f_ideal = obj->f_ideal();
    problem.default_config = obj->default_config();
    problem.objective = counted(obj);
    break;
  }
  case ProblemKind::feature_subset: {
    std::filesystem::path csv = pr.csv;
    std::string label = pr.label;
    if (csv.empty()) {
      std::ifstream in(pr.registry, std::ios::binary);
      if (!in) throw DatasetError("cannot open dataset registry '" +
                                  pr.registry.string() + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      const auto registry =
          parse_dataset_registry(buf.str(), pr.registry.parent_path());
      const auto it = registry.find(pr.dataset);
      if (it == registry.end()) {
        throw DatasetError("dataset '" + pr.dataset + "' not in registry");
      }
      csv = it->second.path;
      if (label.empty()) label = it->second.label_column;
    }
    if (label.empty()) throw SpecError("feature-subset problem needs 'label'");
    std::shared_ptr<const FeatureSubsetObjective> obj;
    try {
      obj = std::make_shared<const FeatureSubsetObjective>(load_csv(csv, label),
                                                           pr.subset);
    } catch (const std::invalid_argument &e) {
      throw SpecError(std::string("[problem]: ") + e.what());
    }
    problem.space = obj->space();
    problem.f_ideal = obj->f_ideal();
    problem.default_config = obj->all_features();
    problem.objective = counted(obj);
    break;
  }
  case ProblemKind::space_bowl: {
    if (!(pr.center >= 0.0) || pr.center > 1.0) {
      throw SpecError("[problem]: center must lie in [0, 1]");
    }
    auto space = std::make_shared<const SearchSpace>(*pr.space);
    const double center = pr.center;
    problem.space = *space;
    problem.f_ideal = 1.0;
    problem.default_config =
        denormalize(*space, std::vector<double>(space->dimension(), 0.5));
    problem.objective = [calls = inst->calls_, space, center](const Configuration &cfg) {
      calls->fetch_add(1, std::memory_order_relaxed);
      return space_bowl(*space, cfg, center);
    };
    break;
  }
  }
  if (problem.default_config) {
    inst->default_score_ = problem.objective(*problem.default_config);
    inst->calls_->store(0);
  }
  return inst;
}

std::optional<double> ProblemInstance::default_score() const {
  return default_score_;
}

namespace {

struct Job {
  AlgorithmSpec algorithm;
  std::string label;
  std::size_t repetition = 0;
};

RunOutcome run_job(const ProblemInstance &inst, const Job &job,
                   std::uint64_t base_seed) {
  RunOutcome out;
  out.algorithm = job.label;
  out.repetition = job.repetition;
  out.seed = base_seed + job.repetition;
  const auto &problem = inst.problem();
  try {
    const auto &a = job.algorithm;
    RunResult result;
    if (a.type == "rs") {
      result = random_search(problem, out.seed);
    } else if (a.type == "gs") {
      result = grid_search(problem, out.seed);
    } else if (a.type == "bo") {
      result = bayes_opt(problem, out.seed, a.bo);
    } else {
      EtSettings s;
      s.p = a.p;
      s.m = a.m;
      s.seed = out.seed;
      s.variant = a.variant;
      result = solve(problem, s);
    }
    const auto def = inst.default_score();
    out.metric = def ? pirate(result.best_score, *def) : result.best_score;
    out.result = std::move(result);
  } catch (const std::exception &e) {
    out.error = e.what();
  }
  return out;
}

std::vector<RunOutcome> execute(const ProblemInstance &inst,
                                const std::vector<Job> &jobs,
                                std::uint64_t base_seed, std::size_t workers) {
  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      outcomes[i] = run_job(inst, jobs[i], base_seed);
    }
  };
  const auto n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  return outcomes;
}

double mean_of(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

ReportRow summarize(const std::string &label, const std::vector<RunOutcome> &runs,
                    const ExperimentSpec &spec, bool has_default) {
  ReportRow row;
  row.algorithm = label;
  row.budget = spec.budget;
  row.metric = has_default ? "pirate" : "best_score";
  std::vector<double> metric, best, analysis;
  for (const auto &r : runs) {
    if (r.algorithm != label) continue;
    ++row.repetitions;
    if (!r.result) {
      row.status = "error: " + r.error;
      continue;
    }
    metric.push_back(r.metric);
    best.push_back(r.result->best_score);
    analysis.push_back(r.result->analysis_time.count());
    row.evaluations += r.result->evaluations_used;
  }
  row.mean = mean_of(metric);
  row.stddev = stddev_of(metric);
  row.mean_best = mean_of(best);
  row.stddev_best = stddev_of(best);
  row.mean_analysis_s = mean_of(analysis);
  return row;
}

Report run_jobs(const ExperimentSpec &spec, const std::string &mode,
                const std::vector<std::pair<std::string, AlgorithmSpec>> &variants,
                const std::map<std::string, std::string> &preset_errors,
                const RunOptions &options) {
  const auto inst = ProblemInstance::build(spec);
  std::vector<Job> jobs;
  for (const auto &[label, alg] : variants) {
    if (preset_errors.contains(label)) continue;
    for (std::size_t r = 0; r < spec.repetitions; ++r) {
      jobs.push_back({alg, label, r});
    }
  }
  Report report;
  report.experiment = spec.name;
  report.mode = mode;
  report.space = inst->problem().space;
  report.runs = execute(*inst, jobs, spec.seed, options.workers);
  report.objective_calls = inst->calls();
  const bool has_default = inst->default_score().has_value();
  for (const auto &[label, alg] : variants) {
    if (const auto it = preset_errors.find(label); it != preset_errors.end()) {
      ReportRow row;
      row.algorithm = label;
      row.budget = spec.budget;
      row.metric = has_default ? "pirate" : "best_score";
      row.mean = row.stddev = row.mean_best = row.stddev_best =
          std::numeric_limits<double>::quiet_NaN();
      row.status = "error: " + it->second;
      report.rows.push_back(std::move(row));
      continue;
    }
    report.rows.push_back(summarize(label, report.runs, spec, has_default));
  }
  for (const auto &run : report.runs) {
    if (!run.result) report.failed = true;
  }
  return report;
}

AlgorithmSpec et_template(const ExperimentSpec &spec) {
  for (const auto &a : spec.algorithms) {
    if (a.type == "et") return a;
  }
  AlgorithmSpec a;
  a.name = a.type = "et";
  return a;
}

} // namespace

Report run_experiment(const ExperimentSpec &spec, const RunOptions &options) {
  spec.validate();
  std::vector<std::pair<std::string, AlgorithmSpec>> variants;
  for (const auto &a : spec.algorithms) variants.emplace_back(a.name, a);
  return run_jobs(spec, "run", variants, {}, options);
}

Report run_sensitivity(const ExperimentSpec &spec, const SensitivitySpec &axis,
                       const RunOptions &options) {
  spec.validate();
  if (axis.axis != "p" && axis.axis != "m") {
    throw SpecError("sensitivity axis must be 'p' or 'm'");
  }
  if (axis.values.empty()) throw SpecError("sensitivity needs values");
  const auto base = et_template(spec);
  std::vector<std::pair<std::string, AlgorithmSpec>> variants;
  std::map<std::string, std::string> errors;
  for (double v : axis.values) {
    auto a = base;
    const auto label = base.name + "[" + axis.axis + "=" + fmt_axis(v) + "]";
    if (axis.axis == "p") {
      a.p = v;
    } else if (v >= 1.0 && std::nearbyint(v) == v) {
      a.m = static_cast<std::size_t>(v);
    } else {
      errors[label] = "m must be a positive integer";
    }
    if (!errors.contains(label)) {
      try {
        budget_plan(spec.budget, a.p, a.m);
      } catch (const BudgetError &e) {
        errors[label] = e.what();
      }
    }
    variants.emplace_back(label, a);
  }
  return run_jobs(spec, "sensitivity", variants, errors, options);
}

Report run_ablation(const ExperimentSpec &spec, const RunOptions &options) {
  spec.validate();
  const auto base = et_template(spec);
  std::vector<std::pair<std::string, AlgorithmSpec>> variants;
  for (auto [label, variant] :
       {std::pair{std::string("et"), EtVariant::full},
        std::pair{std::string("hea"), EtVariant::he_only},
        std::pair{std::string("paa"), EtVariant::pa_only}}) {
    auto a = base;
    a.variant = variant;
    variants.emplace_back(label, a);
  }
  return run_jobs(spec, "ablate", variants, {}, options);
}

void write_report(std::ostream &out, const Report &report) {
  out << "# chpo report\n";
  out << "schema,1\n";
  out << "experiment," << report.experiment << '\n';
  out << "mode," << report.mode << '\n';
  out << "[summary]\n";
  out << "algorithm,N,reps,metric,mean,stddev,mean_best_score,"
         "stddev_best_score,evaluations,status\n";
  for (const auto &r : report.rows) {
    out << r.algorithm << ',' << r.budget << ',' << r.repetitions << ','
        << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << ','
        << fmt(r.mean_best) << ',' << fmt(r.stddev_best) << ','
        << r.evaluations << ',' << r.status << '\n';
  }
  out << "[timing]\n";
  out << "algorithm,mean_analysis_s\n";
  for (const auto &r : report.rows) {
    out << r.algorithm << ',' << fmt(r.mean_analysis_s, 3) << '\n';
  }
}

void write_run_log(std::ostream &out, const Report &report) {
  out << "algorithm,rep,seed,eval,iteration,phase";
  for (const auto &p : report.space.params()) out << ',' << p.name;
  out << ",score,cumulative_best\n";
  char buf[64];
  for (const auto &run : report.runs) {
    if (!run.result) continue;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t eval = 0;
    for (const auto &rec : run.result->log) {
      best = std::max(best, rec.score);
      out << run.algorithm << ',' << run.repetition << ',' << run.seed << ','
          << ++eval << ',' << rec.iteration << ',' << to_string(rec.phase);
      for (const auto &v : rec.config.values) out << ',' << format_value(v);
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", rec.score, best);
      out << buf;
    }
  }
}

std::string report_body(std::string_view document) {
  const auto pos = document.find("[timing]\n");
  return std::string(document.substr(0, pos));
}

} // namespace chpo
