#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "chpo/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kSpec = 2, kDataset = 3 };

std::vector<double> parse_values(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size()) {
      throw chpo::SpecError("invalid --values entry '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

void emit(const chpo::Report &report, const std::string &out_path) {
  if (out_path.empty() || out_path == "-") {
    chpo::write_report(std::cout, report);
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  chpo::write_report(out, report);
  std::ofstream log(out_path + ".runs.csv", std::ios::binary | std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write '" + out_path + ".runs.csv'");
  chpo::write_run_log(log, report);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Budget-constrained hyperparameter optimization experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::size_t workers = 1;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::string axis;
  std::string values;

  auto common = [&](CLI::App *cmd, bool running) {
    cmd->add_option("--spec", spec_path, "experiment spec file")->required();
    if (!running) return;
    cmd->add_option("--out", out_path, "report path; runs go to <out>.runs.csv");
    cmd->add_option("--workers", workers, "concurrent runs")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--reps", reps, "override repetitions")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "override base seed");
  };
  auto *run = app.add_subcommand("run", "compare the configured algorithms");
  common(run, true);
  auto *sens = app.add_subcommand("sensitivity", "sweep p or m of ExperienceThinking");
  common(sens, true);
  sens->add_option("--axis", axis, "p or m");
  sens->add_option("--values", values, "comma-separated axis values");
  auto *ablate = app.add_subcommand("ablate", "full vs he-only vs pa-only");
  common(ablate, true);
  auto *validate = app.add_subcommand("validate-spec", "parse and check a spec");
  common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kSpec;
  }

  try {
    auto spec = chpo::load_experiment_spec(spec_path);
    if (reps) spec.repetitions = *reps;
    if (seed) spec.seed = *seed;
    spec.validate();

    if (validate->parsed()) {
      chpo::ProblemInstance::build(spec);
      std::cout << "ok " << spec.name << '\n';
      return kOk;
    }

    chpo::RunOptions options;
    options.workers = workers;
    chpo::Report report;
    if (run->parsed()) {
      report = chpo::run_experiment(spec, options);
    } else if (ablate->parsed()) {
      report = chpo::run_ablation(spec, options);
    } else {
      chpo::SensitivitySpec sweep = spec.sensitivity.value_or(chpo::SensitivitySpec{});
      if (!axis.empty()) sweep.axis = axis;
      if (!values.empty()) sweep.values = parse_values(values);
      report = chpo::run_sensitivity(spec, sweep, options);
    }
    emit(report, out_path);
    for (const auto &r : report.runs) {
      if (!r.result) {
        std::cerr << "error: " << r.algorithm << " rep " << r.repetition
                  << ": " << r.error << '\n';
      }
    }
    return report.failed ? kRuntime : kOk;
  } catch (const chpo::SpecError &e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpec;
  } catch (const chpo::DatasetError &e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kDataset;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
