#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "canesim/engine.hpp"
#include "canesim/scenario.hpp"
#include "canesim/sweep.hpp"

namespace fs = std::filesystem;
using canesim::ScenarioConfig;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string default_out_dir() {
  const char* env = std::getenv("CANESIM_OUT");
  return env ? env : "";
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

int cmd_run(const std::string& scenario_path, int steps, std::int64_t seed,
            const std::string& out_dir, const std::string& checkpoint_path,
            const std::string& resume_path) {
  nlohmann::json doc;
  ScenarioConfig config;
  std::vector<canesim::MetricsFrame> frames;
  std::unique_ptr<canesim::Simulation> sim;

  if (!resume_path.empty()) {
    std::ifstream in(resume_path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + resume_path);
    nlohmann::json snapshot;
    in >> snapshot;
    if (steps >= 0) snapshot["scenario"]["steps"] = steps;
    sim = std::make_unique<canesim::Simulation>(canesim::Simulation::restore(snapshot));
    config = sim->config();
  } else {
    std::ifstream in(scenario_path);
    if (!in) throw std::runtime_error("scenario file not found: " + scenario_path);
    in >> doc;
    if (steps >= 0) doc["steps"] = steps;
    if (seed >= 0) doc["seed"] = static_cast<std::uint64_t>(seed);
    config = canesim::parse_scenario(doc);
    sim = std::make_unique<canesim::Simulation>(config);
  }

  frames = sim->run();

  fs::path out(out_dir);
  fs::create_directories(out);
  write_file(out / "timeseries.csv", canesim::timeseries_csv(sim->config(), frames));
  write_file(out / "manifest.json",
             canesim::run_manifest(sim->config(), {sim->config().seed}).dump(2) + "\n");
  if (!checkpoint_path.empty())
    write_file(checkpoint_path, sim->checkpoint().dump() + "\n");

  const auto& last = frames.back();
  int exited = last.exited[0] + last.exited[1] + last.exited[2];
  std::cout << "run complete: " << sim->config().steps << " steps, " << exited
            << " farmers exited, outputs in " << out.string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& values_csv, const std::string& seeds_csv, int jobs,
              const std::string& out_dir) {
  std::ifstream in(scenario_path);
  if (!in) throw std::runtime_error("scenario file not found: " + scenario_path);
  canesim::SweepSpec spec;
  in >> spec.base_scenario;
  spec.parameter = param;
  spec.values = parse_values(values_csv);
  spec.seeds = parse_seeds(seeds_csv);
  if (spec.values.empty()) throw std::runtime_error("sweep: --values must be non-empty");
  if (spec.seeds.empty()) throw std::runtime_error("sweep: --seeds must be non-empty");

  auto table = canesim::run_sweep(spec, jobs);

  fs::path out(out_dir);
  fs::create_directories(out);
  write_file(out / "sweep.csv", canesim::sweep_csv(table));
  write_file(out / "plot_exit_fraction.csv", canesim::plot_csv(table));
  write_file(out / "plot_mean_savings.csv", canesim::savings_plot_csv(table));
  ScenarioConfig base = canesim::parse_scenario(spec.base_scenario);
  write_file(out / "manifest.json",
             canesim::run_manifest(base, spec.seeds, spec.parameter, spec.values).dump(2) + "\n");

  int failures = 0;
  for (const auto& r : table.rows)
    if (r.failed) {
      ++failures;
      std::cerr << "sweep cell value=" << r.value << " seed=" << r.seed
                << " failed: " << r.error << "\n";
    }
  std::cout << "sweep complete: " << table.rows.size() << " runs (" << failures
            << " failed), outputs in " << out.string() << "\n";
  return 0;
}

int cmd_validate(const std::string& scenario_path) {
  canesim::load_scenario(scenario_path);
  std::cout << scenario_path << ": valid\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canesim: sugar supply-chain multi-agent simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = default_out_dir();
  int steps = -1;
  std::int64_t seed = -1;
  std::string checkpoint_path;
  std::string resume_path;

  auto* run = app.add_subcommand("run", "run one scenario and emit timeseries.csv");
  run->add_option("--scenario", scenario, "scenario JSON file");
  run->add_option("--steps", steps, "override step count");
  run->add_option("--seed", seed, "override RNG seed");
  run->add_option("--out", out_dir, "output directory (default $CANESIM_OUT)");
  run->add_option("--checkpoint", checkpoint_path, "write a full-state snapshot at the end");
  run->add_option("--resume", resume_path, "continue from a snapshot instead of a scenario");

  std::string param, values_csv, seeds_csv;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "vary one parameter across seeds");
  sweep->add_option("--scenario", scenario, "scenario JSON file")->required();
  sweep->add_option("--param", param, "dotted path of the swept parameter")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")->required();
  sweep->add_option("--seeds", seeds_csv, "comma-separated seeds")->required();
  sweep->add_option("--jobs", jobs, "concurrent runs (output is identical at any level)");
  sweep->add_option("--out", out_dir, "output directory (default $CANESIM_OUT)");

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("--scenario", scenario, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      if (scenario.empty() && resume_path.empty())
        throw std::runtime_error("run: --scenario (or --resume) is required");
      if (out_dir.empty())
        throw std::runtime_error("run: --out is required (or set $CANESIM_OUT)");
      return cmd_run(scenario, steps, seed, out_dir, checkpoint_path, resume_path);
    }
    if (app.got_subcommand(sweep)) {
      if (out_dir.empty())
        throw std::runtime_error("sweep: --out is required (or set $CANESIM_OUT)");
      return cmd_sweep(scenario, param, values_csv, seeds_csv, jobs, out_dir);
    }
    if (app.got_subcommand(validate)) return cmd_validate(scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
