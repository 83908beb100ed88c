// Benchmark: farmer planning kernel serial vs OpenMP, and a small sweep at
// different job counts. Verifies the parallel paths return identical results
// while timing them.

#include <chrono>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "canesim/engine.hpp"
#include "canesim/scenario.hpp"
#include "canesim/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace canesim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json base_scenario(int population, int steps) {
  nlohmann::json doc = scenario_to_json(load_scenario(SCENARIO_PATH));
  doc["population"]["size"] = population;
  doc["steps"] = steps;
  return doc;
}

bool plans_equal(const std::vector<FarmerPlan>& a, const std::vector<FarmerPlan>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].farmer != b[i].farmer || a[i].best_crop != b[i].best_crop) return false;
    for (std::size_t c = 0; c < a[i].per_crop.size(); ++c) {
      if (a[i].per_crop[c].land != b[i].per_crop[c].land) return false;
      if (a[i].per_crop[c].profit != b[i].per_crop[c].profit) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int population = argc > 1 ? std::stoi(argv[1]) : 20000;
  int threads = 4;
#ifdef _OPENMP
  threads = omp_get_max_threads() > 1 ? omp_get_max_threads() : 4;
#endif

  std::printf("planning kernel, %d farmers\n", population);
  nlohmann::json doc = base_scenario(population, 1);
  ScenarioConfig config = parse_scenario(doc);

  RunOptions serial_opts;
  Simulation sim(config, serial_opts);
  std::vector<int> ids;
  for (const auto& f : sim.farmers()) ids.push_back(f.id);

  auto t0 = Clock::now();
  auto serial = sim.compute_plans(ids, false);
  double serial_s = seconds_since(t0);

  RunOptions par_opts;
  par_opts.planning_threads = threads;
  Simulation psim(config, par_opts);
  t0 = Clock::now();
  auto parallel = psim.compute_plans(ids, true);
  double parallel_s = seconds_since(t0);

  std::printf("  serial   %8.4f s\n", serial_s);
  std::printf("  omp x%-3d %8.4f s  (speedup %.2fx)\n", threads, parallel_s,
              serial_s / parallel_s);
  std::printf("  results identical: %s\n", plans_equal(serial, parallel) ? "yes" : "NO");

  std::printf("sweep, 4 values x 2 seeds, 200 farmers x 20 steps\n");
  SweepSpec spec;
  spec.base_scenario = base_scenario(200, 20);
  spec.parameter = "frp";
  spec.values = {220, 275, 350, 480};
  spec.seeds = {1, 2};

  t0 = Clock::now();
  auto table1 = run_sweep(spec, 1);
  double sweep1_s = seconds_since(t0);
  t0 = Clock::now();
  auto tableN = run_sweep(spec, threads);
  double sweepN_s = seconds_since(t0);

  bool same = sweep_csv(table1) == sweep_csv(tableN);
  std::printf("  jobs=1   %8.4f s\n", sweep1_s);
  std::printf("  jobs=%-3d %8.4f s  (speedup %.2fx)\n", threads, sweepN_s, sweep1_s / sweepN_s);
  std::printf("  tables identical: %s\n", same ? "yes" : "NO");
  return plans_equal(serial, parallel) && same ? 0 : 1;
}
