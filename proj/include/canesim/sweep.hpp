#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "canesim/engine.hpp"
#include "canesim/scenario.hpp"

namespace canesim {

// One policy lever varied over values, everything else at the base scenario.
struct SweepSpec {
  nlohmann::json base_scenario;
  std::string parameter;  // dotted path into the scenario document
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
};

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::array<double, 3> exit_fraction{};   // by farmer type
  std::array<double, 3> mean_savings{};    // final step
  double mean_sugar_price = 0.0;           // mean over steps of the mill commodity
  Money total_dues = 0.0;
  double overall_exit_fraction = 0.0;
};

struct ResultTable {
  std::vector<SweepRow> rows;  // sorted by (value, seed)
};

// Runs one simulation per (value, seed). `jobs` workers may run concurrently;
// the table is identical at any parallelism degree.
ResultTable run_sweep(const SweepSpec& spec, int jobs);

SweepRow summarize_run(const ScenarioConfig& config, const std::vector<MetricsFrame>& frames);

// Output files: RFC-4180 CSV, UTF-8, '.' decimal separator, %.17g doubles.
std::string timeseries_csv(const ScenarioConfig& config, const std::vector<MetricsFrame>& frames);
std::string sweep_csv(const ResultTable& table);
std::string plot_csv(const ResultTable& table);  // value, mean, sd of overall exit fraction
std::string savings_plot_csv(const ResultTable& table);

nlohmann::json run_manifest(const ScenarioConfig& config,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& parameter = "",
                            const std::vector<double>& values = {});

// formats a double with round-trip precision, deterministic across runs
std::string format_double(double v);
std::string csv_quote(const std::string& field);

}  // namespace canesim
