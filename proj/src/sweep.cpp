#include "canesim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace canesim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

SweepRow summarize_run(const ScenarioConfig& config, const std::vector<MetricsFrame>& frames) {
  SweepRow row;
  const MetricsFrame& last = frames.back();
  auto split = population_split(config.population.size, config.population.frac_type1,
                                config.population.frac_type2);
  int total_exited = 0;
  for (int t = 0; t < 3; ++t) {
    auto ts = static_cast<std::size_t>(t);
    row.exit_fraction[ts] =
        split[ts] > 0 ? static_cast<double>(last.exited[ts]) / split[ts] : 0.0;
    row.mean_savings[ts] = last.mean_savings[ts];
    total_exited += last.exited[ts];
  }
  row.overall_exit_fraction =
      static_cast<double>(total_exited) / static_cast<double>(config.population.size);
  row.total_dues = last.mill_dues;
  if (config.mill.present) {
    auto c = static_cast<std::size_t>(config.mill.commodity);
    double sum = 0.0;
    for (const auto& f : frames) sum += f.price[c];
    row.mean_sugar_price = sum / static_cast<double>(frames.size());
  }
  return row;
}

ResultTable run_sweep(const SweepSpec& spec, int jobs) {
  struct Cell {
    double value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double v : spec.values)
    for (std::uint64_t s : spec.seeds) cells.push_back({v, s});

  ResultTable table;
  table.rows.resize(cells.size());

  // canonicalize first so defaulted keys exist as sweep targets
  nlohmann::json canonical = scenario_to_json(parse_scenario(spec.base_scenario));

  auto run_cell = [&](std::size_t k) {
    const Cell& cell = cells[k];
    SweepRow& row = table.rows[k];
    row.value = cell.value;
    row.seed = cell.seed;
    try {
      nlohmann::json doc = canonical;
      set_scenario_value(doc, spec.parameter, cell.value);
      doc["seed"] = cell.seed;
      ScenarioConfig config = parse_scenario(doc);
      auto frames = run_simulation(config);
      row = summarize_run(config, frames);
      row.value = cell.value;
      row.seed = cell.seed;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  };

#ifdef _OPENMP
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (long k = 0; k < static_cast<long>(cells.size()); ++k)
      run_cell(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
  }
#else
  (void)jobs;
  for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
#endif

  std::sort(table.rows.begin(), table.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.seed < b.seed;
  });
  return table;
}

std::string timeseries_csv(const ScenarioConfig& config,
                           const std::vector<MetricsFrame>& frames) {
  std::ostringstream out;
  out << "step";
  for (const char* t : {"type1", "type2", "type3"})
    out << ",mean_savings_" << t << ",median_savings_" << t << ",exited_" << t;
  for (const auto& com : config.commodities) {
    if (!com.has_market) continue;
    out << ",price_" << csv_quote(com.id) << ",sales_" << csv_quote(com.id) << ",stock_"
        << csv_quote(com.id);
  }
  out << ",mill_dues,sugar_output,ethanol_output\n";
  for (const auto& f : frames) {
    out << f.step;
    for (int t = 0; t < 3; ++t) {
      auto ts = static_cast<std::size_t>(t);
      out << ',' << format_double(f.mean_savings[ts]) << ','
          << format_double(f.median_savings[ts]) << ',' << f.exited[ts];
    }
    for (std::size_t c = 0; c < config.commodities.size(); ++c) {
      if (!config.commodities[c].has_market) continue;
      out << ',' << format_double(f.price[c]) << ',' << format_double(f.sales[c]) << ','
          << format_double(f.stock[c]);
    }
    out << ',' << format_double(f.mill_dues) << ',' << format_double(f.sugar_output) << ','
        << format_double(f.ethanol_output) << '\n';
  }
  return out.str();
}

std::string sweep_csv(const ResultTable& table) {
  std::ostringstream out;
  out << "value,seed,status,exit_fraction_type1,exit_fraction_type2,exit_fraction_type3,"
         "exit_fraction_overall,mean_savings_type1,mean_savings_type2,mean_savings_type3,"
         "mean_sugar_price,total_dues\n";
  for (const auto& r : table.rows) {
    out << format_double(r.value) << ',' << r.seed << ',' << (r.failed ? "failed" : "ok");
    if (r.failed) {
      out << ",,,,,,,,,\n";
      continue;
    }
    for (int t = 0; t < 3; ++t) out << ',' << format_double(r.exit_fraction[static_cast<std::size_t>(t)]);
    out << ',' << format_double(r.overall_exit_fraction);
    for (int t = 0; t < 3; ++t) out << ',' << format_double(r.mean_savings[static_cast<std::size_t>(t)]);
    out << ',' << format_double(r.mean_sugar_price) << ',' << format_double(r.total_dues) << '\n';
  }
  return out.str();
}

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

std::string plot_from(const ResultTable& table,
                      double (*metric)(const SweepRow&), const char* header) {
  std::ostringstream out;
  out << header << '\n';
  std::vector<double> values;
  for (const auto& r : table.rows)
    if (values.empty() || values.back() != r.value) values.push_back(r.value);
  for (double v : values) {
    std::vector<double> xs;
    for (const auto& r : table.rows)
      if (r.value == v && !r.failed) xs.push_back(metric(r));
    MeanSd ms = mean_sd(xs);
    out << format_double(v) << ',' << format_double(ms.mean) << ',' << format_double(ms.sd)
        << '\n';
  }
  return out.str();
}

}  // namespace

std::string plot_csv(const ResultTable& table) {
  return plot_from(
      table, [](const SweepRow& r) { return r.overall_exit_fraction; },
      "value,exit_fraction_mean,exit_fraction_sd");
}

std::string savings_plot_csv(const ResultTable& table) {
  return plot_from(
      table,
      [](const SweepRow& r) {
        return (r.mean_savings[0] + r.mean_savings[1] + r.mean_savings[2]) / 3.0;
      },
      "value,mean_savings_mean,mean_savings_sd");
}

nlohmann::json run_manifest(const ScenarioConfig& config,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& parameter, const std::vector<double>& values) {
  nlohmann::json j;
  j["tool"] = "canesim";
  j["version"] = "0.1.0";
  j["config_hash"] = scenario_hash(config);
  j["seeds"] = seeds;
  if (!parameter.empty()) {
    j["parameter"] = parameter;
    j["values"] = values;
  }
  return j;
}

}  // namespace canesim
