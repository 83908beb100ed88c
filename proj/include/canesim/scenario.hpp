#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "canesim/domain.hpp"
#include "canesim/farmer.hpp"
#include "canesim/market.hpp"
#include "canesim/mill.hpp"

namespace canesim {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PopulationConfig {
  int size = 500;
  double frac_type1 = 0.7;
  double frac_type2 = 0.2;
  double frac_type3 = 0.1;
};

// Market-facing parameters of one commodity; crops sold through the mill
// have no book.
struct CommodityConfig {
  std::string id;
  int crop = -1;  // index into crops, -1 for processed goods
  bool has_market = false;
  double crop_mult_factor = 1.0;
  double initial_price = 0.0;
  double usual_demand = 0.0;
  double initial_stock = 0.0;
  TradeParams trade;  // zero factors mean no trade
};

struct MillConfig {
  bool present = false;
  int crop = -1;       // commodity index of the cane it buys
  int commodity = -1;  // commodity index of the sugar it sells
  MillYields yields;
  MillCosts costs;
  Money initial_savings = 0.0;
  Money maintenance_reserve = 0.0;
  double collection_threshold = 0.0;
  double credit_rating = 0.0;
  double ethanol_requirement = 0.0;  // per step
  double ethanol_price = 0.0;
  double initial_sugar_demand = 0.0;
  double stock_cover = 4.0;  // steps of demand the mill keeps the market stocked for
};

struct WaterConfig {
  bool agent_present = false;
  double agent_price = 50.0;
  double agent_capacity = 0.0;  // units per step
  double lender_share = 0.25;   // k in share = k * volume / requirement
  double type3_surplus = 150.0; // units per step per Type3 farmer
};

struct LoanConfig {
  Money credit_unit = 1000.0;
  double collateral_rate_annual = 0.08;
  double credit_rate_annual = 0.12;
  int term_steps = 9;
  Money land_value_per_ha = 500000.0;
};

struct ScenarioConfig {
  int months_per_step = 4;
  int steps = 50;
  std::uint64_t seed = 1;
  double inflation_rate = 0.0001;
  bool per_cycle_costs = false;
  PricingMode pricing_mode = PricingMode::Absolute;
  double demand_variation_limit = 0.5;
  Money frp = 275.0;

  PopulationConfig population;
  FarmerInitParams farmers;

  std::vector<CropSpec> crops;
  std::vector<double> wages;  // by crop index
  std::vector<CommodityConfig> commodities;  // crops first, in order, then processed
  StorageFacilitySpec storage;  // by commodity index

  MillConfig mill;
  WaterConfig water;
  LoanConfig loans;
  double policy_delta = 0.1;

  int commodity_index(const std::string& id) const;
  int crop_index(const std::string& id) const;
  double loan_rate_per_step(double annual) const {
    return annual * static_cast<double>(months_per_step) / 12.0;
  }

  void validate() const;  // throws config_error with field-level messages
};

// Strict parse: unknown keys are rejected, missing keys take documented
// defaults, and the result is validated.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

// Canonical form used for hashing and the run manifest.
nlohmann::json scenario_to_json(const ScenarioConfig& config);
std::uint64_t scenario_hash(const ScenarioConfig& config);

// Assigns into a dotted path ("mill.ethanol_requirement") of a scenario
// document; throws config_error when the path does not exist.
void set_scenario_value(nlohmann::json& doc, const std::string& dotted_path, double value);

}  // namespace canesim
