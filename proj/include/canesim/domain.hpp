#pragma once

#include <string>
#include <vector>

namespace canesim {

using Money = double;

// Where a crop's produce is sold: the mill buys at FRP, everything else
// clears through the market agent.
enum class Channel { Market, Mill };

struct CropSpec {
  std::string id;
  int end_cycle = 1;       // steps until the planting is done
  int harvest_cycle = 1;   // steps between harvests; divides end_cycle
  double fert_pest_cost = 0.0;    // currency per ha per step
  double labor_requirement = 0.0; // labor units per ha per step
  double water_requirement = 0.0; // water units per ha per step
  double labor_flexibility = 1.0; // in [0,1]
  double water_flexibility = 1.0; // in [0,1]
  int prone_to_pest = 1;          // consecutive unpaid pesticide steps survived
  double produce = 0.0;           // quantity per ha per harvest, ideal conditions
  double initial_cost = 0.0;      // currency per ha, one time
  double minimum_produce = 0.0;   // 0 means unconstrained
  double crop_mult_factor = 1.0;  // market pricing coefficient
  Channel channel = Channel::Market;

  bool rain_fed() const { return water_requirement == 0.0; }

  // throws std::invalid_argument naming the offending field
  void validate() const;
};

// Wages per crop per ha per step; fixed apart from inflation.
struct LaborMarket {
  std::vector<double> wages;  // by crop index
};

// Per-commodity storage parameters.
struct StorageFacilitySpec {
  std::vector<double> capacity;        // quantity
  std::vector<double> fee_multiplier;  // pricing coefficient, inflates per step
  std::vector<double> loss_rate;       // fraction spoilt per step, in [0,1)
  std::vector<int> expiration;         // steps until a lot is unusable

  void validate(std::size_t n_commodities) const;
};

struct InflationClock {
  double rate_per_step = 0.0001;
  int current_step = 0;
};

// value * (1 + rate)^steps, compounding once per step
Money apply_inflation(Money value, int steps, double rate);

}  // namespace canesim
