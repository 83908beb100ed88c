#pragma once

#include <deque>
#include <span>
#include <vector>

#include "canesim/domain.hpp"
#include "canesim/ledger.hpp"

namespace canesim {

// Output per input unit along each processing path.
struct MillYields {
  double juice = 0.0;                 // juice units per cane unit
  double molasses = 0.0;              // molasses units per cane unit
  double sugar = 0.0;                 // sugar units per juice unit
  double ethanol_from_molasses = 0.0; // ethanol units per molasses unit
  double ethanol_from_juice = 0.0;    // ethanol units per juice unit

  void validate() const;
};

struct MillCosts {
  double cane_processing = 0.0;     // per cane unit (to juice + molasses)
  double molasses_to_ethanol = 0.0; // per molasses unit converted
  double juice_to_ethanol = 0.0;    // per juice unit diverted
};

struct Due {
  int farmer = -1;
  double quantity = 0.0;
  Money frp = 0.0;
  Money owed = 0.0;
  int recorded_at = -1;
};

struct MillState {
  MillYields yields;
  MillCosts costs;
  AccountId account;
  Money maintenance_reserve = 0.0;
  double collection_threshold = 0.0;   // locality produce gate
  double credit_rating = 0.0;
  double initial_sugar_demand = 0.0;   // used until sales history fills
  std::deque<Due> dues;                // oldest first

  Money dues_total() const {
    Money t = 0.0;
    for (const auto& d : dues) t += d.owed;
    return t;
  }
};

enum class EthanolMode { Free, ForcedZero };

// e is forced to 0 when making ethanol from juice costs more per unit than
// the ethanol price; ties leave e free.
EthanolMode decide_ethanol_mode(double juice_ethanol_cost_per_unit, double ethanol_price);

struct CaneSolve {
  double sugarcane = 0.0;
  double e = 0.0;  // juice fraction diverted to ethanol, in [0,1]
};

// Smallest cane input meeting the ethanol requirement exactly and the sugar
// requirement at least; falls back to e = 0 when the joint solve would need
// a negative diversion.
CaneSolve required_sugarcane(double ethanol_requirement, double sugar_requirement,
                             const MillYields& yields, EthanolMode mode);

struct ProcessResult {
  double sugar = 0.0;
  double ethanol = 0.0;
  Money cost = 0.0;
};

ProcessResult process(double sugarcane, double e, const MillYields& yields,
                      const MillCosts& costs);

// Trailing mean of recent consumer sugar purchases; the fallback covers a
// short history.
double estimate_sugar_requirement(std::span<const double> recent_sales, double fallback);

// Purchase plan against offers, biggest offers first, gated by the locality
// threshold on the total offered.
struct CaneOffer {
  int farmer = -1;
  double quantity = 0.0;
};
std::vector<CaneOffer> plan_purchases(std::span<const CaneOffer> offers, double needed,
                                      double collection_threshold);

}  // namespace canesim
