#pragma once

#include <optional>
#include <span>
#include <vector>

#include "canesim/domain.hpp"
#include "canesim/ledger.hpp"
#include "canesim/rng.hpp"

namespace canesim {

enum class FarmerType { Type1, Type2, Type3 };
enum class CostMode { WithWater, WithoutWater };
enum class WaterSource { None, Agent, Lender };

inline int type_index(FarmerType t) { return static_cast<int>(t); }

// One crop standing on part of a farmer's land.
struct Planting {
  int crop = -1;
  double land = 0.0;  // ha
  int planted_at = -1;
  int steps_grown = 0;  // steps since planting
  double quality = 1.0;
  int missed_pesticide = 0;
  WaterSource water_source = WaterSource::None;
  int lender = -1;             // farmer index of the Type3 lender, if any
  double lender_share = 0.0;   // fraction of each harvest owed to the lender
  double water_volume = 0.0;   // units per step drawn from the source
};

// Revenue window opened at a harvest; income expectation updates when it closes.
struct HarvestRecord {
  int crop;
  int harvested_at;
  double quantity;
  Money revenue = 0.0;
};

struct Expectations {
  std::vector<double> income_expectation;  // currency per quantity unit, by crop
  std::vector<double> upper_limit;         // ha, by crop
  std::vector<double> last_alloc;          // ha last planted, by crop
  std::vector<int> first_harvest_step;     // -1 until the crop has ever been harvested
};

struct FarmerState {
  int id = -1;
  FarmerType type = FarmerType::Type1;
  AccountId account;
  int family_size = 4;
  Money per_person_charge = 0.0;  // per month, inflates per step
  Money safety_buffer = 0.0;
  double land = 0.0;  // ha
  double credit_rating = 0.0;
  double info_noise_sigma = 0.0;
  double water_endowment = 0.0;  // units per step; only Type3 lend it out

  std::vector<Planting> plantings;        // at most one per crop
  Expectations expect;
  std::vector<double> savings_history;    // newest last, trimmed to a cap
  std::size_t savings_history_cap = 8;
  std::vector<HarvestRecord> open_harvests;
  std::vector<double> on_hand;            // unsold produce, by commodity index

  bool exited = false;
  int exited_step = -1;

  double land_free() const {
    double used = 0.0;
    for (const auto& p : plantings) used += p.land;
    return land - used;
  }
  const Planting* planting_of(int crop) const {
    for (const auto& p : plantings)
      if (p.crop == crop) return &p;
    return nullptr;
  }
};

// Initialization parameters for one farmer type (scenario-configurable; the
// shipped defaults follow the supply-chain setting this models).
struct FarmerTypeParams {
  Money per_person_charge = 5000.0;
  Money savings_mean = 500000.0;
  Money savings_sd = 10000.0;
  double land_mean = 1.5;
  double land_sd = 0.5;
  double noise_sigma = 5.0;
};

struct FarmerInitParams {
  FarmerTypeParams type1{};
  FarmerTypeParams type2{8000.0, 3000000.0, 500000.0, 3.0, 1.0, 1.0};
  FarmerTypeParams type3{8000.0, 5000000.0, 500000.0, 4.5, 1.0, 0.0};
  double base_credit_rating = 20.0;
  double min_land = 0.1;
  double safety_buffer_fraction = 0.10;
  double type3_water_surplus = 150.0;

  const FarmerTypeParams& of(FarmerType t) const {
    switch (t) {
      case FarmerType::Type1: return type1;
      case FarmerType::Type2: return type2;
      default: return type3;
    }
  }
};

// Draws family size, savings, land and derived fields. The savings draw is
// returned separately because the ledger owns the cash balance.
struct InitializedFarmer {
  FarmerState state;
  Money savings;
};
InitializedFarmer init_farmer(FarmerType type, const FarmerInitParams& params, Rng& rng);

// Gaussian perception noise around a true value; non-negative quantities clamp at 0.
double perceive(double true_value, double sigma, Rng& rng, bool non_negative = true);

// Least-squares slope of values against their index; needs >= 2 points.
double least_squares_slope(std::span<const double> values);

// upper_limit update from the recent savings trend. Returns the previous
// limit when the window is too short to fit a line.
double update_upper_limit(std::span<const double> savings_window, double land_allocated,
                          double land, double previous_limit);

// Land affordable for one crop given the cash position. `ppc_fs_step` is the
// whole family's charge per step. The denominator mixes the one-time initial
// cost with per-step costs; per_cycle_costs multiplies the per-step terms by
// the harvest cycle for the dimensionally consistent variant.
double allocate_land(double total_savings, double loan_estimate, double safety_buffer,
                     double ppc_fs_step, const CropSpec& crop, double wage, double water_price,
                     double upper_limit, CostMode mode, bool per_cycle_costs = false);

// Expected profit over the crop's full end-cycle at the farmer's income expectation.
double estimate_profit(const CropSpec& crop, double land_alloc, double income_expectation,
                       double wage, double water_price, CostMode mode);

// Indices ordered by descending profit, ties by ascending crop index.
std::vector<int> rank_crops(std::span<const double> profits);

// Scale water-needing allocations by the received/requested ratio.
// requested == 0 for a water-needing crop is a contract violation.
std::vector<double> rescale_for_water(std::span<const double> land_allocated,
                                      double water_received,
                                      std::span<const double> water_requested);

struct LenderOfferDecision {
  bool accept = true;
  int better_rain_fed_crop = -1;
};

// Accept a lender's dictated crop unless some rain-fed crop beats its profit
// net of the produce share.
LenderOfferDecision evaluate_lender_offer(std::span<const CropSpec> crops,
                                          std::span<const double> own_land_alloc,
                                          std::span<const double> income_expectation,
                                          std::span<const double> wages, int offered_crop,
                                          double offered_land, double produce_share);

// Money needed to keep one planting running to its end-cycle, including the
// family's subsistence over the same horizon.
Money compute_total_expense(const CropSpec& crop, double land_alloc, int remaining_steps,
                            double wage, double water_price, Money ppc_fs_step,
                            bool already_planted, CostMode mode);

// Quality hit when a step's water or labor bill is only partly paid.
double apply_resource_shortfall(double quality, double flexibility, double used, double needed);

// Pesticide miss counter; consecutive misses beyond prone_to_pest kill the crop.
void apply_pesticide_step(Planting& planting, const CropSpec& crop, bool paid);

// Quantity collected at a due harvest: quality * produce * land.
double harvest_quantity(const Planting& planting, const CropSpec& crop);

// revenue-per-unit update once a harvest's revenue window closes.
double update_income_expectation(double previous, Money revenue_in_window, double stock_produced);

// Units to store now: the fee budget is 10% of savings, triggered when the
// price sits below the recent average. Fewer than 5 history points sell all.
double storage_decision(double on_hand, Money savings, double current_price,
                        std::span<const double> price_history, double storage_fee_per_unit);

// Exit rule: savings strictly below four steps of family subsistence.
bool check_exit(Money savings, Money per_person_charge, int family_size, int months_per_step);

}  // namespace canesim
