#include "canesim/farmer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace canesim {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
}

InitializedFarmer init_farmer(FarmerType type, const FarmerInitParams& params, Rng& rng) {
  const FarmerTypeParams& p = params.of(type);
  InitializedFarmer out;
  FarmerState& f = out.state;
  f.type = type;
  f.family_size = rng.uniform_int(4, 6);
  out.savings = std::max(rng.gaussian(p.savings_mean, p.savings_sd), 0.0);
  f.land = std::max(rng.gaussian(p.land_mean, p.land_sd), params.min_land);
  f.per_person_charge = p.per_person_charge;
  f.safety_buffer = params.safety_buffer_fraction * out.savings;
  f.info_noise_sigma = p.noise_sigma;
  f.credit_rating =
      type == FarmerType::Type1 ? params.base_credit_rating : 2.0 * params.base_credit_rating;
  f.water_endowment = type == FarmerType::Type3 ? params.type3_water_surplus : 0.0;
  return out;
}

double perceive(double true_value, double sigma, Rng& rng, bool non_negative) {
  if (sigma < 0) throw std::invalid_argument("perceive: sigma must be >= 0");
  double v = sigma == 0.0 ? true_value : true_value + rng.gaussian(0.0, sigma);
  return non_negative ? std::max(v, 0.0) : v;
}

double least_squares_slope(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("least_squares_slope: need at least 2 points");
  // x = 0..n-1; slope = (n*sum(xy) - sum(x)sum(y)) / (n*sum(x^2) - sum(x)^2)
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = static_cast<double>(i);
    sx += x;
    sy += values[i];
    sxy += x * values[i];
    sxx += x * x;
  }
  double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double update_upper_limit(std::span<const double> savings_window, double land_allocated,
                          double land, double previous_limit) {
  if (savings_window.size() < 2) return previous_limit;
  double m = least_squares_slope(savings_window);
  double scaled = land_allocated * (1.0 + 2.0 * std::atan(m) / kPi);
  return std::max(std::min(scaled, land), 0.0);
}

double allocate_land(double total_savings, double loan_estimate, double safety_buffer,
                     double ppc_fs_step, const CropSpec& crop, double wage, double water_price,
                     double upper_limit, CostMode mode, bool per_cycle_costs) {
  double numerator = total_savings + loan_estimate - safety_buffer -
                     ppc_fs_step * static_cast<double>(crop.harvest_cycle);
  double water_term = mode == CostMode::WithWater ? crop.water_requirement * water_price : 0.0;
  double per_step = crop.labor_requirement * wage + water_term + crop.fert_pest_cost;
  double denominator =
      crop.initial_cost + (per_cycle_costs ? per_step * crop.harvest_cycle : per_step);
  if (denominator <= 0) throw std::invalid_argument("allocate_land: non-positive planting cost");
  return std::max(std::min(numerator / denominator, upper_limit), 0.0);
}

double estimate_profit(const CropSpec& crop, double land_alloc, double income_expectation,
                       double wage, double water_price, CostMode mode) {
  double cycles = static_cast<double>(crop.end_cycle) / static_cast<double>(crop.harvest_cycle);
  double revenue = cycles * crop.produce * land_alloc * income_expectation;
  double water_term = mode == CostMode::WithWater
                          ? crop.water_requirement * water_price * crop.end_cycle
                          : 0.0;
  double cost = land_alloc * (crop.initial_cost + water_term +
                              crop.labor_requirement * crop.end_cycle * wage);
  return revenue - cost;
}

std::vector<int> rank_crops(std::span<const double> profits) {
  std::vector<int> order(profits.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (profits[a] != profits[b]) return profits[a] > profits[b];
    return a < b;
  });
  return order;
}

std::vector<double> rescale_for_water(std::span<const double> land_allocated,
                                      double water_received,
                                      std::span<const double> water_requested) {
  if (land_allocated.size() != water_requested.size())
    throw std::invalid_argument("rescale_for_water: mismatched inputs");
  std::vector<double> out(land_allocated.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (water_requested[i] == 0.0) {
      if (land_allocated[i] > 0.0)
        throw std::invalid_argument("rescale_for_water: zero request for a water-needing crop");
      out[i] = 0.0;
      continue;
    }
    out[i] = land_allocated[i] * std::min(water_received, water_requested[i]) / water_requested[i];
  }
  return out;
}

LenderOfferDecision evaluate_lender_offer(std::span<const CropSpec> crops,
                                          std::span<const double> own_land_alloc,
                                          std::span<const double> income_expectation,
                                          std::span<const double> wages, int offered_crop,
                                          double offered_land, double produce_share) {
  const CropSpec& oc = crops[static_cast<std::size_t>(offered_crop)];
  // Lender-watered crop: no water bill, the share comes off the revenue.
  double cycles = static_cast<double>(oc.end_cycle) / static_cast<double>(oc.harvest_cycle);
  double offered_net =
      cycles * oc.produce * offered_land *
          income_expectation[static_cast<std::size_t>(offered_crop)] * (1.0 - produce_share) -
      offered_land * (oc.initial_cost + oc.labor_requirement * oc.end_cycle *
                                            wages[static_cast<std::size_t>(offered_crop)]);
  LenderOfferDecision decision;
  double best = offered_net;
  for (std::size_t i = 0; i < crops.size(); ++i) {
    if (!crops[i].rain_fed() || static_cast<int>(i) == offered_crop) continue;
    double profit = estimate_profit(crops[i], own_land_alloc[i], income_expectation[i], wages[i],
                                    0.0, CostMode::WithoutWater);
    if (profit > best) {
      best = profit;
      decision.accept = false;
      decision.better_rain_fed_crop = static_cast<int>(i);
    }
  }
  return decision;
}

Money compute_total_expense(const CropSpec& crop, double land_alloc, int remaining_steps,
                            double wage, double water_price, Money ppc_fs_step,
                            bool already_planted, CostMode mode) {
  double water_term = mode == CostMode::WithWater ? crop.water_requirement * water_price : 0.0;
  double per_step =
      (wage * crop.labor_requirement + water_term + crop.fert_pest_cost) * land_alloc +
      ppc_fs_step;
  double steps = static_cast<double>(std::max(remaining_steps, 0));
  return steps * per_step + (already_planted ? 0.0 : crop.initial_cost * land_alloc);
}

double apply_resource_shortfall(double quality, double flexibility, double used, double needed) {
  if (needed == 0.0) {
    if (used > 0.0) throw std::invalid_argument("apply_resource_shortfall: used > needed == 0");
    return quality;
  }
  if (used < 0.0 || used > needed)
    throw std::invalid_argument("apply_resource_shortfall: used must be in [0, needed]");
  return std::max(quality - (1.0 - flexibility * (used / needed)), 0.0);
}

void apply_pesticide_step(Planting& planting, const CropSpec& crop, bool paid) {
  if (paid) {
    planting.missed_pesticide = 0;
    return;
  }
  planting.missed_pesticide += 1;
  if (planting.missed_pesticide > crop.prone_to_pest) planting.quality = 0.0;
}

double harvest_quantity(const Planting& planting, const CropSpec& crop) {
  if (planting.steps_grown <= 0 || planting.steps_grown % crop.harvest_cycle != 0)
    throw std::logic_error("harvest_quantity: harvest is not due");
  return planting.quality * crop.produce * planting.land;
}

double update_income_expectation(double previous, Money revenue_in_window,
                                 double stock_produced) {
  if (stock_produced <= 0.0) return previous;
  return revenue_in_window / stock_produced;
}

double storage_decision(double on_hand, Money savings, double current_price,
                        std::span<const double> price_history, double storage_fee_per_unit) {
  if (price_history.size() < 5) return 0.0;
  double mean5 = 0.0;
  for (std::size_t i = price_history.size() - 5; i < price_history.size(); ++i)
    mean5 += price_history[i];
  mean5 /= 5.0;
  if (current_price >= mean5) return 0.0;
  if (storage_fee_per_unit <= 0.0) return on_hand;
  double budget = 0.10 * std::max(savings, 0.0);
  return std::min(on_hand, budget / storage_fee_per_unit);
}

bool check_exit(Money savings, Money per_person_charge, int family_size, int months_per_step) {
  Money per_step_family_charge =
      per_person_charge * static_cast<double>(family_size) * static_cast<double>(months_per_step);
  return savings < 4.0 * per_step_family_charge;
}

}  // namespace canesim
