#include "canesim/domain.hpp"

#include <stdexcept>
#include <string>

namespace canesim {

namespace {

void fail(const std::string& crop, const std::string& what) {
  throw std::invalid_argument("crop '" + crop + "': " + what);
}

}  // namespace

void CropSpec::validate() const {
  if (id.empty()) throw std::invalid_argument("crop id must be non-empty");
  if (end_cycle < 1) fail(id, "end_cycle must be >= 1");
  if (harvest_cycle < 1) fail(id, "harvest_cycle must be >= 1");
  if (harvest_cycle > end_cycle) fail(id, "harvest_cycle must not exceed end_cycle");
  if (end_cycle % harvest_cycle != 0) fail(id, "end_cycle must be divisible by harvest_cycle");
  if (fert_pest_cost < 0) fail(id, "fert_pest_cost must be >= 0");
  if (labor_requirement < 0) fail(id, "labor_requirement must be >= 0");
  if (water_requirement < 0) fail(id, "water_requirement must be >= 0");
  if (labor_flexibility < 0 || labor_flexibility > 1) fail(id, "labor_flexibility must be in [0,1]");
  if (water_flexibility < 0 || water_flexibility > 1) fail(id, "water_flexibility must be in [0,1]");
  if (prone_to_pest < 1) fail(id, "prone_to_pest must be >= 1");
  if (produce < 0) fail(id, "produce must be >= 0");
  if (initial_cost < 0) fail(id, "initial_cost must be >= 0");
  if (minimum_produce < 0) fail(id, "minimum_produce must be >= 0");
  if (crop_mult_factor < 0) fail(id, "crop_mult_factor must be >= 0");
}

void StorageFacilitySpec::validate(std::size_t n) const {
  if (capacity.size() != n || fee_multiplier.size() != n || loss_rate.size() != n ||
      expiration.size() != n) {
    throw std::invalid_argument("storage: parameter vectors must cover every commodity");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (capacity[i] < 0) throw std::invalid_argument("storage: capacity must be >= 0");
    if (fee_multiplier[i] < 0) throw std::invalid_argument("storage: fee_multiplier must be >= 0");
    if (loss_rate[i] < 0 || loss_rate[i] >= 1)
      throw std::invalid_argument("storage: loss_rate must be in [0,1)");
    if (expiration[i] < 1) throw std::invalid_argument("storage: expiration must be >= 1");
  }
}

Money apply_inflation(Money value, int steps, double rate) {
  if (steps < 0) throw std::invalid_argument("apply_inflation: steps must be >= 0");
  if (value < 0) throw std::invalid_argument("apply_inflation: value must be >= 0");
  // One multiply per step, matching how the engine compounds in place.
  // Iterating keeps apply(v, a+b) == apply(apply(v, a), b) exact.
  const double factor = 1.0 + rate;
  for (int i = 0; i < steps; ++i) value *= factor;
  return value;
}

}  // namespace canesim
