#include "canesim/mill.hpp"

#include <algorithm>
#include <stdexcept>

namespace canesim {

void MillYields::validate() const {
  if (juice <= 0 || molasses <= 0 || sugar <= 0 || ethanol_from_molasses <= 0 ||
      ethanol_from_juice <= 0)
    throw std::invalid_argument("mill: all yields must be > 0");
}

EthanolMode decide_ethanol_mode(double juice_ethanol_cost_per_unit, double ethanol_price) {
  if (juice_ethanol_cost_per_unit < 0 || ethanol_price < 0)
    throw std::invalid_argument("decide_ethanol_mode: prices must be >= 0");
  return juice_ethanol_cost_per_unit > ethanol_price ? EthanolMode::ForcedZero
                                                     : EthanolMode::Free;
}

CaneSolve required_sugarcane(double ethanol_requirement, double sugar_requirement,
                             const MillYields& y, EthanolMode mode) {
  if (ethanol_requirement < 0 || sugar_requirement < 0)
    throw std::invalid_argument("required_sugarcane: requirements must be >= 0");
  y.validate();
  const double E = ethanol_requirement;
  const double S = sugar_requirement;

  if (mode == EthanolMode::Free) {
    // Both constraints at equality:
    //   sc*yj*e*yej + sc*ym*yem = E
    //   sc*yj*(1-e)*ys        = S
    double sc = (E + S * y.ethanol_from_juice / y.sugar) /
                (y.juice * y.ethanol_from_juice + y.molasses * y.ethanol_from_molasses);
    if (sc > 0.0) {
      double e = 1.0 - S / (sc * y.juice * y.sugar);
      if (e >= 0.0) return {sc, std::min(e, 1.0)};
      // sugar dominates; diverting nothing is the only option
    } else {
      return {0.0, 0.0};
    }
  }
  // e = 0: ethanol comes from molasses alone, sugar from all the juice
  double sc_ethanol = E / (y.molasses * y.ethanol_from_molasses);
  double sc_sugar = S / (y.juice * y.sugar);
  return {std::max(sc_ethanol, sc_sugar), 0.0};
}

ProcessResult process(double sugarcane, double e, const MillYields& y, const MillCosts& c) {
  if (sugarcane < 0) throw std::invalid_argument("process: sugarcane must be >= 0");
  if (e < 0.0 || e > 1.0) throw std::invalid_argument("process: e must be in [0,1]");
  ProcessResult r;
  double juice = sugarcane * y.juice;
  double molasses = sugarcane * y.molasses;
  r.sugar = juice * (1.0 - e) * y.sugar;
  r.ethanol = juice * e * y.ethanol_from_juice + molasses * y.ethanol_from_molasses;
  r.cost = sugarcane * c.cane_processing + molasses * c.molasses_to_ethanol +
           juice * e * c.juice_to_ethanol;
  return r;
}

double estimate_sugar_requirement(std::span<const double> recent_sales, double fallback) {
  if (recent_sales.size() < 4) return fallback;
  double sum = 0.0;
  for (std::size_t i = recent_sales.size() - 4; i < recent_sales.size(); ++i)
    sum += recent_sales[i];
  return sum / 4.0;
}

std::vector<CaneOffer> plan_purchases(std::span<const CaneOffer> offers, double needed,
                                      double collection_threshold) {
  double total = 0.0;
  for (const auto& o : offers) total += o.quantity;
  if (total < collection_threshold || needed <= 0.0) return {};

  std::vector<CaneOffer> ordered(offers.begin(), offers.end());
  std::sort(ordered.begin(), ordered.end(), [](const CaneOffer& a, const CaneOffer& b) {
    if (a.quantity != b.quantity) return a.quantity > b.quantity;
    return a.farmer < b.farmer;
  });

  std::vector<CaneOffer> purchases;
  double remaining = needed;
  for (const auto& o : ordered) {
    if (remaining <= 0.0) break;
    double take = std::min(o.quantity, remaining);
    if (take <= 0.0) continue;
    purchases.push_back({o.farmer, take});
    remaining -= take;
  }
  return purchases;
}

}  // namespace canesim
