#pragma once

#include <span>
#include <vector>

#include "canesim/domain.hpp"
#include "canesim/farmer.hpp"

namespace canesim {

// Per-commodity trading state. Histories are aligned by step, newest last;
// stock_history records the stock available before that step's sales.
struct MarketBook {
  double price = 0.0;
  double initial_price = 0.0;
  double stock = 0.0;
  std::vector<double> price_history;
  std::vector<double> sale_history;
  std::vector<double> stock_history;
};

// Weighted ratio pricing: r_k = sale/stock over the last 4 steps (newest
// weighted 0.4), price = cmf * max(sum, 0.1)^2. Holds the current price until
// four steps of history exist.
double set_price_absolute(const MarketBook& book, double crop_mult_factor);

// Trend pricing from percent deviations of sales against the usual sale.
double set_price_trend(const MarketBook& book, double usual_sale);

enum class PricingMode { Absolute, Trend };

// Demand reacting to the price move and to recent sales against the usual
// level, clamped to +-variation_limit around usual_demand.
double consumer_demand(double price_now, double price_prev, double past4_sales,
                       double usual_demand, double variation_limit);

struct TradeParams {
  double factor_of_import = 0.0;  // quantity per currency of price gap
  double factor_of_export = 0.0;
  double maximum_import = 0.0;
  double maximum_export = 0.0;
  double import_tax = 0.0;
  double export_tax = 0.0;
  double import_price = 0.0;  // paid per unit imported
  double export_price = 0.0;  // received per unit exported
  double usual_price = 0.0;   // reference for the gap; inflates over time
};

struct TradeStep {
  double import_qty = 0.0;
  double export_qty = 0.0;
};

TradeStep import_export_step(double price, const TradeParams& params);

// Loosens whichever trade direction fired in more than 2 of the last 5 steps.
void policy_step(std::span<const TradeStep> last5, TradeParams& params, double delta);

struct StorageLot {
  int owner = -1;  // farmer index
  FarmerType owner_type = FarmerType::Type1;
  int commodity = -1;
  double quantity = 0.0;
  int age = 0;
};

struct StorageRequest {
  int owner = -1;
  FarmerType owner_type = FarmerType::Type1;
  int commodity = -1;
  double quantity = 0.0;
};

class StorageLedger {
 public:
  StorageLedger() = default;
  explicit StorageLedger(StorageFacilitySpec spec) : spec_(std::move(spec)) {
    fees_.resize(spec_.capacity.size());
    for (std::size_t c = 0; c < fees_.size(); ++c)
      fees_[c] = 0.01 * spec_.fee_multiplier[c];  // empty-facility floor fee
    request_history_.assign(spec_.capacity.size(), {});
    remaining_history_.assign(spec_.capacity.size(), {});
  }

  const StorageFacilitySpec& spec() const { return spec_; }
  StorageFacilitySpec& spec_mut() { return spec_; }
  std::vector<StorageLot>& lots() { return lots_; }
  const std::vector<StorageLot>& lots() const { return lots_; }

  double occupied(int commodity) const;
  double remaining_capacity(int commodity) const;
  double fee(int commodity) const { return fees_[static_cast<std::size_t>(commodity)]; }

  // Fee update from recorded history, priced like a commodity: requests play
  // the sale role and the remaining capacity plays the stock role.
  void reprice();

  // Spoilage and expiry for existing lots, then admissions in Type3, Type2,
  // Type1 priority. Returns the quantity turned away per request.
  std::vector<double> admit_and_age(std::span<const StorageRequest> requests);

  // Called once per step after admissions with the step's request totals.
  void record_request_totals(std::span<const double> requested_per_commodity);

  const std::vector<std::vector<double>>& request_history() const { return request_history_; }
  const std::vector<std::vector<double>>& remaining_history() const { return remaining_history_; }
  void restore_histories(std::vector<double> fees, std::vector<std::vector<double>> requests,
                         std::vector<std::vector<double>> remaining) {
    fees_ = std::move(fees);
    request_history_ = std::move(requests);
    remaining_history_ = std::move(remaining);
  }

 private:
  StorageFacilitySpec spec_;
  std::vector<StorageLot> lots_;
  std::vector<double> fees_;
  std::vector<std::vector<double>> request_history_;    // by commodity
  std::vector<std::vector<double>> remaining_history_;  // by commodity
};

}  // namespace canesim
