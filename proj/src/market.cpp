#include "canesim/market.hpp"

#include <algorithm>
#include <stdexcept>

namespace canesim {

namespace {
// newest-first weights over the last four steps
constexpr double kWeights[4] = {0.4, 0.3, 0.2, 0.1};
}  // namespace

double set_price_absolute(const MarketBook& book, double crop_mult_factor) {
  const auto& sale = book.sale_history;
  const auto& stock = book.stock_history;
  if (sale.size() < 4 || stock.size() < 4) return book.price;
  double base = 0.0;
  for (int k = 0; k < 4; ++k) {
    double s = sale[sale.size() - 1 - static_cast<std::size_t>(k)];
    double q = stock[stock.size() - 1 - static_cast<std::size_t>(k)];
    if (s < 0 || q < 0) throw std::invalid_argument("set_price_absolute: negative history");
    double ratio = q == 0.0 ? 0.0 : s / q;
    base += kWeights[k] * 2.0 * ratio;
  }
  double clamped = std::max(base, 0.1);
  return crop_mult_factor * clamped * clamped;
}

double set_price_trend(const MarketBook& book, double usual_sale) {
  const auto& sale = book.sale_history;
  if (sale.size() < 4 || usual_sale <= 0.0) return book.price;
  double percent = 0.0;
  for (int k = 0; k < 4; ++k) {
    double s = sale[sale.size() - 1 - static_cast<std::size_t>(k)];
    double deviation = 100.0 * (s - usual_sale) / usual_sale;
    percent += kWeights[k] * deviation;
  }
  return book.price * (1.0 + percent / 100.0);
}

double consumer_demand(double price_now, double price_prev, double past4_sales,
                       double usual_demand, double variation_limit) {
  if (price_now <= 0.0 || price_prev <= 0.0)
    throw std::invalid_argument("consumer_demand: prices must be > 0");
  double price_factor = 1.0 - (price_now - price_prev) / price_now;
  double usual4 = 4.0 * usual_demand;
  double stock_factor = usual4 > 0.0 ? 1.0 - (past4_sales - usual4) / usual4 : 1.0;
  double demand = std::max(price_factor, 0.0) * std::max(stock_factor, 0.0) * usual_demand;
  double lo = std::max(usual_demand * (1.0 - variation_limit), 0.0);
  double hi = usual_demand * (1.0 + variation_limit);
  return std::clamp(demand, lo, hi);
}

TradeStep import_export_step(double price, const TradeParams& p) {
  if (p.usual_price <= 0.0) throw std::invalid_argument("import_export_step: usual_price must be > 0");
  TradeStep step;
  if (price > p.usual_price) {
    step.import_qty = std::min(p.factor_of_import * (price - p.usual_price), p.maximum_import);
  } else if (price < p.usual_price) {
    step.export_qty = std::min(p.factor_of_export * (p.usual_price - price), p.maximum_export);
  }
  return step;
}

void policy_step(std::span<const TradeStep> last5, TradeParams& params, double delta) {
  if (last5.size() < 5) return;
  int imports = 0;
  int exports = 0;
  for (std::size_t i = last5.size() - 5; i < last5.size(); ++i) {
    if (last5[i].import_qty > 0.0) ++imports;
    if (last5[i].export_qty > 0.0) ++exports;
  }
  if (imports > 2) {
    params.import_tax *= 1.0 - delta;
    params.maximum_import *= 1.0 + delta;
    params.factor_of_import *= 1.0 + delta;
    params.export_tax *= 1.0 + delta;
  }
  if (exports > 2) {
    params.export_tax *= 1.0 - delta;
    params.maximum_export *= 1.0 + delta;
    params.factor_of_export *= 1.0 + delta;
    params.import_tax *= 1.0 + delta;
  }
}

double StorageLedger::occupied(int commodity) const {
  double total = 0.0;
  for (const auto& lot : lots_)
    if (lot.commodity == commodity) total += lot.quantity;
  return total;
}

double StorageLedger::remaining_capacity(int commodity) const {
  return spec_.capacity[static_cast<std::size_t>(commodity)] - occupied(commodity);
}

void StorageLedger::record_request_totals(std::span<const double> requested) {
  for (std::size_t c = 0; c < fees_.size(); ++c) {
    request_history_[c].push_back(requested.size() > c ? requested[c] : 0.0);
    remaining_history_[c].push_back(remaining_capacity(static_cast<int>(c)));
  }
}

void StorageLedger::reprice() {
  for (std::size_t c = 0; c < fees_.size(); ++c) {
    MarketBook proxy;
    proxy.price = fees_[c];
    proxy.sale_history = request_history_[c];
    proxy.stock_history = remaining_history_[c];
    fees_[c] = set_price_absolute(proxy, spec_.fee_multiplier[c]);
  }
}

std::vector<double> StorageLedger::admit_and_age(std::span<const StorageRequest> requests) {
  // age existing stock first: decay, then purge expired lots
  for (auto& lot : lots_) {
    lot.quantity *= 1.0 - spec_.loss_rate[static_cast<std::size_t>(lot.commodity)];
    lot.age += 1;
  }
  std::erase_if(lots_, [&](const StorageLot& lot) {
    return lot.age > spec_.expiration[static_cast<std::size_t>(lot.commodity)] ||
           lot.quantity <= 0.0;
  });

  // admissions: Type3 before Type2 before Type1, ties by owner id
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    int pa = type_index(requests[a].owner_type);
    int pb = type_index(requests[b].owner_type);
    if (pa != pb) return pa > pb;
    return requests[a].owner < requests[b].owner;
  });

  std::vector<double> rejected(requests.size(), 0.0);
  for (std::size_t i : order) {
    const StorageRequest& r = requests[i];
    double room = remaining_capacity(r.commodity);
    double admitted = std::clamp(r.quantity, 0.0, room);
    if (admitted > 0.0) lots_.push_back({r.owner, r.owner_type, r.commodity, admitted, 0});
    rejected[i] = r.quantity - admitted;
  }
  return rejected;
}

}  // namespace canesim
