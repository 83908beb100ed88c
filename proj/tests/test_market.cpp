#include <doctest.h>

#include <vector>

#include "canesim/market.hpp"

using namespace canesim;

namespace {

MarketBook book_with(std::vector<double> sale, std::vector<double> stock, double price = 10.0) {
  MarketBook b;
  b.price = price;
  b.initial_price = price;
  b.sale_history = std::move(sale);
  b.stock_history = std::move(stock);
  return b;
}

StorageFacilitySpec one_commodity_storage(double capacity, double fee_mult, double loss,
                                          int expiration) {
  StorageFacilitySpec s;
  s.capacity = {capacity};
  s.fee_multiplier = {fee_mult};
  s.loss_rate = {loss};
  s.expiration = {expiration};
  return s;
}

}  // namespace

TEST_CASE("absolute pricing from the weighted sale/stock ratios") {
  // all ratios 0.5 -> base 1 -> price = crop_mult_factor
  auto b = book_with({1, 1, 1, 1}, {2, 2, 2, 2});
  CHECK(set_price_absolute(b, 300.0) == doctest::Approx(300.0).epsilon(1e-12));

  // no sales -> clamped at 0.1 -> price 0.01 * cmf
  auto z = book_with({0, 0, 0, 0}, {2, 2, 2, 2});
  CHECK(set_price_absolute(z, 300.0) == doctest::Approx(3.0).epsilon(1e-12));

  // ratios 1 -> base 2 -> price 4 * cmf
  auto full = book_with({2, 2, 2, 2}, {2, 2, 2, 2});
  CHECK(set_price_absolute(full, 300.0) == doctest::Approx(1200.0).epsilon(1e-12));

  // zero stock slots contribute nothing; the newest slot alone gives
  // base = 0.4 * 2 * 0.5 = 0.4, squared 0.16
  auto empty_slots = book_with({1, 1, 1, 1}, {0, 0, 0, 2});
  CHECK(set_price_absolute(empty_slots, 300.0) == doctest::Approx(300.0 * 0.16).epsilon(1e-9));

  // shorter history holds the current price
  auto young = book_with({1, 1, 1}, {2, 2, 2}, 42.0);
  CHECK(set_price_absolute(young, 300.0) == 42.0);

  auto bad = book_with({-1, 1, 1, 1}, {2, 2, 2, 2});
  CHECK_THROWS(set_price_absolute(bad, 300.0));
}

TEST_CASE("trend pricing reproduces the worked 4.3% move") {
  // deviations oldest->newest: -5, +5, +10, +2 percent of the usual sale 100
  auto b = book_with({95, 105, 110, 102}, {}, 1000.0);
  CHECK(set_price_trend(b, 100.0) == doctest::Approx(1043.0).epsilon(1e-12));

  auto flat = book_with({100, 100, 100, 100}, {}, 1000.0);
  CHECK(set_price_trend(flat, 100.0) == doctest::Approx(1000.0).epsilon(1e-12));

  auto single = book_with({100, 100, 100, 110}, {}, 1000.0);
  CHECK(set_price_trend(single, 100.0) == doctest::Approx(1040.0).epsilon(1e-12));

  auto young = book_with({100, 100}, {}, 1000.0);
  CHECK(set_price_trend(young, 100.0) == 1000.0);
}

TEST_CASE("consumer demand from price move and recent sales") {
  // worked example: price 150 -> 250, past-4 sales 12000 against a usual 4-step
  // total of 10000 (usual per step 2500)
  double d = consumer_demand(250.0, 150.0, 12000.0, 2500.0, 1.0);
  CHECK(d == doctest::Approx(0.48 * 2500.0).epsilon(1e-12));

  CHECK(consumer_demand(100.0, 100.0, 4.0 * 2500.0, 2500.0, 0.5) == doctest::Approx(2500.0));

  // falling price and starved recent sales raise demand
  double up = consumer_demand(90.0, 100.0, 0.8 * 4.0 * 2500.0, 2500.0, 0.5);
  CHECK(up == doctest::Approx((1.0 + 10.0 / 90.0) * 1.2 * 2500.0).epsilon(1e-12));

  // a price collapse pushes the raw factor past the band and clamps
  double clamped = consumer_demand(50.0, 100.0, 4.0 * 2500.0, 2500.0, 0.5);
  CHECK(clamped == doctest::Approx(1.5 * 2500.0));

  CHECK_THROWS(consumer_demand(0.0, 100.0, 10000.0, 2500.0, 0.5));
}

TEST_CASE("absolute price never falls below the squared clamp floor") {
  Rng rng(61, Stream::Scenario);
  for (int i = 0; i < 300; ++i) {
    MarketBook b;
    for (int k = 0; k < 4; ++k) {
      b.sale_history.push_back(rng.uniform01() * 100.0);
      b.stock_history.push_back(rng.uniform01() * 100.0);
    }
    double cmf = 1.0 + rng.uniform01() * 1000.0;
    CHECK(set_price_absolute(b, cmf) >= 0.01 * cmf - 1e-12);
  }
}

TEST_CASE("consumer demand stays inside the variation band") {
  Rng rng(62, Stream::Scenario);
  for (int i = 0; i < 300; ++i) {
    double now = 1.0 + rng.uniform01() * 500.0;
    double prev = 1.0 + rng.uniform01() * 500.0;
    double usual = 10.0 + rng.uniform01() * 1000.0;
    double past4 = rng.uniform01() * 8.0 * usual;
    double limit = rng.uniform01();
    double d = consumer_demand(now, prev, past4, usual, limit);
    CHECK(d >= usual * (1.0 - limit) - 1e-9);
    CHECK(d <= usual * (1.0 + limit) + 1e-9);
  }
}

TEST_CASE("consumer demand is non-increasing in the current price") {
  double prev = 0.0;
  for (double price = 300.0; price >= 50.0; price -= 10.0) {
    double d = consumer_demand(price, 150.0, 10000.0, 2500.0, 1.0);
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
}

TEST_CASE("import export step") {
  TradeParams p;
  p.factor_of_import = 2.0;
  p.factor_of_export = 1.0;
  p.maximum_import = 80.0;
  p.maximum_export = 100.0;
  p.usual_price = 100.0;

  auto flat = import_export_step(100.0, p);
  CHECK(flat.import_qty == 0.0);
  CHECK(flat.export_qty == 0.0);

  auto imp = import_export_step(150.0, p);
  CHECK(imp.import_qty == doctest::Approx(80.0));  // 2*50 capped
  CHECK(imp.export_qty == 0.0);

  auto exp = import_export_step(70.0, p);
  CHECK(exp.export_qty == doctest::Approx(30.0));
  CHECK(exp.import_qty == 0.0);
}

TEST_CASE("policy loosens the busy trade direction") {
  TradeParams p;
  p.factor_of_import = 2.0;
  p.factor_of_export = 1.0;
  p.maximum_import = 80.0;
  p.maximum_export = 100.0;
  p.import_tax = 0.10;
  p.export_tax = 0.20;
  p.usual_price = 100.0;

  std::vector<TradeStep> imports{{1, 0}, {1, 0}, {0, 0}, {1, 0}, {0, 0}};
  auto q = p;
  policy_step(imports, q, 0.1);
  CHECK(q.import_tax == doctest::Approx(0.09));
  CHECK(q.maximum_import == doctest::Approx(88.0));
  CHECK(q.factor_of_import == doctest::Approx(2.2));
  CHECK(q.export_tax == doctest::Approx(0.22));
  CHECK(q.maximum_export == doctest::Approx(100.0));

  std::vector<TradeStep> quiet{{1, 0}, {0, 1}, {0, 0}, {1, 0}, {0, 1}};
  auto r = p;
  policy_step(quiet, r, 0.1);
  CHECK(r.import_tax == doctest::Approx(0.10));
  CHECK(r.export_tax == doctest::Approx(0.20));

  std::vector<TradeStep> exports{{0, 1}, {0, 1}, {0, 0}, {0, 1}, {0, 0}};
  auto s = p;
  policy_step(exports, s, 0.1);
  CHECK(s.export_tax == doctest::Approx(0.18));
  CHECK(s.maximum_export == doctest::Approx(110.0));
  CHECK(s.factor_of_export == doctest::Approx(1.1));
  CHECK(s.import_tax == doctest::Approx(0.11));

  std::vector<TradeStep> young{{1, 0}, {1, 0}, {1, 0}};
  auto t = p;
  policy_step(young, t, 0.1);
  CHECK(t.import_tax == doctest::Approx(0.10));  // window not full yet
}

TEST_CASE("storage fees follow the absolute pricing rule") {
  StorageLedger ledger(one_commodity_storage(100.0, 8.0, 0.0, 10));
  // fresh facility quotes the floor fee
  CHECK(ledger.fee(0) == doctest::Approx(0.08));

  // four steps of zero requests: fee stays at the floor 0.01 * multiplier
  for (int i = 0; i < 4; ++i) {
    std::vector<double> none{0.0};
    ledger.record_request_totals(none);
  }
  ledger.reprice();
  CHECK(ledger.fee(0) == doctest::Approx(0.08).epsilon(1e-12));

  // requests at half the remaining capacity for four steps: fee = multiplier
  StorageLedger busy(one_commodity_storage(100.0, 8.0, 0.0, 10));
  for (int i = 0; i < 4; ++i) {
    std::vector<double> half{50.0};
    busy.record_request_totals(half);
  }
  busy.reprice();
  CHECK(busy.fee(0) == doctest::Approx(8.0).epsilon(1e-12));

  // a full facility contributes nothing per slot, so the fee sits at the floor
  StorageLedger full(one_commodity_storage(100.0, 8.0, 0.0, 10));
  std::vector<StorageRequest> fill{{1, FarmerType::Type3, 0, 100.0}};
  full.admit_and_age(fill);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> some{25.0};
    full.record_request_totals(some);  // remaining capacity is 0 every step
  }
  full.reprice();
  CHECK(full.fee(0) == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("storage admits by owner type priority and capacity") {
  StorageLedger ledger(one_commodity_storage(100.0, 1.0, 0.0, 10));
  std::vector<StorageRequest> reqs{
      {1, FarmerType::Type1, 0, 80.0},
      {2, FarmerType::Type3, 0, 80.0},
  };
  auto rejected = ledger.admit_and_age(reqs);
  CHECK(rejected[0] == doctest::Approx(60.0));  // Type1 squeezed to the remainder
  CHECK(rejected[1] == doctest::Approx(0.0));
  CHECK(ledger.occupied(0) == doctest::Approx(100.0));
}

TEST_CASE("storage decay and expiry") {
  StorageLedger ledger(one_commodity_storage(1000.0, 1.0, 0.02, 2));
  std::vector<StorageRequest> reqs{{1, FarmerType::Type1, 0, 100.0}};
  ledger.admit_and_age(reqs);
  REQUIRE(ledger.lots().size() == 1);
  CHECK(ledger.lots()[0].quantity == doctest::Approx(100.0));

  ledger.admit_and_age({});
  CHECK(ledger.lots()[0].quantity == doctest::Approx(98.0));
  CHECK(ledger.lots()[0].age == 1);

  ledger.admit_and_age({});
  CHECK(ledger.lots()[0].age == 2);
  ledger.admit_and_age({});
  CHECK(ledger.lots().empty());  // age 3 exceeds the 2-step expiration
}
