#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "canesim/farmer.hpp"

using namespace canesim;

namespace {

// independent slope oracle: mean-centered covariance over variance
double slope_oracle(const std::vector<double>& y) {
  double n = static_cast<double>(y.size());
  double xbar = (n - 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double dx = static_cast<double>(i) - xbar;
    num += dx * (y[i] - ybar);
    den += dx * dx;
  }
  return num / den;
}

CropSpec make_crop(int end_cycle, int harvest_cycle) {
  CropSpec c;
  c.id = "test";
  c.end_cycle = end_cycle;
  c.harvest_cycle = harvest_cycle;
  return c;
}

}  // namespace

TEST_CASE("init_farmer is deterministic and matches the stated distributions") {
  FarmerInitParams params;
  {
    Rng a(11, Stream::Population);
    Rng b(11, Stream::Population);
    auto fa = init_farmer(FarmerType::Type1, params, a);
    auto fb = init_farmer(FarmerType::Type1, params, b);
    CHECK(fa.savings == fb.savings);
    CHECK(fa.state.land == fb.state.land);
    CHECK(fa.state.family_size == fb.state.family_size);
  }

  const int n = 20000;
  Rng rng(3, Stream::Population);
  double sum_savings1 = 0, sum_land2 = 0;
  for (int i = 0; i < n; ++i) {
    auto f1 = init_farmer(FarmerType::Type1, params, rng);
    auto f2 = init_farmer(FarmerType::Type2, params, rng);
    sum_savings1 += f1.savings;
    sum_land2 += f2.state.land;
    CHECK(f1.state.family_size >= 4);
    CHECK(f1.state.family_size <= 6);
    CHECK(f1.state.land >= params.min_land);
    CHECK(f1.state.safety_buffer == doctest::Approx(0.10 * f1.savings));
    CHECK(f2.state.credit_rating == 2.0 * params.base_credit_rating);
    CHECK(f1.state.credit_rating == params.base_credit_rating);
  }
  // sample means within 3 sigma / sqrt(n) of the configured means
  CHECK(std::abs(sum_savings1 / n - 500000.0) < 3.0 * 10000.0 / std::sqrt(double(n)));
  CHECK(std::abs(sum_land2 / n - 3.0) < 3.0 * 1.0 / std::sqrt(double(n)));

  Rng r3(4, Stream::Population);
  auto f3 = init_farmer(FarmerType::Type3, params, r3);
  CHECK(f3.state.info_noise_sigma == 0.0);
  CHECK(f3.state.water_endowment == params.type3_water_surplus);
}

TEST_CASE("perceive") {
  Rng rng(5, Stream::Perception);
  CHECK(perceive(100.0, 0.0, rng) == 100.0);

  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = perceive(100.0, 1.0, rng, false);
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  CHECK(mean == doctest::Approx(100.0).epsilon(0.001));
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(1.0).epsilon(0.05));

  for (int i = 0; i < 200; ++i) CHECK(perceive(0.5, 10.0, rng) >= 0.0);
  CHECK_THROWS_AS(perceive(1.0, -1.0, rng), std::invalid_argument);
}

TEST_CASE("update_upper_limit follows the arctan rule") {
  std::vector<double> flat{100, 100, 100};
  CHECK(update_upper_limit(flat, 2.0, 4.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

  // slope exactly 1
  std::vector<double> unit{0, 1, 2};
  CHECK(update_upper_limit(unit, 2.0, 4.0, 1.0) == doctest::Approx(3.0).epsilon(1e-12));

  // falling savings: oracle slope then the closed form
  std::vector<double> falling{100, 90, 80};
  double m = slope_oracle(falling);
  CHECK(m == doctest::Approx(-10.0).epsilon(1e-12));
  double expected = 2.0 * (1.0 + 2.0 * std::atan(m) / 3.14159265358979323846);
  CHECK(update_upper_limit(falling, 2.0, 4.0, 1.0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.1270).epsilon(1e-3));

  // short window keeps the previous limit
  std::vector<double> one{100};
  CHECK(update_upper_limit(one, 2.0, 4.0, 1.23) == 1.23);
}

TEST_CASE("update_upper_limit is monotone in the slope and bounded") {
  Rng rng(101, Stream::Scenario);
  for (int i = 0; i < 300; ++i) {
    double m1 = (rng.uniform01() - 0.5) * 200.0;
    double m2 = m1 + rng.uniform01() * 50.0;
    std::vector<double> w1{0, m1, 2 * m1};
    std::vector<double> w2{0, m2, 2 * m2};
    double land = 1.0 + rng.uniform01() * 9.0;
    double la = rng.uniform01() * land;
    double u1 = update_upper_limit(w1, la, land, la);
    double u2 = update_upper_limit(w2, la, land, la);
    CHECK(u2 >= u1 - 1e-12);
    CHECK(u1 >= 0.0);
    CHECK(u1 <= land);
  }
}

TEST_CASE("allocate_land matches hand evaluation") {
  CropSpec c = make_crop(3, 3);
  c.initial_cost = 1000;
  c.labor_requirement = 1.0;   // wage 1000 -> ln*lw = 1000
  c.water_requirement = 1.0;   // wp 500 -> wn*wp = 500
  c.fert_pest_cost = 500;

  // ts=100000, la=0, sb=10000, ppc*fs=20000 per step, hc=3
  double got = allocate_land(100000, 0, 10000, 20000, c, 1000, 500, 5.0, CostMode::WithWater);
  CHECK(got == doctest::Approx(5.0).epsilon(1e-12));  // min(30000/3000, ul)

  // all budget eaten by the buffer
  CHECK(allocate_land(10000, 0, 10000, 20000, c, 1000, 500, 5.0, CostMode::WithWater) == 0.0);

  // budget binds instead of the upper limit
  CHECK(allocate_land(100000, 0, 10000, 20000, c, 1000, 500, 20.0, CostMode::WithWater) ==
        doctest::Approx(10.0).epsilon(1e-12));

  // without water the wn*wp term drops from the denominator
  double no_water =
      allocate_land(100000, 0, 10000, 20000, c, 1000, 500, 20.0, CostMode::WithoutWater);
  CHECK(no_water == doctest::Approx(30000.0 / 2500.0).epsilon(1e-12));

  // per-cycle variant multiplies the per-step terms by the harvest cycle
  double per_cycle =
      allocate_land(100000, 0, 10000, 20000, c, 1000, 500, 20.0, CostMode::WithWater, true);
  CHECK(per_cycle == doctest::Approx(30000.0 / (1000.0 + 3.0 * 2000.0)).epsilon(1e-12));
}

TEST_CASE("allocate_land never exceeds the binding budget") {
  Rng rng(55, Stream::Scenario);
  for (int i = 0; i < 500; ++i) {
    CropSpec c = make_crop(4, 2);
    c.initial_cost = rng.uniform01() * 5000 + 1;
    c.labor_requirement = rng.uniform01() * 2;
    c.water_requirement = rng.uniform01() * 2;
    c.fert_pest_cost = rng.uniform01() * 1000;
    double ts = rng.uniform01() * 200000;
    double la = rng.uniform01() * 50000;
    double sb = rng.uniform01() * 20000;
    double ppc_fs = rng.uniform01() * 10000;
    double wage = 500 + rng.uniform01() * 2000;
    double wp = rng.uniform01() * 100;
    double ul = rng.uniform01() * 10;
    double alloc = allocate_land(ts, la, sb, ppc_fs, c, wage, wp, ul, CostMode::WithWater);
    REQUIRE(alloc >= 0.0);
    double denom = c.initial_cost + c.labor_requirement * wage + c.water_requirement * wp +
                   c.fert_pest_cost;
    double budget = ts + la - sb - ppc_fs * c.harvest_cycle;
    if (alloc < ul) CHECK(alloc * denom <= std::max(budget, 0.0) + 1e-6);
    CHECK(alloc <= ul);
  }
}

TEST_CASE("estimate_profit matches hand evaluation") {
  CropSpec c = make_crop(6, 3);
  c.produce = 10;
  c.initial_cost = 500;
  c.water_requirement = 1.0;  // wp 20 over 6 steps -> 120
  c.labor_requirement = 1.0;  // wage 50 over 6 steps -> 300

  CHECK(estimate_profit(c, 2.0, 100.0, 50.0, 20.0, CostMode::WithWater) ==
        doctest::Approx(2160.0).epsilon(1e-12));
  CHECK(estimate_profit(c, 0.0, 100.0, 50.0, 20.0, CostMode::WithWater) == 0.0);
  CHECK(estimate_profit(c, 2.0, 0.0, 50.0, 20.0, CostMode::WithWater) ==
        doctest::Approx(-1840.0).epsilon(1e-12));
  // water term absent for self-sufficient farmers
  CHECK(estimate_profit(c, 2.0, 100.0, 50.0, 20.0, CostMode::WithoutWater) ==
        doctest::Approx(2160.0 + 2.0 * 120.0).epsilon(1e-12));
}

TEST_CASE("rank_crops orders by profit with index tie-break") {
  std::vector<double> two{5.0, 9.0};
  CHECK(rank_crops(two) == std::vector<int>{1, 0});
  std::vector<double> tie{5.0, 5.0};
  CHECK(rank_crops(tie) == std::vector<int>{0, 1});
  std::vector<double> one{3.0};
  CHECK(rank_crops(one) == std::vector<int>{0});
  CHECK(rank_crops(std::vector<double>{}).empty());

  // shifting all profits by a constant keeps the order
  Rng rng(77, Stream::Scenario);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p;
    for (int k = 0; k < 6; ++k) p.push_back(rng.uniform01() * 100);
    auto base = rank_crops(p);
    for (auto& v : p) v += 42.5;
    CHECK(rank_crops(p) == base);
  }
}

TEST_CASE("rescale_for_water") {
  std::vector<double> land{4.0};
  std::vector<double> req{6.0};
  CHECK(rescale_for_water(land, 6.0, req)[0] == doctest::Approx(4.0));
  CHECK(rescale_for_water(land, 0.0, req)[0] == 0.0);
  CHECK(rescale_for_water(land, 3.0, req)[0] == doctest::Approx(2.0).epsilon(1e-12));
  // over-delivery never scales above the request
  CHECK(rescale_for_water(land, 12.0, req)[0] == doctest::Approx(4.0));

  std::vector<double> zero_req{0.0};
  CHECK_THROWS_AS(rescale_for_water(land, 3.0, zero_req), std::invalid_argument);
}

TEST_CASE("evaluate_lender_offer compares net profit against rain-fed options") {
  // crop 0: offered, water-needing; crop 1: rain-fed
  std::vector<CropSpec> crops(2);
  crops[0] = make_crop(1, 1);
  crops[0].id = "offered";
  crops[0].produce = 100;
  crops[0].water_requirement = 1.0;
  crops[1] = make_crop(1, 1);
  crops[1].id = "rainfed";
  crops[1].produce = 10;

  std::vector<double> own{1.0, 1.0};
  std::vector<double> wages{0.0, 0.0};

  // offered net at share 0.2: 100*1*ie0*0.8; rain-fed: 10*ie1
  std::vector<double> ie{1.0, 10.0};  // offered net 80 vs rain-fed 100
  auto d = evaluate_lender_offer(crops, own, ie, wages, 0, 1.0, 0.2);
  CHECK_FALSE(d.accept);
  CHECK(d.better_rain_fed_crop == 1);

  ie[1] = 5.0;  // rain-fed 50 vs offered net 80
  d = evaluate_lender_offer(crops, own, ie, wages, 0, 1.0, 0.2);
  CHECK(d.accept);

  // no rain-fed alternative in the set
  crops[1].water_requirement = 2.0;
  ie[1] = 10.0;
  d = evaluate_lender_offer(crops, own, ie, wages, 0, 1.0, 0.2);
  CHECK(d.accept);
}

TEST_CASE("compute_total_expense") {
  CropSpec c = make_crop(4, 4);
  c.labor_requirement = 1.0;  // wage 10000
  c.water_requirement = 1.0;  // wp 2000
  c.fert_pest_cost = 5000;
  c.initial_cost = 5000;
  // per step: 10000 + 2000 + 5000 (ppc*fs) + 5000 = 22000 on one hectare
  CHECK(compute_total_expense(c, 1.0, 0, 10000, 2000, 5000, true, CostMode::WithWater) == 0.0);
  CHECK(compute_total_expense(c, 1.0, 3, 10000, 2000, 5000, true, CostMode::WithWater) ==
        doctest::Approx(66000.0).epsilon(1e-12));
  CHECK(compute_total_expense(c, 1.0, 3, 10000, 2000, 5000, false, CostMode::WithWater) ==
        doctest::Approx(71000.0).epsilon(1e-12));
  // water drops for Type2/Type3
  CHECK(compute_total_expense(c, 1.0, 3, 10000, 2000, 5000, true, CostMode::WithoutWater) ==
        doctest::Approx(60000.0).epsilon(1e-12));
}

TEST_CASE("apply_resource_shortfall") {
  CHECK(apply_resource_shortfall(0.9, 1.0, 5.0, 5.0) == doctest::Approx(0.9));
  CHECK(apply_resource_shortfall(1.0, 0.5, 0.0, 5.0) == 0.0);
  CHECK(apply_resource_shortfall(1.0, 0.8, 2.5, 5.0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(apply_resource_shortfall(1.0, 0.0, 0.0, 0.0) == 1.0);
  CHECK_THROWS_AS(apply_resource_shortfall(1.0, 0.5, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_resource_shortfall(1.0, 0.5, 6.0, 5.0), std::invalid_argument);
}

TEST_CASE("pesticide misses are consecutive and fatal past the limit") {
  CropSpec c = make_crop(9, 3);
  c.prone_to_pest = 2;

  Planting p;
  p.crop = 0;
  p.quality = 1.0;
  apply_pesticide_step(p, c, false);
  apply_pesticide_step(p, c, false);
  CHECK(p.quality == 1.0);  // two misses tolerated
  apply_pesticide_step(p, c, false);
  CHECK(p.quality == 0.0);  // third consecutive miss kills

  Planting q;
  q.crop = 0;
  q.quality = 1.0;
  for (int i = 0; i < 6; ++i) apply_pesticide_step(q, c, i % 2 == 1);
  CHECK(q.quality == 1.0);  // alternating payment resets the counter

  Planting r;
  r.crop = 0;
  for (int i = 0; i < 10; ++i) apply_pesticide_step(r, c, true);
  CHECK(r.missed_pesticide == 0);
}

TEST_CASE("harvest quantity") {
  CropSpec c = make_crop(3, 3);
  c.produce = 50;
  Planting p;
  p.crop = 0;
  p.land = 2.0;
  p.quality = 1.0;
  p.steps_grown = 3;
  CHECK(harvest_quantity(p, c) == doctest::Approx(100.0));
  p.quality = 0.4;
  CHECK(harvest_quantity(p, c) == doctest::Approx(40.0).epsilon(1e-12));
  p.steps_grown = 2;
  CHECK_THROWS_AS(harvest_quantity(p, c), std::logic_error);
}

TEST_CASE("income expectation update") {
  CHECK(update_income_expectation(100.0, 27500.0, 100.0) == doctest::Approx(275.0));
  CHECK(update_income_expectation(100.0, 27500.0, 0.0) == 100.0);
}

TEST_CASE("storage decision") {
  std::vector<double> hist{90, 90, 90, 90, 90};
  CHECK(storage_decision(100.0, 10000.0, 100.0, hist, 5.0) == 0.0);  // price above average

  std::vector<double> high{100, 100, 100, 100, 100};
  CHECK(storage_decision(500.0, 10000.0, 80.0, high, 5.0) ==
        doctest::Approx(200.0).epsilon(1e-12));  // budget 1000 over fee 5
  CHECK(storage_decision(100.0, 10000.0, 80.0, high, 5.0) == doctest::Approx(100.0));

  std::vector<double> shallow{100, 100};
  CHECK(storage_decision(100.0, 10000.0, 80.0, shallow, 5.0) == 0.0);  // rule inactive
}

TEST_CASE("exit rule uses a strict four-step subsistence threshold") {
  CHECK(check_exit(79999.0, 5000.0, 4, 1));
  CHECK_FALSE(check_exit(80000.0, 5000.0, 4, 1));
  CHECK_FALSE(check_exit(800000.0, 5000.0, 4, 1));
  CHECK(check_exit(299999.0, 5000.0, 5, 3));
}
