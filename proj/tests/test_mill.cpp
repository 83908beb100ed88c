#include <doctest.h>

#include <vector>

#include "canesim/mill.hpp"
#include "canesim/rng.hpp"

using namespace canesim;

namespace {

MillYields yields_of(double yj, double ym, double ys, double yem, double yej) {
  MillYields y;
  y.juice = yj;
  y.molasses = ym;
  y.sugar = ys;
  y.ethanol_from_molasses = yem;
  y.ethanol_from_juice = yej;
  return y;
}

}  // namespace

TEST_CASE("ethanol mode flips only when juice conversion is a loss") {
  CHECK(decide_ethanol_mode(60.0, 51.0) == EthanolMode::ForcedZero);
  CHECK(decide_ethanol_mode(40.0, 51.0) == EthanolMode::Free);
  CHECK(decide_ethanol_mode(51.0, 51.0) == EthanolMode::Free);  // tie keeps e free
  CHECK_THROWS(decide_ethanol_mode(-1.0, 51.0));
}

TEST_CASE("required_sugarcane corner cases") {
  auto y = yields_of(0.2, 0.04, 0.5, 0.25, 0.5);

  // sugar-only corner
  auto s = required_sugarcane(0.0, 50.0, y, EthanolMode::ForcedZero);
  CHECK(s.sugarcane == doctest::Approx(50.0 / (0.2 * 0.5)).epsilon(1e-12));
  CHECK(s.e == 0.0);

  // forced zero: max of the two single-product needs
  auto m = required_sugarcane(100.0, 50.0, y, EthanolMode::ForcedZero);
  CHECK(m.sugarcane == doctest::Approx(10000.0).epsilon(1e-12));  // max(100/0.01, 500)
  CHECK(m.e == 0.0);

  CHECK(required_sugarcane(0.0, 0.0, y, EthanolMode::Free).sugarcane == 0.0);
  CHECK_THROWS(required_sugarcane(-1.0, 0.0, y, EthanolMode::Free));
}

TEST_CASE("required_sugarcane joint solve hits both constraints") {
  auto y = yields_of(0.2, 0.04, 0.5, 0.25, 0.5);
  auto s = required_sugarcane(100.0, 50.0, y, EthanolMode::Free);
  CHECK(s.sugarcane == doctest::Approx(1363.6363636363636).epsilon(1e-9));
  CHECK(s.e == doctest::Approx(0.6333333333333333).epsilon(1e-9));
  // substitute back through the production formulas
  auto pr = process(s.sugarcane, s.e, y, MillCosts{});
  CHECK(pr.ethanol == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(pr.sugar == doctest::Approx(50.0).epsilon(1e-9));

  // solved e would be negative: falls back to molasses-only ethanol
  auto heavy = required_sugarcane(1.0, 1000.0, y, EthanolMode::Free);
  CHECK(heavy.e == 0.0);
  auto check = process(heavy.sugarcane, 0.0, y, MillCosts{});
  CHECK(check.sugar >= 1000.0 - 1e-9);
  CHECK(check.ethanol >= 1.0 - 1e-9);
}

TEST_CASE("process") {
  auto y = yields_of(0.2, 0.04, 0.5, 0.25, 0.5);
  auto zero = process(0.0, 0.5, y, MillCosts{});
  CHECK(zero.sugar == 0.0);
  CHECK(zero.ethanol == 0.0);
  CHECK(zero.cost == 0.0);

  auto y2 = yields_of(0.2, 0.04, 0.5, 0.25, 0.5);
  auto e0 = process(10000.0, 0.0, y2, MillCosts{});
  CHECK(e0.sugar == doctest::Approx(1000.0));
  CHECK(e0.ethanol == doctest::Approx(100.0));

  auto e1 = process(10000.0, 1.0, y2, MillCosts{});
  CHECK(e1.sugar == 0.0);

  MillCosts costs;
  costs.cane_processing = 2.0;
  costs.molasses_to_ethanol = 10.0;
  costs.juice_to_ethanol = 5.0;
  auto c = process(100.0, 0.5, y2, costs);
  CHECK(c.cost == doctest::Approx(100.0 * 2.0 + 4.0 * 10.0 + 20.0 * 0.5 * 5.0).epsilon(1e-12));

  CHECK_THROWS(process(10.0, 1.5, y2, costs));
  CHECK_THROWS(process(-1.0, 0.5, y2, costs));
}

TEST_CASE("sugar requirement estimate") {
  std::vector<double> four{100, 100, 100, 100};
  CHECK(estimate_sugar_requirement(four, 7.0) == doctest::Approx(100.0));
  std::vector<double> mixed{80, 100, 120, 100};
  CHECK(estimate_sugar_requirement(mixed, 7.0) == doctest::Approx(100.0));
  CHECK(estimate_sugar_requirement({}, 7.0) == 7.0);
  std::vector<double> three{1, 2, 3};
  CHECK(estimate_sugar_requirement(three, 7.0) == 7.0);
}

TEST_CASE("purchase planning") {
  std::vector<CaneOffer> offers{{1, 100.0}, {2, 300.0}, {3, 200.0}};

  // below the locality threshold nothing is collected
  CHECK(plan_purchases(offers, 500.0, 700.0).empty());

  auto p = plan_purchases(offers, 450.0, 0.0);
  REQUIRE(p.size() == 2);  // farmer 1's offer is never reached
  CHECK(p[0].farmer == 2);  // biggest first
  CHECK(p[0].quantity == doctest::Approx(300.0));
  CHECK(p[1].farmer == 3);
  CHECK(p[1].quantity == doctest::Approx(150.0));  // partial

  CHECK(plan_purchases(offers, 0.0, 0.0).empty());
}

TEST_CASE("joint solve is minimal against a grid search") {
  Rng rng(17, Stream::Scenario);
  int tested = 0;
  while (tested < 100) {
    auto y = yields_of(0.1 + rng.uniform01(), 0.01 + 0.2 * rng.uniform01(),
                       0.1 + rng.uniform01(), 0.1 + 10.0 * rng.uniform01(),
                       0.1 + 10.0 * rng.uniform01());
    double E = rng.uniform01() * 1000.0;
    double S = rng.uniform01() * 1000.0;
    auto s = required_sugarcane(E, S, y, EthanolMode::Free);
    if (s.e <= 0.0 || s.e >= 1.0) continue;  // joint solve applies inside the box
    ++tested;
    double best = -1.0;
    for (int k = 0; k <= 1000; ++k) {
      double e = k / 1000.0;
      double eth_per_unit = y.juice * e * y.ethanol_from_juice +
                            y.molasses * y.ethanol_from_molasses;
      if (eth_per_unit <= 0.0) continue;
      double sc = E / eth_per_unit;
      if (sc * y.juice * (1.0 - e) * y.sugar < S) continue;  // sugar short
      if (best < 0.0 || sc < best) best = sc;
    }
    REQUIRE(best > 0.0);
    CHECK(s.sugarcane <= best * 1.002);
  }
}
