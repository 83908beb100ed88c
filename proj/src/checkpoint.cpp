#include <json.hpp>

#include "canesim/engine.hpp"

// Full-state snapshots. The restore path reconstructs the simulation from the
// embedded scenario (which recreates the account table in the same order) and
// then overwrites every piece of evolving state, so a resumed run continues
// exactly where the snapshot left off.

namespace canesim {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json planting_to_json(const Planting& p) {
  return {{"crop", p.crop},
          {"land", p.land},
          {"planted_at", p.planted_at},
          {"steps_grown", p.steps_grown},
          {"quality", p.quality},
          {"missed_pesticide", p.missed_pesticide},
          {"water_source", static_cast<int>(p.water_source)},
          {"lender", p.lender},
          {"lender_share", p.lender_share},
          {"water_volume", p.water_volume}};
}

Planting planting_from_json(const json& j) {
  Planting p;
  p.crop = j.at("crop");
  p.land = j.at("land");
  p.planted_at = j.at("planted_at");
  p.steps_grown = j.at("steps_grown");
  p.quality = j.at("quality");
  p.missed_pesticide = j.at("missed_pesticide");
  p.water_source = static_cast<WaterSource>(j.at("water_source").get<int>());
  p.lender = j.at("lender");
  p.lender_share = j.at("lender_share");
  p.water_volume = j.at("water_volume");
  return p;
}

json farmer_to_json(const FarmerState& f) {
  json plantings = json::array();
  for (const auto& p : f.plantings) plantings.push_back(planting_to_json(p));
  json harvests = json::array();
  for (const auto& h : f.open_harvests)
    harvests.push_back({{"crop", h.crop},
                        {"harvested_at", h.harvested_at},
                        {"quantity", h.quantity},
                        {"revenue", h.revenue}});
  return {{"id", f.id},
          {"type", static_cast<int>(f.type)},
          {"family_size", f.family_size},
          {"per_person_charge", f.per_person_charge},
          {"safety_buffer", f.safety_buffer},
          {"land", f.land},
          {"credit_rating", f.credit_rating},
          {"info_noise_sigma", f.info_noise_sigma},
          {"water_endowment", f.water_endowment},
          {"plantings", plantings},
          {"income_expectation", f.expect.income_expectation},
          {"upper_limit", f.expect.upper_limit},
          {"last_alloc", f.expect.last_alloc},
          {"first_harvest_step", f.expect.first_harvest_step},
          {"savings_history", f.savings_history},
          {"open_harvests", harvests},
          {"on_hand", f.on_hand},
          {"exited", f.exited},
          {"exited_step", f.exited_step}};
}

void farmer_from_json(const json& j, FarmerState& f) {
  f.family_size = j.at("family_size");
  f.per_person_charge = j.at("per_person_charge");
  f.safety_buffer = j.at("safety_buffer");
  f.land = j.at("land");
  f.credit_rating = j.at("credit_rating");
  f.info_noise_sigma = j.at("info_noise_sigma");
  f.water_endowment = j.at("water_endowment");
  f.plantings.clear();
  for (const auto& pj : j.at("plantings")) f.plantings.push_back(planting_from_json(pj));
  f.expect.income_expectation = j.at("income_expectation").get<std::vector<double>>();
  f.expect.upper_limit = j.at("upper_limit").get<std::vector<double>>();
  f.expect.last_alloc = j.at("last_alloc").get<std::vector<double>>();
  f.expect.first_harvest_step = j.at("first_harvest_step").get<std::vector<int>>();
  f.savings_history = j.at("savings_history").get<std::vector<double>>();
  f.open_harvests.clear();
  for (const auto& hj : j.at("open_harvests"))
    f.open_harvests.push_back({hj.at("crop"), hj.at("harvested_at"), hj.at("quantity"),
                               hj.at("revenue")});
  f.on_hand = j.at("on_hand").get<std::vector<double>>();
  f.exited = j.at("exited");
  f.exited_step = j.at("exited_step");
}

json book_to_json(const MarketBook& b) {
  return {{"price", b.price},
          {"initial_price", b.initial_price},
          {"stock", b.stock},
          {"price_history", b.price_history},
          {"sale_history", b.sale_history},
          {"stock_history", b.stock_history}};
}

void book_from_json(const json& j, MarketBook& b) {
  b.price = j.at("price");
  b.initial_price = j.at("initial_price");
  b.stock = j.at("stock");
  b.price_history = j.at("price_history").get<std::vector<double>>();
  b.sale_history = j.at("sale_history").get<std::vector<double>>();
  b.stock_history = j.at("stock_history").get<std::vector<double>>();
}

json frame_to_json(const MetricsFrame& m) {
  return {{"step", m.step},
          {"mean_savings", m.mean_savings},
          {"median_savings", m.median_savings},
          {"exited", m.exited},
          {"price", m.price},
          {"sales", m.sales},
          {"stock", m.stock},
          {"mill_dues", m.mill_dues},
          {"sugar_output", m.sugar_output},
          {"ethanol_output", m.ethanol_output}};
}

MetricsFrame frame_from_json(const json& j) {
  MetricsFrame m;
  m.step = j.at("step");
  m.mean_savings = j.at("mean_savings");
  m.median_savings = j.at("median_savings");
  m.exited = j.at("exited");
  m.price = j.at("price").get<std::vector<double>>();
  m.sales = j.at("sales").get<std::vector<double>>();
  m.stock = j.at("stock").get<std::vector<double>>();
  m.mill_dues = j.at("mill_dues");
  m.sugar_output = j.at("sugar_output");
  m.ethanol_output = j.at("ethanol_output");
  return m;
}

}  // namespace

json Simulation::checkpoint() const {
  json j;
  j["version"] = kCheckpointVersion;
  j["scenario"] = scenario_to_json(config_);
  j["step"] = step_;
  j["wages"] = wages_;
  j["water_price"] = water_price_;
  j["frp_history"] = frp_history_;

  json farmers = json::array();
  for (const auto& f : farmers_) farmers.push_back(farmer_to_json(f));
  j["farmers"] = farmers;

  json books = json::array();
  for (const auto& b : books_) books.push_back(book_to_json(b));
  j["books"] = books;

  json trade = json::array();
  for (const auto& t : trade_)
    trade.push_back({{"factor_of_import", t.factor_of_import},
                     {"factor_of_export", t.factor_of_export},
                     {"maximum_import", t.maximum_import},
                     {"maximum_export", t.maximum_export},
                     {"import_tax", t.import_tax},
                     {"export_tax", t.export_tax},
                     {"import_price", t.import_price},
                     {"export_price", t.export_price},
                     {"usual_price", t.usual_price}});
  j["trade"] = trade;
  json trade_hist = json::array();
  for (const auto& hist : trade_history_) {
    json h = json::array();
    for (const auto& ts : hist) h.push_back({{"i", ts.import_qty}, {"e", ts.export_qty}});
    trade_hist.push_back(h);
  }
  j["trade_history"] = trade_hist;

  json lots = json::array();
  for (const auto& lot : storage_.lots())
    lots.push_back({{"owner", lot.owner},
                    {"owner_type", static_cast<int>(lot.owner_type)},
                    {"commodity", lot.commodity},
                    {"quantity", lot.quantity},
                    {"age", lot.age}});
  j["storage_lots"] = lots;
  j["storage_fee_multiplier"] = storage_.spec().fee_multiplier;
  json fees = json::array();
  for (std::size_t c = 0; c < config_.commodities.size(); ++c)
    fees.push_back(storage_.fee(static_cast<int>(c)));
  j["storage_fees"] = fees;
  j["storage_request_history"] = storage_.request_history();
  j["storage_remaining_history"] = storage_.remaining_history();

  if (mill_) {
    json dues = json::array();
    for (const auto& d : mill_->dues)
      dues.push_back({{"farmer", d.farmer},
                      {"quantity", d.quantity},
                      {"frp", d.frp},
                      {"owed", d.owed},
                      {"recorded_at", d.recorded_at}});
    j["mill"] = {{"credit_rating", mill_->credit_rating}, {"dues", dues}};
  }

  json loans = json::array();
  for (const auto& acc : loan_book_)
    loans.push_back({{"borrower", acc.borrower},
                     {"kind", static_cast<int>(acc.kind)},
                     {"principal", acc.principal},
                     {"rate_per_step", acc.rate_per_step},
                     {"term", acc.term},
                     {"installment", acc.installment},
                     {"outstanding", acc.outstanding},
                     {"collateral_value", acc.collateral_value},
                     {"defaults", acc.defaults},
                     {"active", acc.active}});
  j["loans"] = loans;

  json offers = json::array();
  for (const auto& o : mill_offers_) offers.push_back({{"farmer", o.farmer}, {"qty", o.quantity}});
  j["mill_offers"] = offers;

  json balances = json::array();
  json initials = json::array();
  for (std::size_t a = 0; a < ledger_.account_count(); ++a) {
    AccountId id{static_cast<std::int32_t>(a)};
    balances.push_back(ledger_.balance(id));
    initials.push_back(ledger_.initial_balance(id));
  }
  j["ledger_balances"] = balances;
  j["ledger_initial"] = initials;
  if (ledger_.recording()) {
    json journal = json::array();
    for (const auto& t : ledger_.journal())
      journal.push_back({t.from, t.to, t.amount, t.step, static_cast<int>(t.kind)});
    j["ledger_journal"] = journal;
  }

  json frames = json::array();
  for (const auto& m : metrics_) frames.push_back(frame_to_json(m));
  j["metrics"] = frames;
  return j;
}

Simulation Simulation::restore(const json& snapshot, RunOptions options) {
  if (snapshot.at("version").get<int>() != kCheckpointVersion)
    throw config_error("checkpoint: unsupported version");
  ScenarioConfig config = parse_scenario(snapshot.at("scenario"));
  Simulation sim(config, options);

  sim.step_ = snapshot.at("step");
  sim.ledger_.set_step(sim.step_);
  sim.wages_ = snapshot.at("wages").get<std::vector<double>>();
  sim.water_price_ = snapshot.at("water_price");
  sim.frp_history_ = snapshot.at("frp_history").get<std::vector<double>>();

  const json& farmers = snapshot.at("farmers");
  if (farmers.size() != sim.farmers_.size())
    throw config_error("checkpoint: farmer count does not match scenario");
  for (std::size_t i = 0; i < sim.farmers_.size(); ++i)
    farmer_from_json(farmers[i], sim.farmers_[i]);

  const json& books = snapshot.at("books");
  for (std::size_t c = 0; c < sim.books_.size(); ++c) book_from_json(books[c], sim.books_[c]);

  const json& trade = snapshot.at("trade");
  for (std::size_t c = 0; c < sim.trade_.size(); ++c) {
    TradeParams& t = sim.trade_[c];
    t.factor_of_import = trade[c].at("factor_of_import");
    t.factor_of_export = trade[c].at("factor_of_export");
    t.maximum_import = trade[c].at("maximum_import");
    t.maximum_export = trade[c].at("maximum_export");
    t.import_tax = trade[c].at("import_tax");
    t.export_tax = trade[c].at("export_tax");
    t.import_price = trade[c].at("import_price");
    t.export_price = trade[c].at("export_price");
    t.usual_price = trade[c].at("usual_price");
  }
  const json& trade_hist = snapshot.at("trade_history");
  for (std::size_t c = 0; c < sim.trade_history_.size(); ++c) {
    sim.trade_history_[c].clear();
    for (const auto& tj : trade_hist[c])
      sim.trade_history_[c].push_back({tj.at("i"), tj.at("e")});
  }

  sim.storage_.lots().clear();
  for (const auto& lj : snapshot.at("storage_lots"))
    sim.storage_.lots().push_back({lj.at("owner"),
                                   static_cast<FarmerType>(lj.at("owner_type").get<int>()),
                                   lj.at("commodity"), lj.at("quantity"), lj.at("age")});
  sim.storage_.spec_mut().fee_multiplier =
      snapshot.at("storage_fee_multiplier").get<std::vector<double>>();
  sim.storage_.restore_histories(snapshot.at("storage_fees").get<std::vector<double>>(),
                                 snapshot.at("storage_request_history")
                                     .get<std::vector<std::vector<double>>>(),
                                 snapshot.at("storage_remaining_history")
                                     .get<std::vector<std::vector<double>>>());

  if (snapshot.contains("mill") && sim.mill_) {
    sim.mill_->credit_rating = snapshot.at("mill").at("credit_rating");
    sim.mill_->dues.clear();
    for (const auto& dj : snapshot.at("mill").at("dues"))
      sim.mill_->dues.push_back({dj.at("farmer"), dj.at("quantity"), dj.at("frp"),
                                 dj.at("owed"), dj.at("recorded_at")});
  }

  sim.loan_book_.clear();
  for (const auto& aj : snapshot.at("loans")) {
    LoanAccount acc;
    acc.borrower = aj.at("borrower");
    acc.kind = static_cast<LoanKind>(aj.at("kind").get<int>());
    acc.principal = aj.at("principal");
    acc.rate_per_step = aj.at("rate_per_step");
    acc.term = aj.at("term");
    acc.installment = aj.at("installment");
    acc.outstanding = aj.at("outstanding");
    acc.collateral_value = aj.at("collateral_value");
    acc.defaults = aj.at("defaults");
    acc.active = aj.at("active");
    sim.loan_book_.push_back(acc);
  }
  sim.rebuild_loan_index();

  sim.mill_offers_.clear();
  for (const auto& oj : snapshot.at("mill_offers"))
    sim.mill_offers_.push_back({oj.at("farmer"), oj.at("qty")});

  std::vector<Money> balances = snapshot.at("ledger_balances").get<std::vector<Money>>();
  std::vector<Money> initials = snapshot.at("ledger_initial").get<std::vector<Money>>();
  std::vector<Transfer> journal;
  if (snapshot.contains("ledger_journal") && options.record_journal) {
    for (const auto& tj : snapshot.at("ledger_journal"))
      journal.push_back({tj[0], tj[1], tj[2], tj[3],
                         static_cast<TransferKind>(tj[4].get<int>())});
  }
  sim.ledger_.restore_state(std::move(balances), std::move(initials), std::move(journal));

  sim.metrics_.clear();
  for (const auto& mj : snapshot.at("metrics")) sim.metrics_.push_back(frame_from_json(mj));
  return sim;
}

}  // namespace canesim
