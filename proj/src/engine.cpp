#include "canesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace canesim {

namespace {

constexpr double kLandEps = 1e-9;
constexpr double kQtyEps = 1e-12;

// perception sub-keys so distinct decision points never share a draw
enum class NoiseTag : std::uint64_t { WaterPrice = 1, SalePrice = 2, ReleasePrice = 3 };

Rng perception_rng(std::uint64_t seed, int farmer, int step, NoiseTag tag) {
  return Rng(seed, Stream::Perception,
             (static_cast<std::uint64_t>(static_cast<std::uint32_t>(farmer)) << 8) |
                 static_cast<std::uint64_t>(tag),
             static_cast<std::uint64_t>(step));
}

double median_of(std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::array<int, 3> population_split(int size, double f1, double f2) {
  int n1 = static_cast<int>(std::floor(f1 * size));
  int n2 = static_cast<int>(std::floor(f2 * size));
  return {n1, n2, size - n1 - n2};
}

Simulation::Simulation(ScenarioConfig config, RunOptions options)
    : config_(std::move(config)), options_(options), storage_(config_.storage) {
  ledger_.set_recording(options_.record_journal);
  wages_ = config_.wages;
  inflation_.rate_per_step = config_.inflation_rate;
  water_price_ = config_.water.agent_price;

  books_.resize(config_.commodities.size());
  trade_.resize(config_.commodities.size());
  trade_history_.resize(config_.commodities.size());
  for (std::size_t c = 0; c < config_.commodities.size(); ++c) {
    const CommodityConfig& com = config_.commodities[c];
    trade_[c] = com.trade;
    if (!com.has_market) continue;
    books_[c].price = com.initial_price;
    books_[c].initial_price = com.initial_price;
    books_[c].stock = com.initial_stock;
  }

  init_population();
  farmer_loans_.assign(farmers_.size(), {});
  open_fixed_accounts();

  if (config_.mill.present) {
    MillState m;
    m.yields = config_.mill.yields;
    m.costs = config_.mill.costs;
    m.account = mill_account_;
    m.maintenance_reserve = config_.mill.maintenance_reserve;
    m.collection_threshold = config_.mill.collection_threshold;
    m.credit_rating = config_.mill.credit_rating;
    m.initial_sugar_demand = config_.mill.initial_sugar_demand;
    mill_ = m;
  }

  current_flows_ = StepFlows{};
  current_flows_.harvested.assign(config_.commodities.size(), 0.0);
  current_flows_.dumped.assign(config_.commodities.size(), 0.0);
  current_flows_.stored.assign(config_.commodities.size(), 0.0);
  current_flows_.mill_purchased.assign(config_.commodities.size(), 0.0);

  record_metrics();  // step-0 frame
}

void Simulation::init_population() {
  auto split = population_split(config_.population.size, config_.population.frac_type1,
                                config_.population.frac_type2);
  Rng rng(config_.seed, Stream::Population);
  int id = 0;
  std::size_t max_hc = 2;
  for (const auto& c : config_.crops)
    max_hc = std::max(max_hc, static_cast<std::size_t>(c.harvest_cycle));
  for (int t = 0; t < 3; ++t) {
    FarmerType type = static_cast<FarmerType>(t);
    for (int i = 0; i < split[static_cast<std::size_t>(t)]; ++i, ++id) {
      InitializedFarmer init = init_farmer(type, config_.farmers, rng);
      FarmerState f = std::move(init.state);
      f.id = id;
      f.account = ledger_.open_account("farmer_" + std::to_string(id), init.savings);
      f.expect.income_expectation.resize(config_.crops.size());
      f.expect.upper_limit.assign(config_.crops.size(), f.land);
      f.expect.last_alloc.assign(config_.crops.size(), 0.0);
      f.expect.first_harvest_step.assign(config_.crops.size(), -1);
      for (std::size_t c = 0; c < config_.crops.size(); ++c) {
        // initial income expectation: FRP for mill crops, market price otherwise
        f.expect.income_expectation[c] = config_.crops[c].channel == Channel::Mill
                                             ? config_.frp
                                             : config_.commodities[c].initial_price;
      }
      f.savings_history_cap = max_hc + 2;
      f.on_hand.assign(config_.commodities.size(), 0.0);
      farmers_.push_back(std::move(f));
    }
  }
}

void Simulation::open_fixed_accounts() {
  mill_account_ = ledger_.open_account("mill", config_.mill.present ? config_.mill.initial_savings : 0.0);
  market_account_ = ledger_.open_account("market", 0.0);
  storage_account_ = ledger_.open_account("storage_agent", 0.0);
  loan_agent_account_ = ledger_.open_account("loan_agent", 0.0);
  water_agent_account_ = ledger_.open_account("water_agent", 0.0);
  government_account_ = ledger_.open_account("government", 0.0);
  env_household_ = ledger_.open_account("env_household", 0.0);
  env_labor_ = ledger_.open_account("env_labor", 0.0);
  env_inputs_ = ledger_.open_account("env_inputs", 0.0);
  env_processing_ = ledger_.open_account("env_processing", 0.0);
  env_fuel_ = ledger_.open_account("env_fuel_program", 0.0);
  env_consumers_ = ledger_.open_account("env_consumers", 0.0);
  env_world_ = ledger_.open_account("env_world_trade", 0.0);
  env_land_ = ledger_.open_account("env_land_market", 0.0);
  env_exited_ = ledger_.open_account("env_exited_settlements", 0.0);
}

double Simulation::market_price(int commodity) const {
  const CommodityConfig& com = config_.commodities[static_cast<std::size_t>(commodity)];
  if (com.crop >= 0 && config_.crops[static_cast<std::size_t>(com.crop)].channel == Channel::Mill)
    return config_.frp;
  return books_[static_cast<std::size_t>(commodity)].price;
}

void Simulation::stock_add(int commodity, double delta, FlowKind kind) {
  books_[static_cast<std::size_t>(commodity)].stock += delta;
  if (options_.record_flows) current_flows_.deltas.push_back({commodity, delta, kind});
}

void Simulation::dump_goods(int commodity, double qty) {
  if (qty <= kQtyEps) return;
  current_flows_.dumped[static_cast<std::size_t>(commodity)] += qty;
}

// ---------------------------------------------------------------- inflation

void Simulation::phase_inflation() {
  inflation_.current_step = step_ + 1;
  const double f = 1.0 + inflation_.rate_per_step;
  for (auto& w : wages_) w *= f;
  for (auto& fm : storage_.spec_mut().fee_multiplier) fm *= f;
  for (auto& t : trade_) t.usual_price *= f;
  for (auto& farmer : farmers_) {
    if (farmer.exited) continue;
    farmer.per_person_charge *= f;
    farmer.safety_buffer *= f;
  }
}

// ------------------------------------------------------------------ pricing

void Simulation::phase_pricing() {
  for (std::size_t c = 0; c < books_.size(); ++c) {
    if (!config_.commodities[c].has_market) continue;
    MarketBook& book = books_[c];
    double next = config_.pricing_mode == PricingMode::Absolute
                      ? set_price_absolute(book, config_.commodities[c].crop_mult_factor)
                      : set_price_trend(book, config_.commodities[c].usual_demand);
    book.price = next;
    book.price_history.push_back(next);
  }
  storage_.reprice();
  frp_history_.push_back(config_.frp);
}

// -------------------------------------------------------------- consumption

void Simulation::phase_consumption() {
  // stored goods come back to the market first, when the owner likes the price
  auto& lots = storage_.lots();
  std::vector<StorageLot> kept;
  kept.reserve(lots.size());
  for (const StorageLot& lot : lots) {
    FarmerState& owner = farmers_[static_cast<std::size_t>(lot.owner)];
    if (owner.exited) continue;  // abandoned with its owner
    const MarketBook& book = books_[static_cast<std::size_t>(lot.commodity)];
    const auto& hist = book.price_history;
    bool release = false;
    double fee = storage_.fee(lot.commodity) * lot.quantity;
    Money savings = ledger_.balance(owner.account);
    if (fee > 0.10 * std::max(savings, 0.0) || fee > std::max(savings, 0.0)) {
      release = true;  // the fee budget no longer covers this lot
    } else if (hist.size() >= 6) {
      Rng rng = perception_rng(config_.seed, owner.id, step_, NoiseTag::ReleasePrice);
      double perceived = perceive(book.price, owner.info_noise_sigma, rng);
      double mean5 = 0.0;
      for (std::size_t i = hist.size() - 6; i < hist.size() - 1; ++i) mean5 += hist[i];
      mean5 /= 5.0;
      release = perceived >= mean5;
    }
    if (!release) {
      ledger_.transfer(owner.account, storage_account_, fee, TransferKind::StorageFee);
      kept.push_back(lot);
      continue;
    }
    const CommodityConfig& com = config_.commodities[static_cast<std::size_t>(lot.commodity)];
    bool mill_bound =
        com.crop >= 0 && config_.crops[static_cast<std::size_t>(com.crop)].channel == Channel::Mill;
    if (mill_bound) {
      owner.on_hand[static_cast<std::size_t>(lot.commodity)] += lot.quantity;
    } else {
      sell_to_market(owner, lot.commodity, lot.quantity, FlowKind::Withdrawal);
    }
  }
  lots = std::move(kept);

  // consumer purchases
  for (std::size_t c = 0; c < books_.size(); ++c) {
    const CommodityConfig& com = config_.commodities[c];
    if (!com.has_market) continue;
    MarketBook& book = books_[c];
    book.stock_history.push_back(book.stock);  // supply available this step
    const auto& hist = book.price_history;
    double price_prev = hist.size() >= 2 ? hist[hist.size() - 2] : book.price;
    double past4;
    if (book.sale_history.size() >= 4) {
      past4 = 0.0;
      for (std::size_t i = book.sale_history.size() - 4; i < book.sale_history.size(); ++i)
        past4 += book.sale_history[i];
    } else {
      past4 = 4.0 * com.usual_demand;  // neutral until history fills
    }
    double demand = consumer_demand(book.price, price_prev, past4, com.usual_demand,
                                    config_.demand_variation_limit);
    double sale = std::min(demand, book.stock);
    stock_add(static_cast<int>(c), -sale, FlowKind::ConsumerSale);
    ledger_.transfer(env_consumers_, market_account_, sale * book.price,
                     TransferKind::ConsumerPurchase);
    book.sale_history.push_back(sale);
  }
}

// -------------------------------------------------------------------- trade

void Simulation::phase_trade() {
  for (std::size_t c = 0; c < books_.size(); ++c) {
    if (!config_.commodities[c].has_market) {
      trade_history_[c].push_back({});
      continue;
    }
    MarketBook& book = books_[c];
    TradeStep ts = import_export_step(book.price, trade_[c]);
    ts.export_qty = std::min(ts.export_qty, book.stock);
    if (ts.import_qty > 0.0) {
      stock_add(static_cast<int>(c), ts.import_qty, FlowKind::Import);
      Money cost = ts.import_qty * trade_[c].import_price;
      ledger_.transfer(market_account_, env_world_, cost, TransferKind::ImportCost);
      ledger_.transfer(market_account_, government_account_, cost * trade_[c].import_tax,
                       TransferKind::TradeTax);
    }
    if (ts.export_qty > 0.0) {
      stock_add(static_cast<int>(c), -ts.export_qty, FlowKind::Export);
      Money revenue = ts.export_qty * trade_[c].export_price;
      ledger_.transfer(env_world_, market_account_, revenue, TransferKind::ExportRevenue);
      ledger_.transfer(market_account_, government_account_, revenue * trade_[c].export_tax,
                       TransferKind::TradeTax);
    }
    trade_history_[c].push_back(ts);
  }
}

void Simulation::phase_policy() {
  for (std::size_t c = 0; c < trade_.size(); ++c) {
    if (!config_.commodities[c].has_market) continue;
    policy_step(trade_history_[c], trade_[c], config_.policy_delta);
  }
}

// --------------------------------------------------------------------- mill

void Simulation::phase_mill() {
  step_sugar_output_ = 0.0;
  step_ethanol_output_ = 0.0;
  if (!mill_) {
    mill_offers_.clear();
    return;
  }
  MillState& mill = *mill_;
  const MillConfig& mc = config_.mill;
  auto available = [&]() {
    return std::max(ledger_.balance(mill.account) - mill.maintenance_reserve, 0.0);
  };

  // service mill loans first
  for (int id : mill_loans_) {
    LoanAccount& acc = loan_book_[static_cast<std::size_t>(id)];
    if (!acc.active) continue;
    Money due = std::min(acc.installment, acc.outstanding * (1.0 + acc.rate_per_step));
    bool can_pay = ledger_.balance(mill.account) >= due;
    PaymentOutcome out = record_payment(acc, can_pay);
    if (can_pay && out.amount_due > 0)
      ledger_.transfer(mill.account, loan_agent_account_, out.amount_due,
                       TransferKind::LoanInstallment);
    mill.credit_rating = std::max(mill.credit_rating + out.rating_delta, 0.0);
  }
  std::erase_if(mill_loans_, [&](int id) { return !loan_book_[static_cast<std::size_t>(id)].active; });

  // settle dues, oldest first
  while (!mill.dues.empty() && available() > 0.0) {
    Due& due = mill.dues.front();
    Money pay = std::min(due.owed, available());
    if (pay <= 0.0) break;
    AccountId dest = due.farmer >= 0 ? farmers_[static_cast<std::size_t>(due.farmer)].account
                                     : env_exited_;
    ledger_.transfer(mill.account, dest, pay, TransferKind::DueSettlement);
    if (due.farmer >= 0)
      attribute_revenue(farmers_[static_cast<std::size_t>(due.farmer)],
                        config_.mill.crop, pay);
    due.owed -= pay;
    if (due.owed <= kQtyEps) mill.dues.pop_front();
  }

  // How much cane the step needs. The mill tracks the sugar already in the
  // market and buys toward a carrying stock of stock_cover steps of demand,
  // which also absorbs harvest-cycle pulses in supply.
  const MarketBook& sugar_book = books_[static_cast<std::size_t>(mc.commodity)];
  double s_est = estimate_sugar_requirement(sugar_book.sale_history, mill.initial_sugar_demand);
  double s_req = std::max(mc.stock_cover * s_est - sugar_book.stock, 0.0);
  EthanolMode mode = decide_ethanol_mode(
      mill.costs.juice_to_ethanol / mill.yields.ethanol_from_juice, mc.ethanol_price);
  CaneSolve solve = required_sugarcane(mc.ethanol_requirement, s_req, mill.yields, mode);

  // borrow when the projected bill exceeds the cash on hand
  double unit_processing = process(1.0, solve.e, mill.yields, mill.costs).cost;
  Money projected = solve.sugarcane * (config_.frp + unit_processing);
  if (ledger_.balance(mill.account) - mill.maintenance_reserve < projected) {
    Money outstanding = 0.0;
    for (int id : mill_loans_)
      if (loan_book_[static_cast<std::size_t>(id)].active)
        outstanding += loan_book_[static_cast<std::size_t>(id)].outstanding;
    Money cap = mill.credit_rating * config_.loans.credit_unit;
    Money amount = std::max(cap - outstanding, 0.0);
    if (amount > 0.0) {
      LoanAccount acc;
      acc.borrower = -1;
      acc.kind = LoanKind::Credit;
      acc.principal = amount;
      acc.rate_per_step = config_.loan_rate_per_step(config_.loans.credit_rate_annual);
      acc.term = config_.loans.term_steps;
      acc.installment = compute_installment(amount, acc.rate_per_step, acc.term);
      acc.outstanding = amount;
      push_loan(acc);
      ledger_.transfer(loan_agent_account_, mill.account, amount,
                       TransferKind::LoanDisbursement);
    }
  }

  // acquire cane: biggest offers first, gated by the locality threshold
  std::vector<CaneOffer> offers;
  offers.reserve(mill_offers_.size());
  for (const auto& o : mill_offers_) offers.push_back({o.farmer, o.quantity});
  auto purchases = plan_purchases(offers, solve.sugarcane, mill.collection_threshold);

  double acquired = 0.0;
  for (const auto& p : purchases) {
    // processing is paid in cash, so it caps the quantity taken
    double affordable =
        unit_processing > 0.0 ? available() / unit_processing : p.quantity;
    double qty = std::min(p.quantity, affordable);
    if (qty <= kQtyEps) break;
    FarmerState& seller = farmers_[static_cast<std::size_t>(p.farmer)];
    ledger_.transfer(mill.account, env_processing_, qty * unit_processing,
                     TransferKind::ProcessingCost);
    Money bill = qty * config_.frp;
    Money pay = std::min(bill, available());
    if (pay > 0.0) {
      ledger_.transfer(mill.account, seller.account, pay, TransferKind::CanePayment);
      attribute_revenue(seller, mc.crop, pay);
    }
    if (bill - pay > kQtyEps)
      mill.dues.push_back({seller.id, qty, config_.frp, bill - pay, step_ + 1});
    acquired += qty;
    current_flows_.mill_purchased[static_cast<std::size_t>(mc.crop)] += qty;
  }

  // anything offered but not bought perishes
  double total_offered = 0.0;
  for (const auto& o : mill_offers_) total_offered += o.quantity;
  dump_goods(mc.crop, total_offered - acquired);
  mill_offers_.clear();

  if (acquired > 0.0) {
    ProcessResult pr = process(acquired, solve.e, mill.yields, mill.costs);
    step_sugar_output_ = pr.sugar;
    step_ethanol_output_ = pr.ethanol;
    stock_add(mc.commodity, pr.sugar, FlowKind::MillOutput);
    ledger_.transfer(market_account_, mill.account, pr.sugar * sugar_book.price,
                     TransferKind::ProduceSale);
    ledger_.transfer(env_fuel_, mill.account, pr.ethanol * mc.ethanol_price,
                     TransferKind::EthanolSale);
  }
}

// ------------------------------------------------------------------ farmers

Money Simulation::available_collateral(const FarmerState& f) const {
  Money pledged = 0.0;
  for (int id : farmer_loans_[static_cast<std::size_t>(f.id)]) {
    const LoanAccount& acc = loan_book_[static_cast<std::size_t>(id)];
    if (acc.active && acc.kind == LoanKind::Collateral) pledged += acc.collateral_value;
  }
  return std::max(f.land * config_.loans.land_value_per_ha - pledged, 0.0);
}

Money Simulation::credit_headroom(const FarmerState& f) const {
  Money outstanding = 0.0;
  for (int id : farmer_loans_[static_cast<std::size_t>(f.id)]) {
    const LoanAccount& acc = loan_book_[static_cast<std::size_t>(id)];
    if (acc.active && acc.kind == LoanKind::Credit) outstanding += acc.outstanding;
  }
  return std::max(f.credit_rating * config_.loans.credit_unit - outstanding, 0.0);
}

void Simulation::push_loan(const LoanAccount& acc) {
  int id = static_cast<int>(loan_book_.size());
  loan_book_.push_back(acc);
  if (acc.borrower >= 0)
    farmer_loans_[static_cast<std::size_t>(acc.borrower)].push_back(id);
  else
    mill_loans_.push_back(id);
}

void Simulation::rebuild_loan_index() {
  farmer_loans_.assign(farmers_.size(), {});
  mill_loans_.clear();
  for (std::size_t i = 0; i < loan_book_.size(); ++i) {
    const LoanAccount& acc = loan_book_[i];
    if (!acc.active) continue;
    if (acc.borrower >= 0)
      farmer_loans_[static_cast<std::size_t>(acc.borrower)].push_back(static_cast<int>(i));
    else
      mill_loans_.push_back(static_cast<int>(i));
  }
}

void Simulation::tally_water_commitments(std::vector<double>& by_lender, double& agent) const {
  by_lender.assign(farmers_.size(), 0.0);
  agent = 0.0;
  for (const auto& f : farmers_) {
    for (const auto& p : f.plantings) {
      if (p.water_source == WaterSource::Agent)
        agent += p.water_volume;
      else if (p.water_source == WaterSource::Lender && p.lender >= 0)
        by_lender[static_cast<std::size_t>(p.lender)] += p.water_volume;
    }
  }
}

Money Simulation::request_loans(FarmerState& f, Money amount) {
  if (amount <= 0.0) return 0.0;
  // same split as split_loan_request, with the caps reduced by standing debt
  LoanSplit split;
  split.credit_amount = std::min(amount, credit_headroom(f));
  split.collateral_amount = std::min(amount - split.credit_amount, available_collateral(f));
  Money disbursed = 0.0;
  if (split.credit_amount > 0.0) {
    LoanAccount acc;
    acc.borrower = f.id;
    acc.kind = LoanKind::Credit;
    acc.principal = split.credit_amount;
    acc.rate_per_step = config_.loan_rate_per_step(config_.loans.credit_rate_annual);
    acc.term = config_.loans.term_steps;
    acc.installment = compute_installment(acc.principal, acc.rate_per_step, acc.term);
    acc.outstanding = acc.principal;
    push_loan(acc);
    ledger_.transfer(loan_agent_account_, f.account, acc.principal,
                     TransferKind::LoanDisbursement);
    disbursed += acc.principal;
  }
  if (split.collateral_amount > 0.0) {
    LoanAccount acc;
    acc.borrower = f.id;
    acc.kind = LoanKind::Collateral;
    acc.principal = split.collateral_amount;
    acc.rate_per_step = config_.loan_rate_per_step(config_.loans.collateral_rate_annual);
    acc.term = config_.loans.term_steps;
    acc.installment = compute_installment(acc.principal, acc.rate_per_step, acc.term);
    acc.outstanding = acc.principal;
    acc.collateral_value = acc.principal;  // land title worth the principal is pledged
    push_loan(acc);
    ledger_.transfer(loan_agent_account_, f.account, acc.principal,
                     TransferKind::LoanDisbursement);
    disbursed += acc.principal;
  }
  return disbursed;
}

void Simulation::sell_to_market(FarmerState& f, int commodity, double qty, FlowKind kind) {
  if (qty <= kQtyEps) return;
  MarketBook& book = books_[static_cast<std::size_t>(commodity)];
  stock_add(commodity, qty, kind);
  Money proceeds = qty * book.price;
  ledger_.transfer(market_account_, f.account, proceeds, TransferKind::ProduceSale);
  const CommodityConfig& com = config_.commodities[static_cast<std::size_t>(commodity)];
  if (com.crop >= 0) attribute_revenue(f, com.crop, proceeds);
}

void Simulation::attribute_revenue(FarmerState& f, int crop, Money amount) {
  for (auto& w : f.open_harvests) {
    if (w.crop == crop) {
      w.revenue += amount;
      return;
    }
  }
}

void Simulation::handle_exit(FarmerState& f) {
  f.exited = true;
  f.exited_step = step_ + 1;  // frame numbering: the step being executed
  f.plantings.clear();
  for (std::size_t c = 0; c < f.on_hand.size(); ++c) {
    dump_goods(static_cast<int>(c), f.on_hand[c]);
    f.on_hand[c] = 0.0;
  }
  std::erase_if(mill_offers_, [&](const PendingOffer& o) { return o.farmer == f.id; });
  std::erase_if(storage_requests_, [&](const StorageRequest& r) { return r.owner == f.id; });
  auto& lots = storage_.lots();
  for (auto& lot : lots)
    if (lot.owner == f.id) dump_goods(lot.commodity, lot.quantity);
  std::erase_if(lots, [&](const StorageLot& lot) { return lot.owner == f.id; });
  for (int id : farmer_loans_[static_cast<std::size_t>(f.id)])
    loan_book_[static_cast<std::size_t>(id)].active = false;  // written off, no transfer
  farmer_loans_[static_cast<std::size_t>(f.id)].clear();
  if (mill_)
    for (auto& due : mill_->dues)
      if (due.farmer == f.id) due.farmer = -2;  // future settlements leave the system
  f.open_harvests.clear();
}

void Simulation::phase_farmers() {
  storage_requests_.clear();
  const double mps = static_cast<double>(config_.months_per_step);

  for (FarmerState& f : farmers_) {
    if (f.exited) continue;
    Money family_charge = f.per_person_charge * static_cast<double>(f.family_size) * mps;
    ledger_.transfer(f.account, env_household_, family_charge, TransferKind::FamilyExpense);

    // A farmer with standing crops borrows before the step's outflows would
    // push savings under the exit line; the request is the full remaining
    // expense of the crops, family subsistence included.
    Money step_bills = 0.0;
    for (const auto& p : f.plantings) {
      const CropSpec& crop = config_.crops[static_cast<std::size_t>(p.crop)];
      if (p.water_source == WaterSource::Agent)
        step_bills += p.water_volume * water_price_;
      step_bills += wages_[static_cast<std::size_t>(p.crop)] * crop.labor_requirement * p.land;
      step_bills += crop.fert_pest_cost * p.land;
    }
    Money exit_line = 4.0 * family_charge;
    bool has_produce = false;
    for (double q : f.on_hand) has_produce = has_produce || q > kQtyEps;
    if ((!f.plantings.empty() || has_produce) &&
        ledger_.balance(f.account) - family_charge - step_bills < exit_line) {
      Money expense = 0.0;
      for (const auto& p : f.plantings) {
        const CropSpec& crop = config_.crops[static_cast<std::size_t>(p.crop)];
        int remaining = crop.end_cycle - p.steps_grown;
        CostMode mode = f.type == FarmerType::Type1 && p.water_source == WaterSource::Agent
                            ? CostMode::WithWater
                            : CostMode::WithoutWater;
        expense += compute_total_expense(crop, p.land, remaining,
                                         wages_[static_cast<std::size_t>(p.crop)], water_price_,
                                         family_charge, true, mode);
      }
      // also cover the cash needed to stay solvent until the produce sells
      Money need = exit_line + family_charge + step_bills - ledger_.balance(f.account);
      request_loans(f, std::max(expense, need));
    }

    // per-planting upkeep, crop index order
    std::vector<int> finished;
    for (std::size_t c = 0; c < config_.crops.size(); ++c) {
      Planting* pp = nullptr;
      for (auto& p : f.plantings)
        if (p.crop == static_cast<int>(c)) pp = &p;
      if (!pp) continue;
      Planting& p = *pp;
      const CropSpec& crop = config_.crops[c];
      p.steps_grown += 1;

      if (p.water_source == WaterSource::Agent) {
        Money owed = p.water_volume * water_price_;
        Money pay = std::min(owed, std::max(ledger_.balance(f.account), 0.0));
        ledger_.transfer(f.account, water_agent_account_, pay, TransferKind::WaterFee);
        if (pay < owed)
          p.quality = apply_resource_shortfall(p.quality, crop.water_flexibility, pay, owed);
      }

      Money labor_owed = wages_[c] * crop.labor_requirement * p.land;
      Money labor_pay = std::min(labor_owed, std::max(ledger_.balance(f.account), 0.0));
      ledger_.transfer(f.account, env_labor_, labor_pay, TransferKind::LaborWage);
      if (labor_pay < labor_owed)
        p.quality = apply_resource_shortfall(p.quality, crop.labor_flexibility, labor_pay,
                                             labor_owed);

      Money fp_owed = crop.fert_pest_cost * p.land;
      bool fp_paid = ledger_.balance(f.account) >= fp_owed;
      if (fp_paid && fp_owed > 0.0)
        ledger_.transfer(f.account, env_inputs_, fp_owed, TransferKind::FertPest);
      apply_pesticide_step(p, crop, fp_paid);

      if (p.quality <= 0.0) {
        finished.push_back(p.crop);  // dead; the land frees up for replanting
        continue;
      }

      if (p.steps_grown % crop.harvest_cycle == 0) {
        double qty = harvest_quantity(p, crop);
        current_flows_.harvested[c] += qty;
        double to_lender = qty * p.lender_share;
        if (to_lender > 0.0 && p.lender >= 0) {
          FarmerState& lender = farmers_[static_cast<std::size_t>(p.lender)];
          if (!lender.exited)
            lender.on_hand[c] += to_lender;
          else
            dump_goods(static_cast<int>(c), to_lender);
        }
        double kept = qty - to_lender;
        f.on_hand[c] += kept;
        if (f.expect.first_harvest_step[c] < 0) f.expect.first_harvest_step[c] = step_ + 1;
        f.open_harvests.push_back({static_cast<int>(c), step_ + 1, kept, 0.0});
      }
      if (p.steps_grown >= crop.end_cycle) finished.push_back(p.crop);
    }
    for (int crop : finished)
      std::erase_if(f.plantings, [&](const Planting& p) { return p.crop == crop; });

    // sell or store whatever is on hand
    for (std::size_t c = 0; c < f.on_hand.size(); ++c) {
      double qty = f.on_hand[c];
      if (qty <= kQtyEps) continue;
      const CommodityConfig& com = config_.commodities[c];
      bool mill_bound =
          com.crop >= 0 &&
          config_.crops[static_cast<std::size_t>(com.crop)].channel == Channel::Mill;
      if (mill_bound) {
        // the mill pays a flat FRP, so the store-vs-sell rule compares FRP
        // against its own recent history
        double store_qty =
            storage_decision(qty, ledger_.balance(f.account), config_.frp,
                             std::span<const double>(frp_history_.data(),
                                                     frp_history_.size() > 0
                                                         ? frp_history_.size() - 1
                                                         : 0),
                             storage_.fee(static_cast<int>(c)));
        if (store_qty > kQtyEps)
          storage_requests_.push_back({f.id, f.type, static_cast<int>(c), store_qty});
        double offer = qty - store_qty;
        if (mill_) {
          if (offer > kQtyEps) mill_offers_.push_back({f.id, offer});
        } else {
          dump_goods(static_cast<int>(c), offer);
        }
        f.on_hand[c] = 0.0;
        continue;
      }
      const MarketBook& book = books_[c];
      Rng rng = perception_rng(config_.seed, f.id, step_, NoiseTag::SalePrice);
      double perceived = perceive(book.price, f.info_noise_sigma, rng);
      std::span<const double> hist(book.price_history.data(),
                                   book.price_history.empty() ? 0 : book.price_history.size() - 1);
      double store_qty = storage_decision(qty, ledger_.balance(f.account), perceived, hist,
                                          storage_.fee(static_cast<int>(c)));
      if (store_qty > kQtyEps)
        storage_requests_.push_back({f.id, f.type, static_cast<int>(c), store_qty});
      sell_to_market(f, static_cast<int>(c), qty - store_qty, FlowKind::FarmerDelivery);
      f.on_hand[c] = 0.0;
    }

    // loan servicing: collateral accounts first, then credit
    auto& my_loans = farmer_loans_[static_cast<std::size_t>(f.id)];
    for (int pass = 0; pass < 2; ++pass) {
      LoanKind kind = pass == 0 ? LoanKind::Collateral : LoanKind::Credit;
      for (int acc_id : my_loans) {
        LoanAccount& acc = loan_book_[static_cast<std::size_t>(acc_id)];
        if (!acc.active || acc.kind != kind) continue;
        Money due = std::min(acc.installment, acc.outstanding * (1.0 + acc.rate_per_step));
        bool can_pay = ledger_.balance(f.account) >= due;
        PaymentOutcome out = record_payment(acc, can_pay);
        if (can_pay && out.amount_due > 0.0)
          ledger_.transfer(f.account, loan_agent_account_, out.amount_due,
                           TransferKind::LoanInstallment);
        f.credit_rating = std::max(f.credit_rating + out.rating_delta, 0.0);
        if (out.seized) {
          ledger_.transfer(env_land_, loan_agent_account_, acc.collateral_value,
                           TransferKind::SeizureProceeds);
          if (out.seizure_excess > 0.0)
            ledger_.transfer(loan_agent_account_, f.account, out.seizure_excess,
                             TransferKind::SeizureRefund);
          double lost_land = config_.loans.land_value_per_ha > 0.0
                                 ? acc.collateral_value / config_.loans.land_value_per_ha
                                 : 0.0;
          double new_land = std::max(f.land - lost_land, 0.0);
          double used = f.land - f.land_free();
          if (used > new_land && used > 0.0) {
            double scale = new_land / used;
            for (auto& p : f.plantings) {
              p.land *= scale;
              p.water_volume *= scale;
            }
          }
          f.land = new_land;
          for (auto& ul : f.expect.upper_limit) ul = std::min(ul, f.land);
        }
      }
    }

    // Close loans early only when the cash covers the payoff and still
    // leaves the remaining crop expenses plus the subsistence line intact.
    Money remaining_expense = 0.0;
    for (const auto& p : f.plantings) {
      const CropSpec& crop = config_.crops[static_cast<std::size_t>(p.crop)];
      CostMode mode = f.type == FarmerType::Type1 && p.water_source == WaterSource::Agent
                          ? CostMode::WithWater
                          : CostMode::WithoutWater;
      remaining_expense += compute_total_expense(
          crop, p.land, crop.end_cycle - p.steps_grown,
          wages_[static_cast<std::size_t>(p.crop)], water_price_, family_charge, true, mode);
    }
    Money reserve = f.safety_buffer + remaining_expense + exit_line;
    for (int pass = 0; pass < 2; ++pass) {
      LoanKind kind = pass == 0 ? LoanKind::Collateral : LoanKind::Credit;
      for (int acc_id : my_loans) {
        LoanAccount& acc = loan_book_[static_cast<std::size_t>(acc_id)];
        if (!acc.active || acc.kind != kind) continue;
        if (acc.outstanding > 0.0 &&
            should_early_close(acc, ledger_.balance(f.account), reserve)) {
          ledger_.transfer(f.account, loan_agent_account_, acc.outstanding,
                           TransferKind::LoanInstallment);
          acc.outstanding = 0.0;
          acc.active = false;
        }
      }
    }

    std::erase_if(my_loans,
                  [&](int id) { return !loan_book_[static_cast<std::size_t>(id)].active; });

    // income expectation updates when a harvest's revenue window closes
    std::vector<HarvestRecord> still_open;
    for (auto& w : f.open_harvests) {
      if (step_ + 1 - w.harvested_at >= 2) {
        auto ci = static_cast<std::size_t>(w.crop);
        f.expect.income_expectation[ci] =
            update_income_expectation(f.expect.income_expectation[ci], w.revenue, w.quantity);
      } else {
        still_open.push_back(w);
      }
    }
    f.open_harvests = std::move(still_open);

    if (check_exit(ledger_.balance(f.account), f.per_person_charge, f.family_size,
                   config_.months_per_step))
      handle_exit(f);
  }

  // storage admissions for the step; rejects sell immediately
  auto rejected = storage_.admit_and_age(storage_requests_);
  std::vector<double> request_totals(config_.commodities.size(), 0.0);
  for (std::size_t i = 0; i < storage_requests_.size(); ++i) {
    const StorageRequest& r = storage_requests_[i];
    request_totals[static_cast<std::size_t>(r.commodity)] += r.quantity;
    FarmerState& owner = farmers_[static_cast<std::size_t>(r.owner)];
    double admitted = r.quantity - rejected[i];
    if (admitted > 0.0) {
      current_flows_.stored[static_cast<std::size_t>(r.commodity)] += admitted;
      Money fee = storage_.fee(r.commodity) * admitted;
      Money pay = std::min(fee, std::max(ledger_.balance(owner.account), 0.0));
      ledger_.transfer(owner.account, storage_account_, pay, TransferKind::StorageFee);
    }
    if (rejected[i] > kQtyEps) {
      const CommodityConfig& com = config_.commodities[static_cast<std::size_t>(r.commodity)];
      bool mill_bound =
          com.crop >= 0 &&
          config_.crops[static_cast<std::size_t>(com.crop)].channel == Channel::Mill;
      if (mill_bound && mill_) {
        mill_offers_.push_back({r.owner, rejected[i]});
      } else if (com.has_market) {
        sell_to_market(owner, r.commodity, rejected[i], FlowKind::StorageReject);
      } else {
        dump_goods(r.commodity, rejected[i]);
      }
    }
  }
  storage_.record_request_totals(request_totals);
}

// --------------------------------------------------------------- plantings

FarmerPlan Simulation::plan_for(const FarmerState& f) {
  FarmerPlan plan;
  plan.farmer = f.id;
  plan.per_crop.assign(config_.crops.size(), {});
  const double mps = static_cast<double>(config_.months_per_step);
  Money savings = ledger_.balance(f.account);
  Money loan_estimate = credit_headroom(f) + available_collateral(f);
  Money ppc_fs_step = f.per_person_charge * static_cast<double>(f.family_size) * mps;
  CostMode mode = f.type == FarmerType::Type1 ? CostMode::WithWater : CostMode::WithoutWater;

  double wp = water_price_;
  if (f.type == FarmerType::Type1 && f.info_noise_sigma > 0.0) {
    Rng rng = perception_rng(config_.seed, f.id, step_, NoiseTag::WaterPrice);
    wp = perceive(water_price_, f.info_noise_sigma, rng);
  }

  FarmerState& mut = farmers_[static_cast<std::size_t>(f.id)];
  double free_land = f.land_free();
  std::vector<double> profits(config_.crops.size(), 0.0);
  for (std::size_t c = 0; c < config_.crops.size(); ++c) {
    const CropSpec& crop = config_.crops[c];
    if (f.planting_of(static_cast<int>(c)) != nullptr) {
      profits[c] = 0.0;
      continue;  // one standing planting per crop
    }
    // refresh the upper limit from the recent savings trend
    if (f.expect.first_harvest_step[c] >= 0 &&
        step_ + 1 - f.expect.first_harvest_step[c] >= crop.harvest_cycle &&
        f.savings_history.size() >= static_cast<std::size_t>(crop.harvest_cycle)) {
      std::span<const double> window(
          f.savings_history.data() + f.savings_history.size() -
              static_cast<std::size_t>(crop.harvest_cycle),
          static_cast<std::size_t>(crop.harvest_cycle));
      mut.expect.upper_limit[c] =
          update_upper_limit(window, f.expect.last_alloc[c], f.land, f.expect.upper_limit[c]);
    }
    double ul = std::min(mut.expect.upper_limit[c], free_land);
    double la = allocate_land(savings, loan_estimate, f.safety_buffer, ppc_fs_step, crop,
                              wages_[c], wp, ul, mode, config_.per_cycle_costs);
    CropPlan& cp = plan.per_crop[c];
    cp.land = la;
    cp.profit = estimate_profit(crop, la, f.expect.income_expectation[c], wages_[c], wp, mode);
    cp.water_need = la * crop.water_requirement;
    cp.est_produce = la * crop.produce;
    profits[c] = cp.profit;
  }
  plan.ranking = rank_crops(profits);
  for (int c : plan.ranking) {
    const CropPlan& cp = plan.per_crop[static_cast<std::size_t>(c)];
    if (cp.land > kLandEps && cp.profit > 0.0) {
      plan.best_crop = c;
      break;
    }
  }
  return plan;
}

std::vector<FarmerPlan> Simulation::compute_plans(const std::vector<int>& farmer_ids,
                                                  bool parallel) {
  std::vector<FarmerPlan> plans(farmer_ids.size());
#ifdef _OPENMP
  if (parallel && options_.planning_threads > 1) {
    // Each plan touches only its own farmer's state and keyed RNG draws, so
    // the result is identical to the serial loop.
#pragma omp parallel for schedule(dynamic, 16) num_threads(options_.planning_threads)
    for (long k = 0; k < static_cast<long>(farmer_ids.size()); ++k)
      plans[static_cast<std::size_t>(k)] =
          plan_for(farmers_[static_cast<std::size_t>(farmer_ids[static_cast<std::size_t>(k)])]);
    return plans;
  }
#else
  (void)parallel;
#endif
  for (std::size_t k = 0; k < farmer_ids.size(); ++k)
    plans[k] = plan_for(farmers_[static_cast<std::size_t>(farmer_ids[k])]);
  return plans;
}

void Simulation::plant(FarmerState& f, int crop, double land, WaterSource source, double volume,
                       int lender, double share) {
  const CropSpec& spec = config_.crops[static_cast<std::size_t>(crop)];
  land = std::min(land, f.land_free());
  if (land <= kLandEps) return;

  // borrow when the full remaining expense outruns the usable cash
  const double mps = static_cast<double>(config_.months_per_step);
  Money family_charge = f.per_person_charge * static_cast<double>(f.family_size) * mps;
  CostMode mode = source == WaterSource::Agent ? CostMode::WithWater : CostMode::WithoutWater;
  Money expense = compute_total_expense(spec, land, spec.end_cycle,
                                        wages_[static_cast<std::size_t>(crop)], water_price_,
                                        family_charge, false, mode);
  Money usable = std::max(ledger_.balance(f.account) - f.safety_buffer, 0.0);
  if (usable < expense) request_loans(f, expense - usable);

  Money planting_cost = spec.initial_cost * land;
  Money cash = std::max(ledger_.balance(f.account), 0.0);
  if (planting_cost > cash) {
    if (spec.initial_cost <= 0.0) return;
    double scale = cash / planting_cost;
    land *= scale;
    volume *= scale;
    planting_cost = spec.initial_cost * land;
    if (land <= kLandEps) return;
  }
  if (planting_cost > 0.0)
    ledger_.transfer(f.account, env_inputs_, planting_cost, TransferKind::PlantingCost);

  Planting p;
  p.crop = crop;
  p.land = land;
  p.planted_at = step_;
  p.water_source = source;
  p.lender = lender;
  p.lender_share = share;
  p.water_volume = volume;
  f.plantings.push_back(p);
  f.expect.last_alloc[static_cast<std::size_t>(crop)] = land;
}

void Simulation::phase_planting_and_water() {
  std::vector<int> planners;
  for (const auto& f : farmers_)
    if (!f.exited && f.land_free() >= config_.farmers.min_land) planners.push_back(f.id);

  auto plans = compute_plans(planners, options_.planning_threads > 1);

  // lender-facing market info: perfect information prices
  std::vector<CropMarketInfo> crop_infos;
  for (std::size_t c = 0; c < config_.crops.size(); ++c)
    crop_infos.push_back({static_cast<int>(c), market_price(static_cast<int>(c)),
                          config_.crops[c].produce, config_.crops[c].minimum_produce});
  std::vector<double> committed_produce(config_.crops.size(), 0.0);

  auto note_commitment = [&](int crop, double est) {
    committed_produce[static_cast<std::size_t>(crop)] += est;
  };

  // self-sufficient farmers plant right away; Type1 applications queue up
  std::vector<WaterRequest> applications;
  std::vector<const FarmerPlan*> plan_of(farmers_.size(), nullptr);
  for (const auto& plan : plans) plan_of[static_cast<std::size_t>(plan.farmer)] = &plan;

  for (const auto& plan : plans) {
    FarmerState& f = farmers_[static_cast<std::size_t>(plan.farmer)];
    if (plan.best_crop < 0) continue;
    const CropSpec& best = config_.crops[static_cast<std::size_t>(plan.best_crop)];
    const CropPlan& cp = plan.per_crop[static_cast<std::size_t>(plan.best_crop)];
    if (f.type != FarmerType::Type1 || best.rain_fed()) {
      plant(f, plan.best_crop, cp.land, WaterSource::None, 0.0, -1, 0.0);
      note_commitment(plan.best_crop, cp.est_produce);
      continue;
    }
    WaterRequest req;
    req.farmer = f.id;
    for (std::size_t c = 0; c < plan.per_crop.size(); ++c) {
      const CropPlan& candidate = plan.per_crop[c];
      if (config_.crops[c].rain_fed() || candidate.land <= kLandEps) continue;
      req.crops.push_back(static_cast<int>(c));
      req.requirement.push_back(candidate.water_need);
      req.est_produce.push_back(candidate.est_produce);
      req.land_willing.push_back(candidate.land);
    }
    if (!req.crops.empty()) applications.push_back(std::move(req));
  }

  auto plant_fallback = [&](FarmerState& f) {
    const FarmerPlan* plan = plan_of[static_cast<std::size_t>(f.id)];
    if (!plan) return;
    for (int c : plan->ranking) {
      const CropSpec& crop = config_.crops[static_cast<std::size_t>(c)];
      const CropPlan& cp = plan->per_crop[static_cast<std::size_t>(c)];
      if (!crop.rain_fed() || cp.land <= kLandEps || cp.profit <= 0.0) continue;
      plant(f, c, cp.land, WaterSource::None, 0.0, -1, 0.0);
      note_commitment(c, cp.est_produce);
      return;
    }
  };

  // the water agent serves first when present
  std::vector<char> served(farmers_.size(), 0);
  std::vector<double> lender_committed;
  double agent_committed = 0.0;
  tally_water_commitments(lender_committed, agent_committed);
  if (config_.water.agent_present) {
    double capacity = config_.water.agent_capacity - agent_committed;
    std::vector<ScalarWaterRequest> scalar;
    for (const auto& req : applications) {
      const FarmerPlan* plan = plan_of[static_cast<std::size_t>(req.farmer)];
      // ask for the preferred water-needing crop's requirement
      double volume = 0.0;
      for (int c : plan->ranking) {
        const CropPlan& cp = plan->per_crop[static_cast<std::size_t>(c)];
        if (!config_.crops[static_cast<std::size_t>(c)].rain_fed() && cp.land > kLandEps) {
          volume = cp.water_need;
          break;
        }
      }
      if (volume > 0.0) scalar.push_back({req.farmer, volume});
    }
    auto grants = water_agent_allocate(std::max(capacity, 0.0), scalar, water_price_);
    for (const auto& grant : grants) {
      FarmerState& f = farmers_[static_cast<std::size_t>(grant.farmer)];
      const FarmerPlan* plan = plan_of[static_cast<std::size_t>(grant.farmer)];
      // rescale allocations by the water actually received and re-rank
      std::vector<double> lands(config_.crops.size(), 0.0);
      std::vector<double> reqs(config_.crops.size(), 0.0);
      for (std::size_t c = 0; c < config_.crops.size(); ++c) {
        lands[c] = plan->per_crop[c].land;
        reqs[c] = plan->per_crop[c].water_need;
      }
      std::vector<double> scaled(config_.crops.size(), 0.0);
      for (std::size_t c = 0; c < config_.crops.size(); ++c) {
        if (config_.crops[c].rain_fed()) {
          scaled[c] = lands[c];
        } else if (reqs[c] > 0.0) {
          scaled[c] = lands[c] * std::min(grant.volume, reqs[c]) / reqs[c];
        }
      }
      std::vector<double> profits(config_.crops.size(), 0.0);
      for (std::size_t c = 0; c < config_.crops.size(); ++c) {
        CostMode mode = config_.crops[c].rain_fed() ? CostMode::WithoutWater : CostMode::WithWater;
        profits[c] = f.planting_of(static_cast<int>(c))
                         ? 0.0
                         : estimate_profit(config_.crops[c], scaled[c],
                                           f.expect.income_expectation[c], wages_[c],
                                           water_price_, mode);
      }
      auto order = rank_crops(profits);
      for (int c : order) {
        if (scaled[static_cast<std::size_t>(c)] <= kLandEps ||
            profits[static_cast<std::size_t>(c)] <= 0.0)
          break;
        if (f.planting_of(c)) continue;
        const CropSpec& crop = config_.crops[static_cast<std::size_t>(c)];
        double land = scaled[static_cast<std::size_t>(c)];
        double volume = crop.rain_fed() ? 0.0 : land * crop.water_requirement;
        plant(f, c, land, crop.rain_fed() ? WaterSource::None : WaterSource::Agent, volume, -1,
              0.0);
        note_commitment(c, land * crop.produce);
        break;
      }
      served[static_cast<std::size_t>(grant.farmer)] = 1;
    }
  }

  // Type3 lenders run the crop-dictating allocation over whoever is left
  for (int round = 0; round < static_cast<int>(farmers_.size()); ++round) {
    tally_water_commitments(lender_committed, agent_committed);
    std::vector<LenderPool> pools;
    for (const auto& f : farmers_) {
      if (f.type != FarmerType::Type3 || f.exited) continue;
      double avail = f.water_endowment - lender_committed[static_cast<std::size_t>(f.id)];
      if (avail > 0.0) pools.push_back({f.id, avail});
    }
    if (pools.empty()) break;
    std::vector<WaterRequest> pending;
    for (const auto& req : applications)
      if (!served[static_cast<std::size_t>(req.farmer)]) pending.push_back(req);
    if (pending.empty()) break;
    auto round_result = reallocate_round(pools, pending, crop_infos, committed_produce);
    bool progress = false;
    for (const auto& lender_allocs : round_result) {
      for (const auto& alloc : lender_allocs.allocations) {
        FarmerState& f = farmers_[static_cast<std::size_t>(alloc.farmer)];
        const WaterRequest* req = nullptr;
        for (const auto& r : applications)
          if (r.farmer == alloc.farmer) req = &r;
        std::size_t k = 0;
        for (; k < req->crops.size(); ++k)
          if (req->crops[k] == alloc.crop) break;
        double requirement = req->requirement[k];
        double share = requirement > 0.0 ? config_.water.lender_share * alloc.volume / requirement
                                         : config_.water.lender_share;
        std::vector<double> own_alloc(config_.crops.size(), 0.0);
        const FarmerPlan* plan = plan_of[static_cast<std::size_t>(alloc.farmer)];
        for (std::size_t c = 0; c < config_.crops.size(); ++c)
          own_alloc[c] = plan->per_crop[c].land;
        double offered_land =
            requirement > 0.0 ? req->land_willing[k] * std::min(alloc.volume, requirement) /
                                    requirement
                              : req->land_willing[k];
        auto decision = evaluate_lender_offer(
            config_.crops, own_alloc, f.expect.income_expectation, wages_, alloc.crop,
            offered_land, share);
        if (decision.accept) {
          plant(f, alloc.crop, offered_land, WaterSource::Lender, alloc.volume,
                lender_allocs.lender, share);
          note_commitment(alloc.crop, offered_land *
                                          config_.crops[static_cast<std::size_t>(alloc.crop)]
                                              .produce);
        } else {
          plant_fallback(f);
        }
        served[static_cast<std::size_t>(alloc.farmer)] = 1;
        progress = true;
      }
    }
    if (!progress) break;
  }

  // whoever remains tries a rain-fed crop on their own
  for (const auto& req : applications)
    if (!served[static_cast<std::size_t>(req.farmer)])
      plant_fallback(farmers_[static_cast<std::size_t>(req.farmer)]);
}

// ------------------------------------------------------------------ metrics

void Simulation::record_metrics() {
  MetricsFrame frame;
  frame.step = step_;
  std::array<std::vector<double>, 3> savings_by_type;
  std::array<double, 3> sums{};
  std::array<int, 3> counts{};
  for (const auto& f : farmers_) {
    int t = type_index(f.type);
    double s = ledger_.balance(f.account);
    savings_by_type[static_cast<std::size_t>(t)].push_back(s);
    sums[static_cast<std::size_t>(t)] += s;
    counts[static_cast<std::size_t>(t)] += 1;
    if (f.exited) frame.exited[static_cast<std::size_t>(t)] += 1;
  }
  for (int t = 0; t < 3; ++t) {
    frame.mean_savings[static_cast<std::size_t>(t)] =
        counts[static_cast<std::size_t>(t)] > 0
            ? sums[static_cast<std::size_t>(t)] / counts[static_cast<std::size_t>(t)]
            : 0.0;
    frame.median_savings[static_cast<std::size_t>(t)] =
        median_of(savings_by_type[static_cast<std::size_t>(t)]);
  }
  frame.price.resize(books_.size());
  frame.sales.resize(books_.size());
  frame.stock.resize(books_.size());
  for (std::size_t c = 0; c < books_.size(); ++c) {
    frame.price[c] = config_.commodities[c].has_market ? books_[c].price : 0.0;
    frame.sales[c] = books_[c].sale_history.empty() ? 0.0 : books_[c].sale_history.back();
    frame.stock[c] = books_[c].stock;
  }
  frame.mill_dues = mill_ ? mill_->dues_total() : 0.0;
  frame.sugar_output = step_sugar_output_;
  frame.ethanol_output = step_ethanol_output_;
  metrics_.push_back(std::move(frame));

  for (auto& f : farmers_) {
    if (f.exited) continue;
    f.savings_history.push_back(ledger_.balance(f.account));
    if (f.savings_history.size() > f.savings_history_cap)
      f.savings_history.erase(f.savings_history.begin());
  }
}

void Simulation::step() {
  ledger_.set_step(step_ + 1);
  if (options_.record_flows) {
    current_flows_ = StepFlows{};
    current_flows_.harvested.assign(config_.commodities.size(), 0.0);
    current_flows_.dumped.assign(config_.commodities.size(), 0.0);
    current_flows_.stored.assign(config_.commodities.size(), 0.0);
    current_flows_.mill_purchased.assign(config_.commodities.size(), 0.0);
  }
  phase_inflation();
  phase_pricing();
  phase_consumption();
  phase_trade();
  phase_policy();
  phase_mill();
  phase_farmers();
  phase_planting_and_water();
  ++step_;
  record_metrics();
  if (options_.record_flows) flows_.push_back(current_flows_);
}

const std::vector<MetricsFrame>& Simulation::run() {
  while (step_ < config_.steps) step();
  return metrics_;
}

void Simulation::check_invariants() const {
  auto fail = [&](const std::string& what) {
    throw std::logic_error("invariant violated at step " + std::to_string(step_) + ": " + what);
  };
  for (const auto& f : farmers_) {
    double used = 0.0;
    for (const auto& p : f.plantings) {
      if (p.quality < 0.0 || p.quality > 1.0) fail("quality out of [0,1]");
      if (p.land < 0.0) fail("negative planted land");
      used += p.land;
    }
    if (used > f.land + 1e-9) fail("allocated land exceeds holding");
    for (double ul : f.expect.upper_limit)
      if (ul < 0.0 || ul > f.land + 1e-9) fail("upper limit out of [0, land]");
  }
  for (std::size_t c = 0; c < config_.commodities.size(); ++c) {
    if (storage_.occupied(static_cast<int>(c)) > config_.storage.capacity[c] + 1e-9)
      fail("storage occupancy exceeds capacity");
    if (config_.commodities[c].has_market && books_[c].stock < -1e-9)
      fail("negative market stock");
  }
  if (metrics_.size() >= 2) {
    const auto& prev = metrics_[metrics_.size() - 2];
    const auto& cur = metrics_.back();
    for (int t = 0; t < 3; ++t)
      if (cur.exited[static_cast<std::size_t>(t)] < prev.exited[static_cast<std::size_t>(t)])
        fail("exited count decreased");
  }
}

std::vector<MetricsFrame> run_simulation(const ScenarioConfig& config, RunOptions options) {
  Simulation sim(config, options);
  return sim.run();
}

}  // namespace canesim
