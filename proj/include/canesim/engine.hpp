#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canesim/credit.hpp"
#include "canesim/farmer.hpp"
#include "canesim/ledger.hpp"
#include "canesim/market.hpp"
#include "canesim/mill.hpp"
#include "canesim/scenario.hpp"
#include "canesim/water.hpp"

namespace canesim {

struct MetricsFrame {
  int step = 0;
  std::array<double, 3> mean_savings{};    // by farmer type
  std::array<double, 3> median_savings{};
  std::array<int, 3> exited{};             // cumulative
  std::vector<double> price;               // by commodity
  std::vector<double> sales;
  std::vector<double> stock;
  Money mill_dues = 0.0;
  double sugar_output = 0.0;
  double ethanol_output = 0.0;
};

struct RunOptions {
  bool record_journal = false;  // required for ledger audits
  bool record_flows = false;    // per-step goods movements, for invariant tests
  int planning_threads = 1;     // farmer planning kernel; results identical at any count
};

// One signed stock mutation; replaying them in order reproduces the stock
// value bitwise.
enum class FlowKind : std::uint8_t {
  Withdrawal,
  ConsumerSale,
  Import,
  Export,
  FarmerDelivery,
  MillOutput,
  StorageReject,
};

struct StockDelta {
  int commodity;
  double delta;
  FlowKind kind;
};

struct StepFlows {
  std::vector<StockDelta> deltas;             // market stock mutations, in order
  std::vector<double> harvested;              // by commodity
  std::vector<double> dumped;                 // by commodity (waste, never cash)
  std::vector<double> stored;                 // admitted to storage
  std::vector<double> mill_purchased;         // cane bought
};

// Per-farmer planting intentions computed by the planning kernel.
struct CropPlan {
  double land = 0.0;
  double profit = 0.0;
  double water_need = 0.0;
  double est_produce = 0.0;
};

struct FarmerPlan {
  int farmer = -1;
  std::vector<CropPlan> per_crop;  // by crop index; land 0 where not plantable
  std::vector<int> ranking;        // crop indices, most profitable first
  int best_crop = -1;              // top-ranked crop with positive profit, or -1
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig config, RunOptions options = {});

  void step();
  const std::vector<MetricsFrame>& run();  // advances to config.steps

  int current_step() const { return step_; }
  const ScenarioConfig& config() const { return config_; }
  const std::vector<FarmerState>& farmers() const { return farmers_; }
  const std::vector<MarketBook>& books() const { return books_; }
  const StorageLedger& storage() const { return storage_; }
  const std::optional<MillState>& mill() const { return mill_; }
  const std::vector<LoanAccount>& loans() const { return loan_book_; }
  const Ledger& ledger() const { return ledger_; }
  Ledger& ledger_mut() { return ledger_; }
  const std::vector<MetricsFrame>& metrics() const { return metrics_; }
  const std::vector<StepFlows>& flows() const { return flows_; }
  Money farmer_savings(const FarmerState& f) const { return ledger_.balance(f.account); }

  // Planning kernel, exposed for the serial/parallel equivalence test and
  // the benchmark. Mutates only per-farmer upper limits.
  std::vector<FarmerPlan> compute_plans(const std::vector<int>& farmer_ids, bool parallel);

  // Versioned full-state snapshot; a restored run continues bit-identically.
  nlohmann::json checkpoint() const;
  static Simulation restore(const nlohmann::json& snapshot, RunOptions options = {});

  // Invariants checked by the fuzz suite; throws std::logic_error on violation.
  void check_invariants() const;

 private:
  struct PendingOffer {
    int farmer;
    double quantity;
  };

  void init_population();
  void open_fixed_accounts();
  void record_metrics();

  void phase_inflation();
  void phase_pricing();
  void phase_consumption();
  void phase_trade();
  void phase_policy();
  void phase_mill();
  void phase_farmers();
  void phase_planting_and_water();

  FarmerPlan plan_for(const FarmerState& f);
  void plant(FarmerState& f, int crop, double land, WaterSource source, double volume,
             int lender, double share);
  Money request_loans(FarmerState& f, Money amount);
  Money available_collateral(const FarmerState& f) const;
  Money credit_headroom(const FarmerState& f) const;
  void push_loan(const LoanAccount& acc);
  void rebuild_loan_index();
  // one pass over all plantings: water committed per lender, plus the agent's
  void tally_water_commitments(std::vector<double>& by_lender, double& agent) const;
  void sell_to_market(FarmerState& f, int commodity, double qty, FlowKind kind);
  void attribute_revenue(FarmerState& f, int crop, Money amount);
  void handle_exit(FarmerState& f);
  void stock_add(int commodity, double delta, FlowKind kind);
  void dump_goods(int commodity, double qty);
  double market_price(int commodity) const;

  ScenarioConfig config_;
  RunOptions options_;
  Ledger ledger_;
  std::vector<FarmerState> farmers_;
  std::vector<MarketBook> books_;     // by commodity; unused entries for mill goods
  std::vector<TradeParams> trade_;    // by commodity
  std::vector<std::vector<TradeStep>> trade_history_;
  StorageLedger storage_;
  std::optional<MillState> mill_;
  std::vector<LoanAccount> loan_book_;
  std::vector<std::vector<int>> farmer_loans_;  // active account ids per farmer
  std::vector<int> mill_loans_;
  std::vector<double> wages_;         // inflated copy
  InflationClock inflation_;
  std::vector<double> frp_history_;
  double water_price_ = 0.0;
  std::vector<PendingOffer> mill_offers_;
  std::vector<StorageRequest> storage_requests_;
  std::vector<MetricsFrame> metrics_;
  std::vector<StepFlows> flows_;
  StepFlows current_flows_;

  AccountId mill_account_;
  AccountId market_account_;
  AccountId storage_account_;
  AccountId loan_agent_account_;
  AccountId water_agent_account_;
  AccountId government_account_;
  AccountId env_household_;
  AccountId env_labor_;
  AccountId env_inputs_;
  AccountId env_processing_;
  AccountId env_fuel_;
  AccountId env_consumers_;
  AccountId env_world_;
  AccountId env_land_;
  AccountId env_exited_;

  int step_ = 0;
  double step_sugar_output_ = 0.0;
  double step_ethanol_output_ = 0.0;
};

// floor(0.7n) Type1, floor(0.2n) Type2, remainder Type3, ids in that order.
std::array<int, 3> population_split(int size, double f1, double f2);

std::vector<MetricsFrame> run_simulation(const ScenarioConfig& config, RunOptions options = {});

}  // namespace canesim
