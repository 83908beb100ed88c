#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canesim/domain.hpp"

namespace canesim {

struct AccountId {
  std::int32_t v = -1;
  bool valid() const { return v >= 0; }
};

enum class TransferKind : std::uint8_t {
  FamilyExpense,
  LaborWage,
  WaterFee,
  FertPest,
  PlantingCost,
  LoanDisbursement,
  LoanInstallment,
  SeizureProceeds,
  SeizureRefund,
  ProduceSale,
  CanePayment,
  DueSettlement,
  StorageFee,
  ConsumerPurchase,
  ImportCost,
  ExportRevenue,
  TradeTax,
  EthanolSale,
  ProcessingCost,
};

struct Transfer {
  std::int32_t from;
  std::int32_t to;
  Money amount;
  std::int32_t step;
  TransferKind kind;
};

// Double-entry cash book. It is the single owner of every account balance:
// agents hold AccountIds and all cash moves through transfer(). The audit
// replays the journal from the initial balances and demands bitwise equality
// with the live balances, so any mutation that bypassed transfer() is caught.
class Ledger {
 public:
  AccountId open_account(std::string name, Money initial);

  // amount must be finite and >= 0; from != to
  void transfer(AccountId from, AccountId to, Money amount, TransferKind kind);

  Money balance(AccountId a) const { return balance_[static_cast<std::size_t>(a.v)]; }
  Money initial_balance(AccountId a) const { return initial_[static_cast<std::size_t>(a.v)]; }
  const std::string& account_name(AccountId a) const { return names_[static_cast<std::size_t>(a.v)]; }
  std::size_t account_count() const { return balance_.size(); }

  void set_step(int step) { step_ = step; }

  // Journal recording can be disabled for large runs; balances are kept
  // either way and metrics never read the journal.
  void set_recording(bool on) { recording_ = on; }
  bool recording() const { return recording_; }
  const std::vector<Transfer>& journal() const { return journal_; }

  struct AuditReport {
    bool ok = true;
    Money audited_total = 0.0;  // sum over transfers of (credit - debit); 0 by construction
    std::vector<std::string> violations;
  };

  // Replays journal entries appended since the previous audit call and
  // compares every account's replayed balance with its live balance.
  AuditReport audit();

  // Checkpoint support: overwrite balances and journal wholesale. Account
  // names and order must already match (they come from the same scenario).
  void restore_state(std::vector<Money> balances, std::vector<Money> initial,
                     std::vector<Transfer> journal);

 private:
  std::vector<Money> balance_;
  std::vector<Money> initial_;
  std::vector<std::string> names_;
  std::vector<Transfer> journal_;
  std::vector<Money> replay_;
  std::size_t replay_cursor_ = 0;
  bool recording_ = true;
  int step_ = 0;
};

}  // namespace canesim
