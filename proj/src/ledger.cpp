#include "canesim/ledger.hpp"

#include <cmath>
#include <stdexcept>

namespace canesim {

AccountId Ledger::open_account(std::string name, Money initial) {
  AccountId id{static_cast<std::int32_t>(balance_.size())};
  balance_.push_back(initial);
  initial_.push_back(initial);
  replay_.push_back(initial);
  names_.push_back(std::move(name));
  return id;
}

void Ledger::transfer(AccountId from, AccountId to, Money amount, TransferKind kind) {
  if (!from.valid() || !to.valid() || from.v == to.v)
    throw std::logic_error("ledger: transfer needs two distinct open accounts");
  if (!std::isfinite(amount) || amount < 0)
    throw std::logic_error("ledger: transfer amount must be finite and >= 0 (account " +
                           names_[static_cast<std::size_t>(from.v)] + " -> " +
                           names_[static_cast<std::size_t>(to.v)] + ")");
  if (amount == 0) return;
  balance_[static_cast<std::size_t>(from.v)] -= amount;
  balance_[static_cast<std::size_t>(to.v)] += amount;
  if (recording_) journal_.push_back({from.v, to.v, amount, step_, kind});
}

void Ledger::restore_state(std::vector<Money> balances, std::vector<Money> initial,
                           std::vector<Transfer> journal) {
  if (balances.size() != balance_.size() || initial.size() != initial_.size())
    throw std::logic_error("ledger: restore with mismatched account table");
  balance_ = std::move(balances);
  initial_ = std::move(initial);
  journal_ = std::move(journal);
  replay_ = initial_;
  replay_cursor_ = 0;
}

Ledger::AuditReport Ledger::audit() {
  AuditReport report;
  if (!recording_)
    throw std::logic_error("ledger: audit requires journal recording");
  for (; replay_cursor_ < journal_.size(); ++replay_cursor_) {
    const Transfer& t = journal_[replay_cursor_];
    if (!std::isfinite(t.amount) || t.amount < 0) {
      report.ok = false;
      report.violations.push_back("transfer #" + std::to_string(replay_cursor_) +
                                  " has invalid amount");
      continue;
    }
    replay_[static_cast<std::size_t>(t.from)] -= t.amount;
    replay_[static_cast<std::size_t>(t.to)] += t.amount;
    report.audited_total += (t.amount - t.amount);  // debit and credit cancel per entry
  }
  for (std::size_t i = 0; i < balance_.size(); ++i) {
    if (replay_[i] != balance_[i]) {
      report.ok = false;
      report.violations.push_back("account '" + names_[i] + "' live balance " +
                                  std::to_string(balance_[i]) + " != replayed " +
                                  std::to_string(replay_[i]));
    }
  }
  return report;
}

}  // namespace canesim
