#include "canesim/credit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace canesim {

namespace {
constexpr int kSeizureDefaults = 4;   // seized when defaults exceed this
constexpr Money kCloseEpsilon = 1e-9; // residue below this closes the account
}  // namespace

LoanSplit split_loan_request(Money expense, double credit_rating, Money credit_unit,
                             Money collateral_available) {
  if (expense < 0) throw std::invalid_argument("split_loan_request: expense must be >= 0");
  LoanSplit split;
  Money credit_cap = std::max(credit_rating, 0.0) * credit_unit;
  split.credit_amount = std::min(expense, credit_cap);
  split.collateral_amount = std::min(expense - split.credit_amount,
                                     std::max(collateral_available, 0.0));
  return split;
}

Money compute_installment(Money principal, double rate_per_step, int term) {
  if (term < 1) throw std::invalid_argument("compute_installment: term must be >= 1");
  if (principal <= 0) return 0.0;
  if (rate_per_step == 0.0) return principal / static_cast<double>(term);
  double r = rate_per_step;
  return principal * r / (1.0 - std::pow(1.0 + r, -term));
}

PaymentOutcome record_payment(LoanAccount& account, bool paid) {
  PaymentOutcome out;
  if (!account.active) throw std::logic_error("record_payment: account is closed");
  account.outstanding *= 1.0 + account.rate_per_step;
  out.amount_due = std::min(account.installment, account.outstanding);
  if (paid) {
    account.outstanding -= out.amount_due;
    if (account.kind == LoanKind::Credit) out.rating_delta = 2.0;
    if (account.outstanding <= kCloseEpsilon) {
      account.outstanding = 0.0;
      account.active = false;
      out.closed = true;
    }
    return out;
  }
  account.defaults += 1;
  if (account.kind == LoanKind::Collateral && account.defaults > kSeizureDefaults) {
    // the account is being wound up; the debt settles against the collateral
    out.seized = true;
    out.seizure_excess = std::max(account.collateral_value - account.outstanding, 0.0);
    account.outstanding = 0.0;
    account.active = false;
    out.closed = true;
    out.amount_due = 0.0;
    return out;
  }
  out.penalty = 0.2 * out.amount_due;
  account.outstanding += out.penalty;
  if (account.kind == LoanKind::Credit) out.rating_delta = -8.0;
  out.amount_due = 0.0;
  return out;
}

bool should_early_close(const LoanAccount& account, Money savings, Money reserve_needed) {
  if (!account.active || account.outstanding <= 0.0) return true;
  return savings - account.outstanding >= reserve_needed;
}

}  // namespace canesim
