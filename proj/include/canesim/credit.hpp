#pragma once

#include <vector>

#include "canesim/domain.hpp"

namespace canesim {

enum class LoanKind { Credit, Collateral };

struct LoanAccount {
  int borrower = -1;  // farmer index, or -1 for the mill
  LoanKind kind = LoanKind::Credit;
  Money principal = 0.0;
  double rate_per_step = 0.0;
  int term = 1;
  Money installment = 0.0;
  Money outstanding = 0.0;
  Money collateral_value = 0.0;  // pledged at issue; Collateral kind only
  int defaults = 0;
  bool active = true;
};

struct LoanSplit {
  Money credit_amount = 0.0;
  Money collateral_amount = 0.0;
};

// Credit first up to rating * credit_unit, remainder against collateral.
LoanSplit split_loan_request(Money expense, double credit_rating, Money credit_unit,
                             Money collateral_available);

// Standard amortization P*r / (1 - (1+r)^-n); P/n at zero rate.
Money compute_installment(Money principal, double rate_per_step, int term);

struct PaymentOutcome {
  Money amount_due = 0.0;      // what an on-time payment costs this step
  Money penalty = 0.0;         // added to outstanding on default
  double rating_delta = 0.0;   // credit-kind loans move the borrower's rating
  bool seized = false;
  Money seizure_excess = 0.0;  // collateral value beyond the debt, refunded
  bool closed = false;
};

// Advances one repayment step: accrues interest, then either pays the
// installment or records a default. Collateral loans are seized after more
// than 4 defaults.
PaymentOutcome record_payment(LoanAccount& account, bool paid);

// Close early iff paying off the balance still leaves the reserve intact.
bool should_early_close(const LoanAccount& account, Money savings, Money reserve_needed);

}  // namespace canesim
