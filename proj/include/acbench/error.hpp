#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace acbench {

// Thrown whenever an operation's preconditions are violated by its inputs
// (length or dimension mismatch, out-of-range parameter, ...).
class RejectedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exhaustive audit would need more evaluations than the configured budget.
class BudgetExceeded : public RejectedInput {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t required,
                 std::uint64_t budget)
      : RejectedInput(what + ": requires " + std::to_string(required) +
                      " evaluations, budget is " + std::to_string(budget)),
        required_(required),
        budget_(budget) {}

  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

// Invalid experiment / protocol configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ACBENCH_ENFORCE(cond, msg)            \
  do {                                        \
    if (!(cond)) throw ::acbench::RejectedInput(msg); \
  } while (0)

// Default exhaustive-audit budget: 2^26 evaluations.
inline constexpr std::uint64_t kDefaultAuditBudget = std::uint64_t{1} << 26;

}  // namespace acbench
