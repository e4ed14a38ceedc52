#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onlinefwer/core.hpp"

namespace onlinefwer {

/// Per-index parameter sequence (1-based), e.g. lambda_i or Pi_i.
class ParamSequence {
 public:
  ParamSequence() = default;

  static ParamSequence constant(double value);
  static ParamSequence from_values(std::vector<double> values);  // last value carried forward
  static ParamSequence from_function(std::function<double(std::uint64_t)> fn);

  bool empty() const noexcept { return kind_ == Kind::Empty; }
  bool is_constant() const noexcept { return kind_ == Kind::Constant; }
  double constant_value() const;

  double at(std::uint64_t i) const;

 private:
  enum class Kind { Empty, Constant, Values, Function };
  Kind kind_ = Kind::Empty;
  double value_ = 0.0;
  std::vector<double> values_;
  std::function<double(std::uint64_t)> fn_;
};

/// Non-negative spending sequence gamma with total mass at most 1.
class SpendingSequence {
 public:
  /// gamma_j = 6 (pi j)^{-2}; sums to exactly 1.
  static SpendingSequence inverse_square();
  /// gamma_j = Pi (1 - Pi)^{j-1}; sums to exactly 1.
  static SpendingSequence geometric(double pi);
  /// Explicit values; zero beyond the end. Requires non-negative entries
  /// summing to at most 1.
  static SpendingSequence from_values(std::vector<double> values);

  double at(std::uint64_t i) const;
  double partial_sum(std::uint64_t k) const;
  /// Total mass: exactly 1 for the built-in rules, the element sum otherwise.
  double total() const;
  bool non_increasing() const;

 private:
  enum class Kind { InverseSquare, Geometric, Values };
  Kind kind_ = Kind::InverseSquare;
  double pi_ = 0.0;
  std::vector<double> values_;
};

/// Redistribution weights g_{j,i} (i > j); rows sum to at most 1. Realized
/// as a lag rule g_{j,i} = gamma_{i-j}.
class GraphWeights {
 public:
  GraphWeights() : lag_(SpendingSequence::inverse_square()) {}

  static GraphWeights lagged(SpendingSequence gamma);

  double at(std::uint64_t j, std::uint64_t i) const;
  const SpendingSequence& lag_sequence() const noexcept { return lag_; }

 private:
  SpendingSequence lag_;
};

/// Non-increasing continuous spending function f on [1, inf) together with
/// its tail integral and the scaling s = (1 - lambda) f(1) + integral.
struct SpendingFunction {
  std::function<double(double)> f;
  double f1 = 0.0;
  double integral_tail = 0.0;
  double lambda = 0.5;
  double scaling = 1.0;
};

/// Linear interpolation of a non-increasing spending sequence with total
/// mass 1; the scaling simplifies to s = 1 + gamma_1 (1/2 - lambda).
SpendingFunction make_interpolation_function(const SpendingSequence& gamma, double lambda);

/// f(x) = coef * x^{-exponent}, exponent > 1.
SpendingFunction make_power_function(double coef, double exponent, double lambda);

/// Wraps an arbitrary f with a caller-supplied tail integral; f is
/// spot-checked for monotonicity on a grid.
SpendingFunction make_spending_function(std::function<double(double)> f, double integral_tail, double lambda);

enum class ProcedureKind {
  AlphaSpending,
  AdaptiveSpending,
  OnlineFallback,
  Geometric,
  ContinuousGraph,
  ContinuousSpending,
};

std::string_view to_string(ProcedureKind kind) noexcept;
std::optional<ProcedureKind> procedure_kind_from_string(std::string_view id) noexcept;

/// Full description of one online procedure.
struct ProcedureConfig {
  ProcedureKind kind = ProcedureKind::AlphaSpending;
  double alpha = 0.05;
  ParamSequence lambda = ParamSequence::constant(0.5);
  bool closed = false;  // valid for ContinuousGraph and ContinuousSpending only

  SpendingSequence gamma = SpendingSequence::inverse_square();
  GraphWeights graph = GraphWeights::lagged(SpendingSequence::inverse_square());
  ParamSequence pi;                          // Geometric only; no default
  std::optional<SpendingFunction> spending;  // ContinuousSpending only

  void validate() const;

  static ProcedureConfig alpha_spending(double alpha, SpendingSequence gamma = SpendingSequence::inverse_square());
  static ProcedureConfig adaptive_spending(double alpha, ParamSequence lambda,
                                           SpendingSequence gamma = SpendingSequence::inverse_square());
  static ProcedureConfig online_fallback(double alpha, SpendingSequence gamma = SpendingSequence::inverse_square());
  static ProcedureConfig geometric(double alpha, ParamSequence pi, ParamSequence lambda);
  static ProcedureConfig continuous_graph(double alpha, ParamSequence lambda,
                                          SpendingSequence gamma = SpendingSequence::inverse_square(),
                                          bool closed = false);
  static ProcedureConfig continuous_spending(double alpha, SpendingFunction spending, bool closed = false);
};

/// Builds a protocol session running the configured procedure.
Session make_session(const ProcedureConfig& config);

/// Recomputes the level of every step from a recorded (weight, rejected)
/// history with a fresh rule; used to check predictability.
std::vector<double> replay_levels(const ProcedureConfig& config, std::span<const StepRecord> history);

/// Maximum over K of the partial sums  sum_{i<=K} level_i * weight_i / (1 - lambda_i).
/// The caller compares the result against its budget alpha.
double audit_budget(std::span<const double> levels, std::span<const double> weights,
                    std::span<const double> lambdas);

}  // namespace onlinefwer
