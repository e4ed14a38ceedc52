#include "onlinefwer/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace onlinefwer {

namespace {

void check_unit_interval(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw std::domain_error(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamSequence

ParamSequence ParamSequence::constant(double value) {
  ParamSequence seq;
  seq.kind_ = Kind::Constant;
  seq.value_ = value;
  return seq;
}

ParamSequence ParamSequence::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ParamSequence: empty value list");
  ParamSequence seq;
  seq.kind_ = Kind::Values;
  seq.values_ = std::move(values);
  return seq;
}

ParamSequence ParamSequence::from_function(std::function<double(std::uint64_t)> fn) {
  if (!fn) throw std::invalid_argument("ParamSequence: empty function");
  ParamSequence seq;
  seq.kind_ = Kind::Function;
  seq.fn_ = std::move(fn);
  return seq;
}

double ParamSequence::constant_value() const {
  if (kind_ != Kind::Constant) throw std::logic_error("ParamSequence: not a constant sequence");
  return value_;
}

double ParamSequence::at(std::uint64_t i) const {
  if (i < 1) throw std::invalid_argument("ParamSequence: index is 1-based");
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Values:
      return i <= values_.size() ? values_[i - 1] : values_.back();
    case Kind::Function:
      return fn_(i);
    case Kind::Empty:
      break;
  }
  throw std::logic_error("ParamSequence: sequence is empty");
}

// ---------------------------------------------------------------------------
// SpendingSequence

SpendingSequence SpendingSequence::inverse_square() { return SpendingSequence{}; }

SpendingSequence SpendingSequence::geometric(double pi) {
  check_unit_interval(pi, "SpendingSequence: pi");
  SpendingSequence seq;
  seq.kind_ = Kind::Geometric;
  seq.pi_ = pi;
  return seq;
}

SpendingSequence SpendingSequence::from_values(std::vector<double> values) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("SpendingSequence: negative entry");
    sum += v;
  }
  if (sum > 1.0 + 1e-12) throw std::invalid_argument("SpendingSequence: entries must sum to at most 1");
  SpendingSequence seq;
  seq.kind_ = Kind::Values;
  seq.values_ = std::move(values);
  return seq;
}

double SpendingSequence::at(std::uint64_t i) const {
  if (i < 1) throw std::invalid_argument("SpendingSequence: index is 1-based");
  switch (kind_) {
    case Kind::InverseSquare: {
      const double x = std::numbers::pi * static_cast<double>(i);
      return 6.0 / (x * x);
    }
    case Kind::Geometric:
      return pi_ * std::pow(1.0 - pi_, static_cast<double>(i - 1));
    case Kind::Values:
      return i <= values_.size() ? values_[i - 1] : 0.0;
  }
  return 0.0;
}

double SpendingSequence::partial_sum(std::uint64_t k) const {
  double sum = 0.0;
  const std::uint64_t stop = kind_ == Kind::Values ? std::min<std::uint64_t>(k, values_.size()) : k;
  for (std::uint64_t i = 1; i <= stop; ++i) sum += at(i);
  return sum;
}

double SpendingSequence::total() const {
  if (kind_ == Kind::Values) {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum;
  }
  return 1.0;
}

bool SpendingSequence::non_increasing() const {
  if (kind_ != Kind::Values) return true;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] > values_[i - 1]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// GraphWeights

GraphWeights GraphWeights::lagged(SpendingSequence gamma) {
  GraphWeights g;
  g.lag_ = std::move(gamma);
  return g;
}

double GraphWeights::at(std::uint64_t j, std::uint64_t i) const {
  if (i <= j) throw std::invalid_argument("GraphWeights: requires i > j");
  return lag_.at(i - j);
}

// ---------------------------------------------------------------------------
// Spending functions

SpendingFunction make_interpolation_function(const SpendingSequence& gamma, double lambda) {
  check_unit_interval(lambda, "SpendingFunction: lambda");
  if (!gamma.non_increasing()) {
    throw std::invalid_argument("make_interpolation_function: gamma must be non-increasing");
  }
  if (std::fabs(gamma.total() - 1.0) > 1e-9) {
    throw std::invalid_argument("make_interpolation_function: gamma must sum to 1");
  }
  SpendingFunction fn;
  const double gamma1 = gamma.at(1);
  fn.f = [gamma](double x) {
    const double fl = std::floor(x);
    const auto k = static_cast<std::uint64_t>(fl);
    const double lo = gamma.at(k);
    const double frac = x - fl;
    if (frac == 0.0) return lo;
    return lo + frac * (gamma.at(k + 1) - lo);
  };
  fn.f1 = gamma1;
  fn.integral_tail = 1.0 - gamma1 / 2.0;
  fn.lambda = lambda;
  fn.scaling = 1.0 + gamma1 * (0.5 - lambda);
  return fn;
}

SpendingFunction make_power_function(double coef, double exponent, double lambda) {
  check_unit_interval(lambda, "SpendingFunction: lambda");
  if (!(coef > 0.0)) throw std::invalid_argument("make_power_function: coef must be positive");
  if (!(exponent > 1.0)) throw std::invalid_argument("make_power_function: exponent must exceed 1");
  SpendingFunction fn;
  fn.f = [coef, exponent](double x) { return coef * std::pow(x, -exponent); };
  fn.f1 = coef;
  fn.integral_tail = coef / (exponent - 1.0);
  fn.lambda = lambda;
  fn.scaling = (1.0 - lambda) * fn.f1 + fn.integral_tail;
  return fn;
}

SpendingFunction make_spending_function(std::function<double(double)> f, double integral_tail, double lambda) {
  check_unit_interval(lambda, "SpendingFunction: lambda");
  if (!f) throw std::invalid_argument("make_spending_function: empty function");
  if (!(integral_tail >= 0.0) || !std::isfinite(integral_tail)) {
    throw std::invalid_argument("make_spending_function: tail integral must be finite and non-negative");
  }
  // Monotonicity spot check on a coarse grid.
  double prev = f(1.0);
  if (!(prev >= 0.0)) throw std::invalid_argument("make_spending_function: f must be non-negative");
  for (double x = 1.25; x <= 64.0; x += 0.25) {
    const double cur = f(x);
    if (cur > prev * (1.0 + 1e-12) + 1e-300) {
      throw std::invalid_argument("make_spending_function: f must be non-increasing");
    }
    prev = cur;
  }
  SpendingFunction fn;
  fn.f1 = f(1.0);
  fn.f = std::move(f);
  fn.integral_tail = integral_tail;
  fn.lambda = lambda;
  fn.scaling = (1.0 - lambda) * fn.f1 + integral_tail;
  if (!(fn.scaling > 0.0)) throw std::invalid_argument("make_spending_function: scaling must be positive");
  return fn;
}

// ---------------------------------------------------------------------------
// ProcedureKind

std::string_view to_string(ProcedureKind kind) noexcept {
  switch (kind) {
    case ProcedureKind::AlphaSpending:
      return "alpha-spending";
    case ProcedureKind::AdaptiveSpending:
      return "adaptive-spending";
    case ProcedureKind::OnlineFallback:
      return "online-fallback";
    case ProcedureKind::Geometric:
      return "geometric";
    case ProcedureKind::ContinuousGraph:
      return "continuous-graph";
    case ProcedureKind::ContinuousSpending:
      return "continuous-spending";
  }
  return "unknown";
}

std::optional<ProcedureKind> procedure_kind_from_string(std::string_view id) noexcept {
  for (ProcedureKind kind : {ProcedureKind::AlphaSpending, ProcedureKind::AdaptiveSpending,
                             ProcedureKind::OnlineFallback, ProcedureKind::Geometric,
                             ProcedureKind::ContinuousGraph, ProcedureKind::ContinuousSpending}) {
    if (to_string(kind) == id) return kind;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ProcedureConfig

void ProcedureConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ProcedureConfig: alpha must lie in (0, 1)");
  const bool continuous = kind == ProcedureKind::ContinuousGraph || kind == ProcedureKind::ContinuousSpending;
  if (closed && !continuous) {
    throw std::invalid_argument(
        "ProcedureConfig: closed variants exist for continuous-graph and continuous-spending only "
        "(the closure of alpha-spending is the online-fallback procedure)");
  }
  switch (kind) {
    case ProcedureKind::AlphaSpending:
    case ProcedureKind::OnlineFallback:
      break;
    case ProcedureKind::AdaptiveSpending:
    case ProcedureKind::ContinuousGraph:
      if (lambda.empty()) throw std::invalid_argument("ProcedureConfig: lambda sequence required");
      check_unit_interval(lambda.at(1), "ProcedureConfig: lambda");
      break;
    case ProcedureKind::Geometric:
      if (pi.empty()) throw std::invalid_argument("ProcedureConfig: geometric requires a Pi sequence");
      if (lambda.empty()) throw std::invalid_argument("ProcedureConfig: lambda sequence required");
      check_unit_interval(pi.at(1), "ProcedureConfig: pi");
      check_unit_interval(lambda.at(1), "ProcedureConfig: lambda");
      break;
    case ProcedureKind::ContinuousSpending: {
      if (!spending) throw std::invalid_argument("ProcedureConfig: continuous-spending requires a spending function");
      if (!lambda.is_constant()) {
        throw std::invalid_argument("ProcedureConfig: continuous-spending requires a single shared lambda");
      }
      if (lambda.constant_value() != spending->lambda) {
        throw std::invalid_argument("ProcedureConfig: lambda does not match the spending function scaling");
      }
      break;
    }
  }
  if (kind != ProcedureKind::ContinuousSpending && !(gamma.total() <= 1.0 + 1e-12)) {
    throw std::invalid_argument("ProcedureConfig: gamma must sum to at most 1");
  }
}

ProcedureConfig ProcedureConfig::alpha_spending(double alpha, SpendingSequence gamma) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::AlphaSpending;
  cfg.alpha = alpha;
  cfg.gamma = std::move(gamma);
  cfg.validate();
  return cfg;
}

ProcedureConfig ProcedureConfig::adaptive_spending(double alpha, ParamSequence lambda, SpendingSequence gamma) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::AdaptiveSpending;
  cfg.alpha = alpha;
  cfg.lambda = std::move(lambda);
  cfg.gamma = std::move(gamma);
  cfg.validate();
  return cfg;
}

ProcedureConfig ProcedureConfig::online_fallback(double alpha, SpendingSequence gamma) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::OnlineFallback;
  cfg.alpha = alpha;
  cfg.graph = GraphWeights::lagged(gamma);
  cfg.gamma = std::move(gamma);
  cfg.validate();
  return cfg;
}

ProcedureConfig ProcedureConfig::geometric(double alpha, ParamSequence pi, ParamSequence lambda) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::Geometric;
  cfg.alpha = alpha;
  cfg.pi = std::move(pi);
  cfg.lambda = std::move(lambda);
  cfg.validate();
  return cfg;
}

ProcedureConfig ProcedureConfig::continuous_graph(double alpha, ParamSequence lambda, SpendingSequence gamma,
                                                  bool closed) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::ContinuousGraph;
  cfg.alpha = alpha;
  cfg.lambda = std::move(lambda);
  cfg.closed = closed;
  cfg.graph = GraphWeights::lagged(gamma);
  cfg.gamma = std::move(gamma);
  cfg.validate();
  return cfg;
}

ProcedureConfig ProcedureConfig::continuous_spending(double alpha, SpendingFunction spending, bool closed) {
  ProcedureConfig cfg;
  cfg.kind = ProcedureKind::ContinuousSpending;
  cfg.alpha = alpha;
  cfg.lambda = ParamSequence::constant(spending.lambda);
  cfg.closed = closed;
  cfg.spending = std::move(spending);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Level rules

namespace {

double checked_lambda(const ParamSequence& seq, std::uint64_t i) {
  const double v = seq.at(i);
  check_unit_interval(v, "lambda_i");
  return v;
}

// alpha_i = alpha * gamma_i
class AlphaSpendingRule final : public LevelRule {
 public:
  explicit AlphaSpendingRule(const ProcedureConfig& cfg) : alpha_(cfg.alpha), gamma_(cfg.gamma) {}

  double level(const StreamState& state) const override { return alpha_ * gamma_.at(state.current_step()); }
  void absorb(const StepRecord&) override {}

 private:
  double alpha_;
  SpendingSequence gamma_;
};

// alpha_i = alpha (1 - lambda_i) gamma_{t(i)},  t(i) = 1 + #{j < i : p_j > lambda_j}.
// The effective weight stored per step is the non-candidate indicator.
class AdaptiveSpendingRule final : public LevelRule {
 public:
  explicit AdaptiveSpendingRule(const ProcedureConfig& cfg)
      : alpha_(cfg.alpha), lambda_(cfg.lambda), gamma_(cfg.gamma) {}

  double level(const StreamState& state) const override {
    const std::uint64_t i = state.current_step();
    return alpha_ * (1.0 - checked_lambda(lambda_, i)) * gamma_.at(t_);
  }

  double effective_weight(std::uint64_t step, const PValueRecord& record) const override {
    return record.p <= checked_lambda(lambda_, step) ? 0.0 : 1.0;
  }

  void absorb(const StepRecord& record) override {
    if (record.weight >= 0.5) ++t_;
  }

 private:
  double alpha_;
  ParamSequence lambda_;
  SpendingSequence gamma_;
  std::uint64_t t_ = 1;
};

// Adaptive graph:
//   alpha_i = (1 - lambda_i) { alpha gamma_i + sum_{j<i} g_{j,i} u_j alpha_j / (1 - lambda_j) }
// with u_j = 1 - xi_j open, u_j = max{1 - xi_j, R_j} closed. The fallback
// specialization fixes xi_j = 1 and lambda_j = 0, leaving u_j = R_j.
//
// Each completed step stores coef_j = u_j alpha_j / (1 - lambda_j); a step
// costs one pass over the stored coefficients.
class GraphRule final : public LevelRule {
 public:
  GraphRule(const ProcedureConfig& cfg, bool fallback)
      : alpha_(cfg.alpha),
        closed_(cfg.closed),
        fallback_(fallback),
        gamma_(cfg.gamma),
        lag_(cfg.graph.lag_sequence()),
        lambda_(cfg.lambda) {}

  double level(const StreamState& state) const override {
    const std::uint64_t i = state.current_step();
    while (lag_cache_.size() + 1 < i) lag_cache_.push_back(lag_.at(lag_cache_.size() + 1));
    double inflow = 0.0;
    for (std::size_t j = 0; j + 1 < i; ++j) {
      inflow += lag_cache_[i - 2 - j] * coef_[j];  // g_{j+1,i} = lag(i - (j+1))
    }
    return (1.0 - lambda_at(i)) * (alpha_ * gamma_.at(i) + inflow);
  }

  void absorb(const StepRecord& record) override {
    const std::uint64_t j = coef_.size() + 1;
    double u;
    if (fallback_) {
      u = record.rejected ? 1.0 : 0.0;
    } else {
      u = 1.0 - record.weight;
      if (closed_ && record.rejected) u = 1.0;
    }
    coef_.push_back(u * record.level / (1.0 - lambda_at(j)));
  }

 private:
  double lambda_at(std::uint64_t i) const { return fallback_ ? 0.0 : checked_lambda(lambda_, i); }

  double alpha_;
  bool closed_;
  bool fallback_;
  SpendingSequence gamma_;
  SpendingSequence lag_;
  ParamSequence lambda_;
  std::vector<double> coef_;
  mutable std::vector<double> lag_cache_;
};

// alpha_i = Pi_i (1 - lambda_i) (alpha - sum_{j<i} alpha_j xi_j / (1 - lambda_j)).
// The remaining budget is tracked multiplicatively via the identity
// B_{i+1} = B_i (1 - Pi_i xi_i), which is algebraically the same but keeps
// late levels from collapsing to rounding noise.
class GeometricRule final : public LevelRule {
 public:
  explicit GeometricRule(const ProcedureConfig& cfg)
      : budget_(cfg.alpha), pi_(cfg.pi), lambda_(cfg.lambda) {}

  double level(const StreamState& state) const override {
    const std::uint64_t i = state.current_step();
    const double pi = pi_.at(i);
    check_unit_interval(pi, "Pi_i");
    return pi * (1.0 - checked_lambda(lambda_, i)) * budget_;
  }

  void absorb(const StepRecord& record) override {
    const std::uint64_t j = ++steps_;
    const double pi = pi_.at(j);
    check_unit_interval(pi, "Pi_i");
    budget_ *= (1.0 - pi * record.weight);
  }

 private:
  double budget_;
  ParamSequence pi_;
  ParamSequence lambda_;
  std::uint64_t steps_ = 0;
};

// alpha_i = alpha (1 - lambda) / s * f(1 + A),  A = sum of past xi_j
// (closed: the xi of rejected steps are left out of A).
class SpendingRule final : public LevelRule {
 public:
  explicit SpendingRule(const ProcedureConfig& cfg)
      : alpha_(cfg.alpha), closed_(cfg.closed), fn_(*cfg.spending) {}

  double level(const StreamState&) const override {
    return alpha_ * (1.0 - fn_.lambda) / fn_.scaling * fn_.f(1.0 + consumed_);
  }

  void absorb(const StepRecord& record) override {
    if (!(closed_ && record.rejected)) consumed_ += record.weight;
  }

 private:
  double alpha_;
  bool closed_;
  SpendingFunction fn_;
  double consumed_ = 0.0;
};

std::unique_ptr<LevelRule> make_rule(const ProcedureConfig& config) {
  config.validate();
  switch (config.kind) {
    case ProcedureKind::AlphaSpending:
      return std::make_unique<AlphaSpendingRule>(config);
    case ProcedureKind::AdaptiveSpending:
      return std::make_unique<AdaptiveSpendingRule>(config);
    case ProcedureKind::OnlineFallback:
      return std::make_unique<GraphRule>(config, /*fallback=*/true);
    case ProcedureKind::ContinuousGraph:
      return std::make_unique<GraphRule>(config, /*fallback=*/false);
    case ProcedureKind::Geometric:
      return std::make_unique<GeometricRule>(config);
    case ProcedureKind::ContinuousSpending:
      return std::make_unique<SpendingRule>(config);
  }
  throw std::logic_error("make_rule: unknown procedure kind");
}

}  // namespace

Session make_session(const ProcedureConfig& config) { return Session(make_rule(config)); }

std::vector<double> replay_levels(const ProcedureConfig& config, std::span<const StepRecord> history) {
  auto rule = make_rule(config);
  StreamState state;
  state.history.reserve(history.size());
  std::vector<double> levels;
  levels.reserve(history.size());
  for (const StepRecord& recorded : history) {
    StepRecord step = recorded;
    step.level = rule->level(state);
    levels.push_back(step.level);
    state.history.push_back(step);
    rule->absorb(step);
  }
  return levels;
}

double audit_budget(std::span<const double> levels, std::span<const double> weights,
                    std::span<const double> lambdas) {
  if (levels.size() != weights.size() || levels.size() != lambdas.size()) {
    throw std::invalid_argument("audit_budget: input lengths differ");
  }
  double sum = 0.0;
  double max_sum = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(lambdas[i] >= 0.0 && lambdas[i] < 1.0)) {
      throw std::invalid_argument("audit_budget: lambda must lie in [0, 1)");
    }
    sum += levels[i] * weights[i] / (1.0 - lambdas[i]);
    max_sum = std::max(max_sum, sum);
  }
  return max_sum;
}

}  // namespace onlinefwer
