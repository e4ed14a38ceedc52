#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace onlinefwer {

/// Ground-truth membership of one hypothesis. Only the simulation and
/// metrics layers ever see this; level rules operate on reports alone.
struct HypothesisTruth {
  bool is_null = true;
};

/// One reported test: p-value, consistent weight and the sample size the
/// statistic was computed from.
struct PValueRecord {
  double p = 1.0;
  double weight = 1.0;
  std::uint32_t sample_size = 1;
};

struct DecisionRecord {
  double level = 0.0;
  bool rejected = false;
};

/// Completed step as stored in the session history. `weight` is the
/// effective weight the active rule consumed (the reported weight for
/// weight-driven rules, the non-candidate indicator for indicator-driven
/// ones), so replaying the history reproduces every level exactly.
struct StepRecord {
  double weight = 1.0;
  double level = 0.0;
  bool rejected = false;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Mutable state of one online testing session.
struct StreamState {
  std::vector<StepRecord> history;
  std::optional<double> pending_level;

  std::size_t completed() const noexcept { return history.size(); }
  /// 1-based index of the hypothesis currently being tested.
  std::uint64_t current_step() const noexcept { return history.size() + 1; }
};

/// A level rule computes one test level per step from the completed history
/// and folds finished steps into its own accumulators.
class LevelRule {
 public:
  virtual ~LevelRule() = default;

  /// Level for step state.current_step(), a function of completed steps only.
  virtual double level(const StreamState& state) const = 0;

  /// Weight the rule consumes for a reported step (defaults to the record's
  /// weight field).
  virtual double effective_weight(std::uint64_t step, const PValueRecord& record) const;

  /// Folds a completed step into the rule's accumulators.
  virtual void absorb(const StepRecord& record) = 0;
};

/// Throws std::invalid_argument if the record violates its range invariants.
void validate(const PValueRecord& record);

/// Two-phase online testing session: the level for the current step is
/// issued first, then the data for that step is reported. next_level() is
/// idempotent between reports; report() without an issued level is a
/// protocol violation.
class Session {
 public:
  explicit Session(std::unique_ptr<LevelRule> rule);

  Session(Session&&) noexcept = default;
  Session& operator=(Session&&) noexcept = default;

  double next_level();
  DecisionRecord report(const PValueRecord& record);

  const StreamState& state() const noexcept { return state_; }

 private:
  std::unique_ptr<LevelRule> rule_;
  StreamState state_;
};

}  // namespace onlinefwer
