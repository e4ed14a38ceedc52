#include "onlinefwer/core.hpp"

#include <cmath>

namespace onlinefwer {

double LevelRule::effective_weight(std::uint64_t /*step*/, const PValueRecord& record) const {
  return record.weight;
}

void validate(const PValueRecord& record) {
  if (!(record.p >= 0.0 && record.p <= 1.0)) {
    throw std::invalid_argument("PValueRecord: p must lie in [0, 1]");
  }
  if (!(record.weight >= 0.0 && record.weight <= 1.0)) {
    throw std::invalid_argument("PValueRecord: weight must lie in [0, 1]");
  }
  if (record.sample_size < 1) {
    throw std::invalid_argument("PValueRecord: sample_size must be >= 1");
  }
}

Session::Session(std::unique_ptr<LevelRule> rule) : rule_(std::move(rule)) {
  if (!rule_) throw std::invalid_argument("Session: null level rule");
}

double Session::next_level() {
  if (!state_.pending_level) state_.pending_level = rule_->level(state_);
  return *state_.pending_level;
}

DecisionRecord Session::report(const PValueRecord& record) {
  validate(record);
  if (!state_.pending_level) {
    throw ProtocolError("report() called with no issued level for the current step");
  }
  const double level = *state_.pending_level;
  StepRecord step;
  step.weight = rule_->effective_weight(state_.current_step(), record);
  step.level = level;
  step.rejected = record.p <= level;  // non-strict by definition
  state_.history.push_back(step);
  state_.pending_level.reset();
  rule_->absorb(step);
  return DecisionRecord{level, step.rejected};
}

}  // namespace onlinefwer
