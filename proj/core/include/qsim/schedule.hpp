#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qsim/device.hpp"
#include "qsim/stabilizer.hpp"
#include "qsim/statevector.hpp"

namespace qsim {

// Schedules are data, not closures: built once and executable on either
// backend; feedforward branches are explicit tables keyed by outcome
// patterns, which keeps cross-backend replay and serialization trivial.

struct FreeEvolveStep {
  double duration = 0.0;
};

struct DriveStep {
  DrivePulse pulse;
};

struct InstantStep {
  InstantGate gate;
  int qubit = 0;
};

struct MeasureStep {
  int qubit = 0;
  PauliBasis basis = PauliBasis::Z;
};

/// Conditional instant gates keyed by the outcomes of earlier measurements.
/// `measurements` holds measurement ordinals (index among Measure steps);
/// pattern strings list one '+'/'-' per referenced ordinal, in order.
/// Missing patterns mean "apply nothing".
struct FeedforwardStep {
  std::vector<int> measurements;
  std::map<std::string, std::vector<InstantStep>> branches;
};

using ScheduleStep = std::variant<FreeEvolveStep, DriveStep, InstantStep, MeasureStep, FeedforwardStep>;

class PulseSchedule {
 public:
  PulseSchedule() = default;

  void add_free_evolve(double duration);
  void add_drive(const DrivePulse& pulse);
  void add_instant(const InstantGate& gate, int qubit);
  /// Returns the measurement ordinal of the added step.
  int add_measure(int qubit, PauliBasis basis);
  void add_feedforward(FeedforwardStep step);

  const std::vector<ScheduleStep>& steps() const { return steps_; }
  int num_measurements() const { return num_measurements_; }

  int count_instants(GateKind kind) const;
  int count_steps_of(std::size_t variant_index) const;

  /// Checks durations >= 0 and that feedforward steps reference only prior
  /// measurements; throws on violation.
  void validate() const;

  void append(const PulseSchedule& other);  // re-bases measurement ordinals

 private:
  std::vector<ScheduleStep> steps_;
  int num_measurements_ = 0;
};

std::string schedule_to_json(const PulseSchedule& schedule);
PulseSchedule schedule_from_json(const std::string& text);

}  // namespace qsim
