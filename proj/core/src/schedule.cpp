#include "qsim/schedule.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qsim {

void PulseSchedule::add_free_evolve(double duration) {
  if (duration < 0.0) throw std::invalid_argument("durations must be >= 0");
  steps_.push_back(FreeEvolveStep{duration});
}

void PulseSchedule::add_drive(const DrivePulse& pulse) {
  if (pulse.duration < 0.0 || pulse.lambda < 0.0) {
    throw std::invalid_argument("drive requires lambda >= 0 and duration >= 0");
  }
  steps_.push_back(DriveStep{pulse});
}

void PulseSchedule::add_instant(const InstantGate& gate, int qubit) {
  steps_.push_back(InstantStep{gate, qubit});
}

int PulseSchedule::add_measure(int qubit, PauliBasis basis) {
  steps_.push_back(MeasureStep{qubit, basis});
  return num_measurements_++;
}

void PulseSchedule::add_feedforward(FeedforwardStep step) {
  for (int ordinal : step.measurements) {
    if (ordinal < 0 || ordinal >= num_measurements_) {
      throw std::invalid_argument("feedforward references a measurement that does not precede it");
    }
  }
  for (const auto& [pattern, gates] : step.branches) {
    if (pattern.size() != step.measurements.size()) {
      throw std::invalid_argument("branch pattern length must match referenced measurements");
    }
    for (char c : pattern) {
      if (c != '+' && c != '-') throw std::invalid_argument("branch patterns use only '+'/'-'");
    }
  }
  steps_.push_back(std::move(step));
}

int PulseSchedule::count_instants(GateKind kind) const {
  int count = 0;
  for (const auto& step : steps_) {
    if (const auto* inst = std::get_if<InstantStep>(&step)) {
      if (inst->gate.kind == kind) ++count;
    }
  }
  return count;
}

int PulseSchedule::count_steps_of(std::size_t variant_index) const {
  int count = 0;
  for (const auto& step : steps_) {
    if (step.index() == variant_index) ++count;
  }
  return count;
}

void PulseSchedule::validate() const {
  int seen_measurements = 0;
  for (const auto& step : steps_) {
    if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
      if (fe->duration < 0.0) throw std::invalid_argument("negative free-evolution duration");
    } else if (const auto* dr = std::get_if<DriveStep>(&step)) {
      if (dr->pulse.duration < 0.0) throw std::invalid_argument("negative drive duration");
    } else if (std::holds_alternative<MeasureStep>(step)) {
      ++seen_measurements;
    } else if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
      for (int ordinal : ff->measurements) {
        if (ordinal >= seen_measurements) {
          throw std::invalid_argument("feedforward references a later measurement");
        }
      }
    }
  }
}

void PulseSchedule::append(const PulseSchedule& other) {
  const int offset = num_measurements_;
  for (const auto& step : other.steps_) {
    if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
      FeedforwardStep shifted = *ff;
      for (int& ordinal : shifted.measurements) ordinal += offset;
      steps_.push_back(std::move(shifted));
    } else {
      steps_.push_back(step);
    }
  }
  num_measurements_ += other.num_measurements_;
}

namespace {

const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::SPlus: return "s+";
    case GateKind::SMinus: return "s-";
    case GateKind::Rx: return "rx";
    case GateKind::Ry: return "ry";
    case GateKind::H: return "h";
    case GateKind::Phase: return "phase";
  }
  throw std::logic_error("unreachable gate kind");
}

GateKind gate_kind_from_name(const std::string& name) {
  if (name == "x") return GateKind::X;
  if (name == "y") return GateKind::Y;
  if (name == "z") return GateKind::Z;
  if (name == "s+") return GateKind::SPlus;
  if (name == "s-") return GateKind::SMinus;
  if (name == "rx") return GateKind::Rx;
  if (name == "ry") return GateKind::Ry;
  if (name == "h") return GateKind::H;
  if (name == "phase") return GateKind::Phase;
  throw std::invalid_argument("unknown gate: " + name);
}

nlohmann::json instant_to_json(const InstantStep& inst) {
  nlohmann::json j{{"type", "instant"}, {"gate", gate_kind_name(inst.gate.kind)}, {"qubit", inst.qubit}};
  if (inst.gate.kind == GateKind::Rx || inst.gate.kind == GateKind::Ry ||
      inst.gate.kind == GateKind::Phase) {
    j["angle"] = inst.gate.angle;
  }
  return j;
}

InstantStep instant_from_json(const nlohmann::json& j) {
  InstantStep inst;
  inst.gate.kind = gate_kind_from_name(j.at("gate").get<std::string>());
  inst.gate.angle = j.value("angle", 0.0);
  inst.qubit = j.at("qubit").get<int>();
  return inst;
}

}  // namespace

std::string schedule_to_json(const PulseSchedule& schedule) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : schedule.steps()) {
    if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
      steps.push_back({{"type", "free_evolve"}, {"duration", fe->duration}});
    } else if (const auto* dr = std::get_if<DriveStep>(&step)) {
      steps.push_back({{"type", "drive"},
                       {"qubit", dr->pulse.qubit},
                       {"lambda", dr->pulse.lambda},
                       {"theta", dr->pulse.theta},
                       {"duration", dr->pulse.duration},
                       {"frame_shift", dr->pulse.frame_shift}});
    } else if (const auto* inst = std::get_if<InstantStep>(&step)) {
      steps.push_back(instant_to_json(*inst));
    } else if (const auto* ms = std::get_if<MeasureStep>(&step)) {
      steps.push_back({{"type", "measure"}, {"qubit", ms->qubit}, {"basis", basis_name(ms->basis)}});
    } else if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
      nlohmann::json branches = nlohmann::json::object();
      for (const auto& [pattern, gates] : ff->branches) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& g : gates) list.push_back(instant_to_json(g));
        branches[pattern] = list;
      }
      steps.push_back(
          {{"type", "feedforward"}, {"measurements", ff->measurements}, {"branches", branches}});
    }
  }
  return nlohmann::json{{"steps", steps}}.dump(2);
}

PulseSchedule schedule_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid schedule JSON: ") + e.what());
  }
  PulseSchedule schedule;
  for (const auto& j : doc.at("steps")) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "free_evolve") {
      schedule.add_free_evolve(j.at("duration").get<double>());
    } else if (type == "drive") {
      DrivePulse pulse;
      pulse.qubit = j.at("qubit").get<int>();
      pulse.lambda = j.at("lambda").get<double>();
      pulse.theta = j.at("theta").get<double>();
      pulse.duration = j.at("duration").get<double>();
      pulse.frame_shift = j.value("frame_shift", 0.0);
      schedule.add_drive(pulse);
    } else if (type == "instant") {
      const InstantStep inst = instant_from_json(j);
      schedule.add_instant(inst.gate, inst.qubit);
    } else if (type == "measure") {
      schedule.add_measure(j.at("qubit").get<int>(), basis_from_name(j.at("basis").get<std::string>()));
    } else if (type == "feedforward") {
      FeedforwardStep ff;
      ff.measurements = j.at("measurements").get<std::vector<int>>();
      for (const auto& [pattern, gates] : j.at("branches").items()) {
        std::vector<InstantStep> list;
        for (const auto& g : gates) list.push_back(instant_from_json(g));
        ff.branches[pattern] = std::move(list);
      }
      schedule.add_feedforward(std::move(ff));
    } else {
      throw std::invalid_argument("unknown schedule step type: " + type);
    }
  }
  schedule.validate();
  return schedule;
}

}  // namespace qsim
