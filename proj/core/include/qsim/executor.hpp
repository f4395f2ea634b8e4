#pragma once

#include <optional>
#include <random>
#include <vector>

#include "qsim/schedule.hpp"

namespace qsim {

/// Measurement outcome policy for a whole run.  `forced` lists one outcome
/// (+1/-1) per measurement ordinal; missing entries are sampled.
struct RunPolicy {
  std::mt19937_64* rng = nullptr;
  std::vector<int> forced;

  static RunPolicy sample(std::mt19937_64& rng) { return {&rng, {}}; }
  static RunPolicy force(std::vector<int> outcomes) { return {nullptr, std::move(outcomes)}; }

  MeasurePolicy for_ordinal(int ordinal) const;
};

struct DenseRunResult {
  StateVector state;
  std::vector<MeasurementRecord> records;
};

/// Optional Monte Carlo dephasing: a random Z per qubit per FreeEvolve
/// interval with probability (1 - e^{-t/T2})/2.  Validates the analytic
/// decoherence error model; not part of the exact engine.
struct DephasingOptions {
  double t2 = 0.0;
  std::mt19937_64* rng = nullptr;
};

DenseRunResult execute_dense(const PulseSchedule& schedule, const DeviceGraph& graph,
                             StateVector initial, const RunPolicy& policy,
                             const std::optional<DephasingOptions>& dephasing = std::nullopt);

struct TableauRunResult {
  StabilizerTableau tableau;
  std::vector<TableauMeasurement> records;
};

/// Replays a schedule on the stabilizer backend.  Diagonal evolution is
/// accumulated lazily as per-edge and per-qubit phases and flushed into
/// CZ / S / Z gates when a non-diagonal operation or measurement touches a
/// qubit; phases on edges with a deterministically grounded endpoint vanish
/// and are dropped, which is exactly the interaction-switching rule.
/// Throws if a pending phase is not Clifford at flush time or if the
/// schedule contains Drive steps.
TableauRunResult execute_tableau(const PulseSchedule& schedule, const DeviceGraph& graph,
                                 const RunPolicy& policy);
TableauRunResult execute_tableau(const PulseSchedule& schedule, const DeviceGraph& graph,
                                 StabilizerTableau initial, const RunPolicy& policy);

/// All measurement-outcome patterns with non-zero probability, found by
/// forced dense execution (branch-and-recurse).  Patterns are strings of
/// '+'/'-' per measurement ordinal.
std::vector<std::vector<int>> enumerate_outcome_patterns(const PulseSchedule& schedule,
                                                         const DeviceGraph& graph,
                                                         const StateVector& initial);

}  // namespace qsim
