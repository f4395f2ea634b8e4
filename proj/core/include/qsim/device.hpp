#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsim {

// All rates (couplings g, Rabi frequencies, detunings) are expressed in units
// of 1/T2 and all times in units of T2, matching the dimensionless axes used
// throughout the analysis (gT2, lambdaT2).

enum class QubitRole { logical, syndrome_x, syndrome_z, ancilla };

const char* role_name(QubitRole role);
QubitRole role_from_name(const std::string& name);

struct Qubit {
  int id = 0;
  QubitRole role = QubitRole::ancilla;
  double omega = 0.0;  // bare qubit frequency [rad / T2]
};

struct Edge {
  int a = 0;
  int b = 0;
  double g = 0.0;  // always-on Ising coupling strength [rad / T2]
};

/// Timing of the two free-evolution segments of a spin-echo block.
/// Satisfies g1*(t1 - t2) = g2*(t1 + t2) = pi for the sorted pair g1 >= g2.
struct EchoTiming {
  double t1 = 0.0;
  double t2 = 0.0;
  bool swapped = false;  // set when the caller passed g1 < g2
};

/// Qubit lattice with roles, always-on coupling strengths and the rotating
/// frame assignment.  Immutable after construction; safe to share read-only
/// across parallel workers.
class DeviceGraph {
 public:
  DeviceGraph() = default;
  DeviceGraph(std::vector<Qubit> qubits, std::vector<Edge> edges);

  int num_qubits() const { return static_cast<int>(qubits_.size()); }
  const std::vector<Qubit>& qubits() const { return qubits_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Qubit& qubit(int id) const { return qubits_.at(static_cast<std::size_t>(id)); }

  bool has_frame() const { return !frame_.empty(); }
  /// Rotating-frame frequency omega' of a qubit.
  double frame(int id) const;
  /// Detuning omega - omega' entering the diagonal Hamiltonian.
  double detuning(int id) const;
  /// Half the sum of coupling strengths over edges incident to `id`.
  double half_coupling_sum(int id) const;

  const std::vector<int>& neighbors(int id) const;
  bool adjacent(int a, int b) const;
  double coupling(int a, int b) const;  // throws if (a, b) is not an edge
  bool is_main(int id) const { return qubit(id).role != QubitRole::ancilla; }
  bool uniform_coupling() const;  // all edges share one g (exact comparison)

  std::vector<int> main_qubits() const;
  std::vector<int> ancilla_qubits() const;

  /// Replaces the frame map; used by assign_frame.
  DeviceGraph with_frame(std::vector<double> frame) const;

 private:
  void build_adjacency();
  std::vector<Qubit> qubits_;
  std::vector<Edge> edges_;
  std::vector<double> frame_;  // omega' per qubit; empty until assigned
  std::vector<std::vector<int>> adjacency_;
};

/// Sets the rotating frame so that omega - omega' equals half the sum of the
/// incident couplings for every qubit.  With that choice the diagonal part of
/// the rotating-frame Hamiltonian reduces to sum_edges g * P_excited*P_excited
/// and a ground-state qubit decouples all of its neighbors.  Idempotent.
DeviceGraph assign_frame(const DeviceGraph& graph);

/// Linear chain of m main qubits interleaved with m-1 ancillas.
/// `couplings` holds one value per edge (2(m-1) entries, in id order) or a
/// single uniform value.  m must be even: the two-step pairing used by the 1D
/// generation procedure requires it.
DeviceGraph build_chain(int m, const std::vector<double>& couplings);
DeviceGraph build_chain(int m, double coupling);

/// m x m main qubits on a square grid with roles alternating logical /
/// syndrome in a checkerboard, plus 2m(m-1) ancillas on the edge midpoints.
/// Ising edges run only between main and ancilla qubits.  m must be even.
DeviceGraph build_2d_lattice(int m, double coupling);
/// Same topology with per-edge couplings drawn uniformly from
/// [g_min, g_max] using the given seed.
DeviceGraph build_2d_lattice_random(int m, double g_min, double g_max, unsigned long long seed);

/// Bilayer 3D cluster unit cells: each tile contributes 6 main qubits and 22
/// ancillas; tiles abut in-plane and are joined by inter-tile edges without
/// duplicating qubits.  Contains two cross-shaped junctions per tile.
DeviceGraph build_bilayer_unit(int tiles, double coupling);
DeviceGraph build_bilayer_unit_random(int tiles, double g_min, double g_max, unsigned long long seed);

/// Randomizes all edge couplings of an existing graph into [g_min, g_max]
/// (topology unchanged) and re-assigns the frame.
DeviceGraph randomize_couplings(const DeviceGraph& graph, double g_min, double g_max, unsigned long long seed);

/// Indices of the qubits forming a cross-shaped junction: a center ancilla
/// adjacent to four arm ancillas, each arm leading to one main qubit.
struct CrossShape {
  int center = -1;
  std::vector<int> arms;   // 4 arm ancillas, in id order
  std::vector<int> mains;  // mains[i] is reached through arms[i]
};

/// All cross-shaped junctions present in a graph (bilayer unit cells have two
/// per tile; the second one spans into the next tile when present).
std::vector<CrossShape> find_cross_shapes(const DeviceGraph& graph);

/// Extracts the subgraph of one cross shape as a standalone 9-qubit device
/// with dense re-numbered ids.  `mapping[new_id] = old_id`.
DeviceGraph extract_cross_subgraph(const DeviceGraph& graph, const CrossShape& cross,
                                   std::vector<int>* mapping = nullptr);

/// Spin-echo segment durations for couplings g1 (pulsed side) and g2.
/// If g1 < g2 the pair is swapped and the result flagged, per the
/// without-loss-of-generality convention.  Rejects non-positive couplings.
EchoTiming spin_echo_times(double g1, double g2);

/// JSON document {"qubits":[{"id","role","omega"}...],
///                "edges":[{"a","b","g"}...], "frame":{...}}.
std::string device_graph_to_json(const DeviceGraph& graph);
DeviceGraph device_graph_from_json(const std::string& text);

}  // namespace qsim
