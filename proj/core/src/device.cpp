#include "qsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> random_couplings(std::size_t count, double g_min, double g_max,
                                     unsigned long long seed) {
  if (!(g_min > 0.0) || !(g_max >= g_min)) {
    throw std::invalid_argument("coupling range must satisfy 0 < g_min <= g_max");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(g_min, g_max);
  std::vector<double> out(count);
  for (auto& g : out) g = dist(rng);
  return out;
}

}  // namespace

const char* role_name(QubitRole role) {
  switch (role) {
    case QubitRole::logical: return "logical";
    case QubitRole::syndrome_x: return "syndrome_x";
    case QubitRole::syndrome_z: return "syndrome_z";
    case QubitRole::ancilla: return "ancilla";
  }
  throw std::logic_error("unreachable role");
}

QubitRole role_from_name(const std::string& name) {
  if (name == "logical") return QubitRole::logical;
  if (name == "syndrome_x") return QubitRole::syndrome_x;
  if (name == "syndrome_z") return QubitRole::syndrome_z;
  if (name == "ancilla") return QubitRole::ancilla;
  throw std::invalid_argument("unknown qubit role: " + name);
}

DeviceGraph::DeviceGraph(std::vector<Qubit> qubits, std::vector<Edge> edges)
    : qubits_(std::move(qubits)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    if (qubits_[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("qubit ids must be dense integers 0..n-1 in order");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (auto& e : edges_) {
    if (e.a == e.b) throw std::invalid_argument("self-loop edge");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.a < 0 || e.b >= num_qubits()) throw std::invalid_argument("edge endpoint out of range");
    if (!(e.g > 0.0)) throw std::invalid_argument("coupling strengths must be positive");
    if (!seen.insert({e.a, e.b}).second) throw std::invalid_argument("duplicate edge");
  }
  build_adjacency();
}

void DeviceGraph::build_adjacency() {
  adjacency_.assign(qubits_.size(), {});
  for (const auto& e : edges_) {
    adjacency_[static_cast<std::size_t>(e.a)].push_back(e.b);
    adjacency_[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

double DeviceGraph::frame(int id) const {
  if (!has_frame()) throw std::logic_error("frame not assigned");
  return frame_.at(static_cast<std::size_t>(id));
}

double DeviceGraph::detuning(int id) const { return qubit(id).omega - frame(id); }

double DeviceGraph::half_coupling_sum(int id) const {
  double sum = 0.0;
  for (const auto& e : edges_) {
    if (e.a == id || e.b == id) sum += 0.5 * e.g;
  }
  return sum;
}

const std::vector<int>& DeviceGraph::neighbors(int id) const {
  return adjacency_.at(static_cast<std::size_t>(id));
}

bool DeviceGraph::adjacent(int a, int b) const {
  const auto& nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

double DeviceGraph::coupling(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (const auto& e : edges_) {
    if (e.a == a && e.b == b) return e.g;
  }
  throw std::invalid_argument("no edge between qubits " + std::to_string(a) + " and " +
                              std::to_string(b));
}

bool DeviceGraph::uniform_coupling() const {
  for (const auto& e : edges_) {
    if (e.g != edges_.front().g) return false;
  }
  return true;
}

std::vector<int> DeviceGraph::main_qubits() const {
  std::vector<int> out;
  for (const auto& q : qubits_) {
    if (q.role != QubitRole::ancilla) out.push_back(q.id);
  }
  return out;
}

std::vector<int> DeviceGraph::ancilla_qubits() const {
  std::vector<int> out;
  for (const auto& q : qubits_) {
    if (q.role == QubitRole::ancilla) out.push_back(q.id);
  }
  return out;
}

DeviceGraph DeviceGraph::with_frame(std::vector<double> frame) const {
  if (frame.size() != qubits_.size()) throw std::invalid_argument("frame size mismatch");
  DeviceGraph copy = *this;
  copy.frame_ = std::move(frame);
  return copy;
}

DeviceGraph assign_frame(const DeviceGraph& graph) {
  std::vector<double> frame(static_cast<std::size_t>(graph.num_qubits()));
  for (const auto& q : graph.qubits()) {
    frame[static_cast<std::size_t>(q.id)] = q.omega - graph.half_coupling_sum(q.id);
  }
  return graph.with_frame(std::move(frame));
}

DeviceGraph build_chain(int m, const std::vector<double>& couplings) {
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("chain size m must be even and >= 2");
  }
  const int n_edges = 2 * (m - 1);
  std::vector<double> g;
  if (couplings.size() == 1) {
    g.assign(static_cast<std::size_t>(n_edges), couplings.front());
  } else if (static_cast<int>(couplings.size()) == n_edges) {
    g = couplings;
  } else {
    throw std::invalid_argument("expected 1 or 2(m-1) coupling values");
  }

  // Refined 1D lattice: even positions are main qubits, odd positions are the
  // ancillas inserted between them.  Ids follow lattice order.
  std::vector<Qubit> qubits;
  const int n = 2 * m - 1;
  for (int i = 0; i < n; ++i) {
    QubitRole role = (i % 2 == 0) ? QubitRole::logical : QubitRole::ancilla;
    qubits.push_back({i, role, 0.0});
  }
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1, g[static_cast<std::size_t>(i)]});
  }
  return assign_frame(DeviceGraph(std::move(qubits), std::move(edges)));
}

DeviceGraph build_chain(int m, double coupling) { return build_chain(m, std::vector<double>{coupling}); }

namespace {

DeviceGraph build_2d_lattice_with(int m, const std::vector<double>& per_edge_g) {
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("lattice size m must be even and >= 2");
  }
  // Refined (2m-1) x (2m-1) grid: (even,even) cells host main qubits,
  // (even,odd)/(odd,even) cells host ancillas on the edge midpoints and
  // (odd,odd) cells are empty.  Ids are dense in row-major order.
  const int span = 2 * m - 1;
  std::vector<std::vector<int>> id_at(static_cast<std::size_t>(span),
                                      std::vector<int>(static_cast<std::size_t>(span), -1));
  std::vector<Qubit> qubits;
  for (int r = 0; r < span; ++r) {
    for (int c = 0; c < span; ++c) {
      const bool main_site = (r % 2 == 0) && (c % 2 == 0);
      const bool anc_site = (r % 2) != (c % 2);
      if (!main_site && !anc_site) continue;
      QubitRole role = QubitRole::ancilla;
      if (main_site) {
        const int i = r / 2;
        const int j = c / 2;
        if ((i + j) % 2 == 0) {
          role = QubitRole::logical;
        } else {
          role = (i % 2 == 0) ? QubitRole::syndrome_x : QubitRole::syndrome_z;
        }
      }
      const int id = static_cast<int>(qubits.size());
      id_at[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = id;
      qubits.push_back({id, role, 0.0});
    }
  }
  std::vector<Edge> edges;
  std::size_t gi = 0;
  auto next_g = [&]() {
    if (gi >= per_edge_g.size()) throw std::logic_error("coupling list too short");
    return per_edge_g[gi++];
  };
  for (int r = 0; r < span; ++r) {
    for (int c = 0; c < span; ++c) {
      const int id = id_at[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (id < 0) continue;
      if (c + 1 < span) {
        const int right = id_at[static_cast<std::size_t>(r)][static_cast<std::size_t>(c + 1)];
        if (right >= 0) edges.push_back({id, right, next_g()});
      }
      if (r + 1 < span) {
        const int below = id_at[static_cast<std::size_t>(r + 1)][static_cast<std::size_t>(c)];
        if (below >= 0) edges.push_back({id, below, next_g()});
      }
    }
  }
  return assign_frame(DeviceGraph(std::move(qubits), std::move(edges)));
}

int lattice_edge_count(int m) {
  // Every ancilla sits between exactly two mains: 2 edges per ancilla.
  return 2 * (2 * m * (m - 1));
}

}  // namespace

DeviceGraph build_2d_lattice(int m, double coupling) {
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling must be positive");
  return build_2d_lattice_with(
      m, std::vector<double>(static_cast<std::size_t>(lattice_edge_count(m)), coupling));
}

DeviceGraph build_2d_lattice_random(int m, double g_min, double g_max, unsigned long long seed) {
  return build_2d_lattice_with(
      m, random_couplings(static_cast<std::size_t>(lattice_edge_count(m)), g_min, g_max, seed));
}

namespace {

// Bilayer unit cell, transcribed as an explicit constant.  Each tile holds 6
// main qubits (two logicals, two bit-flip syndromes, two dephasing syndromes)
// and 22 ancillas:
//
//   0 S1 syndrome_x   1 L1 logical   2 S2 syndrome_x     bit-flip layer
//   3 S3 syndrome_z   4 L2 logical   5 S4 syndrome_z     dephasing layer
//   6  a1 (S1-L1)   7 a2 (L1-S2)   8 a3 (S3-L2)   9 a4 (L2-S4)   pair mediators
//   10 c0 cross center, arms 11 uL1 -> L1, 12 uL2 -> L2,
//                           13 uS2 -> S2, 14 uS3 -> S3           in-cell slant
//   15 c1 cross center, arms 16 wL2 -> L2, 17 wS4 -> S4,
//        18 wL1 -> L1 of the next tile, 19 wS1 -> S1 of the next tile
//   20 h1 (S2 -> next L1)   21 h2 (S4 -> next L2)   in-layer continuations
//   22..27 p1..p6: one per main qubit, the vertical continuation stubs toward
//        the adjacent rows of cells (a single row of tiles is built here).
//
// Abutting tiles share no qubits; the t -> t+1 junction adds four edges
// (wL1, wS1 arms of cross c1 and the h1, h2 mediators).
struct CellEdge {
  int a;
  int b;
};

constexpr int kCellQubits = 28;
constexpr int kCellMains = 6;

constexpr CellEdge kCellEdges[] = {
    {0, 6},   {6, 1},   {1, 7},   {7, 2},    // S1-a1-L1, L1-a2-S2
    {3, 8},   {8, 4},   {4, 9},   {9, 5},    // S3-a3-L2, L2-a4-S4
    {1, 11},  {11, 10}, {4, 12},  {12, 10},  // cross c0 arms to L1, L2
    {2, 13},  {13, 10}, {3, 14},  {14, 10},  // cross c0 arms to S2, S3
    {4, 16},  {16, 15}, {5, 17},  {17, 15},  // cross c1 arms to L2, S4
    {15, 18}, {15, 19},                      // cross c1 arms toward next tile
    {2, 20},  {5, 21},                       // h1, h2 stubs
    {0, 22},  {1, 23},  {2, 24},  {3, 25},  {4, 26}, {5, 27},  // p stubs
};

// Edges from tile t into tile t+1: {local id in tile t, local id in tile t+1}.
constexpr CellEdge kInterTileEdges[] = {
    {18, 1},  // wL1 -> next L1 (completes cross c1's slant path)
    {19, 0},  // wS1 -> next S1 (cross c1 shield arm)
    {20, 1},  // h1  -> next L1 (bit-flip layer continuation)
    {21, 4},  // h2  -> next L2 (dephasing layer continuation)
};

constexpr QubitRole kCellRoles[kCellQubits] = {
    QubitRole::syndrome_x, QubitRole::logical, QubitRole::syndrome_x,
    QubitRole::syndrome_z, QubitRole::logical, QubitRole::syndrome_z,
    QubitRole::ancilla,    QubitRole::ancilla, QubitRole::ancilla,    QubitRole::ancilla,
    QubitRole::ancilla,    QubitRole::ancilla, QubitRole::ancilla,    QubitRole::ancilla,
    QubitRole::ancilla,    QubitRole::ancilla, QubitRole::ancilla,    QubitRole::ancilla,
    QubitRole::ancilla,    QubitRole::ancilla, QubitRole::ancilla,    QubitRole::ancilla,
    QubitRole::ancilla,    QubitRole::ancilla, QubitRole::ancilla,    QubitRole::ancilla,
    QubitRole::ancilla,    QubitRole::ancilla,
};

DeviceGraph build_bilayer_with(int tiles, const std::vector<double>& per_edge_g) {
  if (tiles < 1) throw std::invalid_argument("tiles must be >= 1");
  std::vector<Qubit> qubits;
  std::vector<Edge> edges;
  std::size_t gi = 0;
  auto next_g = [&]() { return per_edge_g[gi++]; };
  for (int t = 0; t < tiles; ++t) {
    const int base = kCellQubits * t;
    for (int i = 0; i < kCellQubits; ++i) {
      qubits.push_back({base + i, kCellRoles[i], 0.0});
    }
    for (const auto& e : kCellEdges) {
      edges.push_back({base + e.a, base + e.b, next_g()});
    }
    if (t + 1 < tiles) {
      for (const auto& e : kInterTileEdges) {
        edges.push_back({base + e.a, base + kCellQubits + e.b, next_g()});
      }
    }
  }
  return assign_frame(DeviceGraph(std::move(qubits), std::move(edges)));
}

int bilayer_edge_count(int tiles) {
  return tiles * static_cast<int>(std::size(kCellEdges)) +
         (tiles - 1) * static_cast<int>(std::size(kInterTileEdges));
}

}  // namespace

DeviceGraph build_bilayer_unit(int tiles, double coupling) {
  if (tiles < 1) throw std::invalid_argument("tiles must be >= 1");
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling must be positive");
  return build_bilayer_with(
      tiles, std::vector<double>(static_cast<std::size_t>(bilayer_edge_count(tiles)), coupling));
}

DeviceGraph build_bilayer_unit_random(int tiles, double g_min, double g_max,
                                      unsigned long long seed) {
  if (tiles < 1) throw std::invalid_argument("tiles must be >= 1");
  return build_bilayer_with(
      tiles, random_couplings(static_cast<std::size_t>(bilayer_edge_count(tiles)), g_min, g_max, seed));
}

DeviceGraph randomize_couplings(const DeviceGraph& graph, double g_min, double g_max,
                                unsigned long long seed) {
  auto gs = random_couplings(graph.edges().size(), g_min, g_max, seed);
  std::vector<Edge> edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].g = gs[i];
  return assign_frame(DeviceGraph(graph.qubits(), std::move(edges)));
}

std::vector<CrossShape> find_cross_shapes(const DeviceGraph& graph) {
  std::vector<CrossShape> out;
  for (const auto& q : graph.qubits()) {
    if (q.role != QubitRole::ancilla) continue;
    const auto& nb = graph.neighbors(q.id);
    if (nb.size() != 4) continue;
    CrossShape cross;
    cross.center = q.id;
    bool ok = true;
    for (int arm : nb) {
      if (graph.is_main(arm)) {
        ok = false;
        break;
      }
      // Arm ancillas connect the center to exactly one main qubit.
      int main_end = -1;
      for (int u : graph.neighbors(arm)) {
        if (u == q.id) continue;
        if (graph.is_main(u)) {
          if (main_end != -1) {
            ok = false;
            break;
          }
          main_end = u;
        }
      }
      if (!ok || main_end < 0) {
        ok = false;
        break;
      }
      cross.arms.push_back(arm);
      cross.mains.push_back(main_end);
    }
    if (ok && cross.arms.size() == 4) out.push_back(cross);
  }
  return out;
}

DeviceGraph extract_cross_subgraph(const DeviceGraph& graph, const CrossShape& cross,
                                   std::vector<int>* mapping) {
  std::vector<int> old_ids;
  old_ids.insert(old_ids.end(), cross.mains.begin(), cross.mains.end());
  old_ids.insert(old_ids.end(), cross.arms.begin(), cross.arms.end());
  old_ids.push_back(cross.center);
  std::sort(old_ids.begin(), old_ids.end());

  std::vector<int> new_id(static_cast<std::size_t>(graph.num_qubits()), -1);
  std::vector<Qubit> qubits;
  for (std::size_t i = 0; i < old_ids.size(); ++i) {
    new_id[static_cast<std::size_t>(old_ids[i])] = static_cast<int>(i);
    Qubit q = graph.qubit(old_ids[i]);
    q.id = static_cast<int>(i);
    qubits.push_back(q);
  }
  std::vector<Edge> edges;
  for (const auto& e : graph.edges()) {
    const int a = new_id[static_cast<std::size_t>(e.a)];
    const int b = new_id[static_cast<std::size_t>(e.b)];
    if (a >= 0 && b >= 0) edges.push_back({a, b, e.g});
  }
  if (mapping) *mapping = old_ids;
  return assign_frame(DeviceGraph(std::move(qubits), std::move(edges)));
}

EchoTiming spin_echo_times(double g1, double g2) {
  if (!(g1 > 0.0) || !(g2 > 0.0)) {
    throw std::invalid_argument("spin_echo_times requires positive couplings");
  }
  EchoTiming timing;
  if (g1 < g2) {
    std::swap(g1, g2);
    timing.swapped = true;
  }
  timing.t1 = kPi * (g1 + g2) / (2.0 * g1 * g2);
  timing.t2 = kPi * (g1 - g2) / (2.0 * g1 * g2);
  return timing;
}

std::string device_graph_to_json(const DeviceGraph& graph) {
  nlohmann::json doc;
  doc["qubits"] = nlohmann::json::array();
  for (const auto& q : graph.qubits()) {
    doc["qubits"].push_back({{"id", q.id}, {"role", role_name(q.role)}, {"omega", q.omega}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    doc["edges"].push_back({{"a", e.a}, {"b", e.b}, {"g", e.g}});
  }
  doc["frame"] = nlohmann::json::object();
  if (graph.has_frame()) {
    for (const auto& q : graph.qubits()) {
      doc["frame"][std::to_string(q.id)] = graph.frame(q.id);
    }
  }
  return doc.dump(2);
}

DeviceGraph device_graph_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid device graph JSON: ") + e.what());
  }
  std::vector<Qubit> qubits;
  for (const auto& q : doc.at("qubits")) {
    qubits.push_back({q.at("id").get<int>(), role_from_name(q.at("role").get<std::string>()),
                      q.at("omega").get<double>()});
  }
  std::sort(qubits.begin(), qubits.end(), [](const Qubit& a, const Qubit& b) { return a.id < b.id; });
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges")) {
    edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(), e.at("g").get<double>()});
  }
  DeviceGraph graph(std::move(qubits), std::move(edges));
  if (doc.contains("frame") && !doc["frame"].empty()) {
    std::vector<double> frame(static_cast<std::size_t>(graph.num_qubits()));
    for (const auto& [key, value] : doc["frame"].items()) {
      frame.at(static_cast<std::size_t>(std::stoi(key))) = value.get<double>();
    }
    return graph.with_frame(std::move(frame));
  }
  return graph;
}

}  // namespace qsim
