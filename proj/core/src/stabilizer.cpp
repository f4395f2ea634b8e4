#include "qsim/stabilizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qsim {

namespace {

inline std::size_t word_of(int q) { return static_cast<std::size_t>(q) >> 6; }
inline std::uint64_t bit_of(int q) { return std::uint64_t{1} << (q & 63); }

}  // namespace

StabilizerTableau::StabilizerTableau(int n) : n_(n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("tableau supports 1..4096 qubits");
  words_ = (static_cast<std::size_t>(n) + 63) / 64;
  xs_.assign(2 * static_cast<std::size_t>(n) * words_, 0);
  zs_.assign(2 * static_cast<std::size_t>(n) * words_, 0);
  r_.assign(2 * static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    // destabilizer X_i, stabilizer Z_i
    xs_[static_cast<std::size_t>(i) * words_ + word_of(i)] |= bit_of(i);
    zs_[(static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * words_ + word_of(i)] |= bit_of(i);
  }
}

namespace {
inline bool get_bit(const std::vector<std::uint64_t>& v, std::size_t row, std::size_t words, int q) {
  return (v[row * words + word_of(q)] >> (q & 63)) & 1;
}
inline void xor_bit(std::vector<std::uint64_t>& v, std::size_t row, std::size_t words, int q,
                    bool value) {
  if (value) v[row * words + word_of(q)] ^= bit_of(q);
}
inline void set_bit(std::vector<std::uint64_t>& v, std::size_t row, std::size_t words, int q,
                    bool value) {
  if (value) {
    v[row * words + word_of(q)] |= bit_of(q);
  } else {
    v[row * words + word_of(q)] &= ~bit_of(q);
  }
}
}  // namespace

/// Exponent of i for the product row_h * row_i: the per-qubit g function of
/// the standard tableau algorithm plus both rows' phase exponents.
int StabilizerTableau::row_sign_exponent(std::size_t h, std::size_t i) const {
  int sum = r_[h] + r_[i];
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t live = xs_[i * words_ + w] | zs_[i * words_ + w];
    while (live != 0) {
      const int bit = std::countr_zero(live);
      live &= live - 1;
      const int q = static_cast<int>(w * 64) + bit;
      const int x1 = get_bit(xs_, i, words_, q);
      const int z1 = get_bit(zs_, i, words_, q);
      const int x2 = get_bit(xs_, h, words_, q);
      const int z2 = get_bit(zs_, h, words_, q);
      if (x1 == 1 && z1 == 1) {
        sum += z2 - x2;
      } else if (x1 == 1) {
        sum += z2 * (2 * x2 - 1);
      } else {
        sum += x2 * (1 - 2 * z2);
      }
    }
  }
  return ((sum % 4) + 4) % 4;
}

void StabilizerTableau::rowsum(std::size_t h, std::size_t i) {
  r_[h] = static_cast<std::uint8_t>(row_sign_exponent(h, i));
  for (std::size_t w = 0; w < words_; ++w) {
    xs_[h * words_ + w] ^= xs_[i * words_ + w];
    zs_[h * words_ + w] ^= zs_[i * words_ + w];
  }
}

void StabilizerTableau::apply_h(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool x = get_bit(xs_, row, words_, q);
    const bool z = get_bit(zs_, row, words_, q);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (x && z)) & 3);
    set_bit(xs_, row, words_, q, z);
    set_bit(zs_, row, words_, q, x);
  }
}

void StabilizerTableau::apply_s(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool x = get_bit(xs_, row, words_, q);
    const bool z = get_bit(zs_, row, words_, q);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (x && z)) & 3);
    set_bit(zs_, row, words_, q, x != z);
  }
}

void StabilizerTableau::apply_sdg(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool x = get_bit(xs_, row, words_, q);
    const bool z = get_bit(zs_, row, words_, q);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (x && !z)) & 3);
    set_bit(zs_, row, words_, q, x != z);
  }
}

void StabilizerTableau::apply_x(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * get_bit(zs_, row, words_, q)) & 3);
  }
}

void StabilizerTableau::apply_y(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    r_[row] = static_cast<std::uint8_t>(
        (r_[row] + 2 * (get_bit(zs_, row, words_, q) != get_bit(xs_, row, words_, q))) & 3);
  }
}

void StabilizerTableau::apply_z(int q) {
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * get_bit(xs_, row, words_, q)) & 3);
  }
}

void StabilizerTableau::apply_cz(int a, int b) {
  if (a == b) throw std::invalid_argument("CZ requires distinct qubits");
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool xa = get_bit(xs_, row, words_, a);
    const bool za = get_bit(zs_, row, words_, a);
    const bool xb = get_bit(xs_, row, words_, b);
    const bool zb = get_bit(zs_, row, words_, b);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (xa && xb && (za != zb))) & 3);
    set_bit(zs_, row, words_, a, za != xb);
    set_bit(zs_, row, words_, b, zb != xa);
  }
}

void StabilizerTableau::apply_rx(int q, bool positive) {
  // Rx(+pi/2): X -> X, Z -> -Y, Y -> Z;  Rx(-pi/2): Z -> Y, Y -> -Z.
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool x = get_bit(xs_, row, words_, q);
    const bool z = get_bit(zs_, row, words_, q);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (positive ? (!x && z) : (x && z))) & 3);
    set_bit(xs_, row, words_, q, x != z);
  }
}

void StabilizerTableau::apply_ry(int q, bool positive) {
  // Ry(+pi/2): X -> -Z, Z -> X, Y -> Y;  Ry(-pi/2): X -> Z, Z -> -X.
  for (std::size_t row = 0; row < 2 * static_cast<std::size_t>(n_); ++row) {
    const bool x = get_bit(xs_, row, words_, q);
    const bool z = get_bit(zs_, row, words_, q);
    r_[row] = static_cast<std::uint8_t>((r_[row] + 2 * (positive ? (x && !z) : (!x && z))) & 3);
    set_bit(xs_, row, words_, q, z);
    set_bit(zs_, row, words_, q, x);
  }
}

bool StabilizerTableau::anticommutes(std::size_t row, const PauliString& p) const {
  int parity = 0;
  for (int q : p.support) {
    const bool px = p.x[static_cast<std::size_t>(q)];
    const bool pz = p.z[static_cast<std::size_t>(q)];
    parity ^= (get_bit(xs_, row, words_, q) && pz) != (get_bit(zs_, row, words_, q) && px);
  }
  return parity != 0;
}

TableauMeasurement StabilizerTableau::measure(int q, PauliBasis basis, MeasurePolicy policy) {
  if (q < 0 || q >= n_) throw std::invalid_argument("qubit index out of range");
  PauliString p = PauliString::identity(n_);
  p.set(q, basis);

  const std::size_t n = static_cast<std::size_t>(n_);
  std::size_t pivot = 2 * n;
  for (std::size_t row = n; row < 2 * n; ++row) {
    if (anticommutes(row, p)) {
      pivot = row;
      break;
    }
  }

  TableauMeasurement result{q, basis, +1, pivot == 2 * n};
  if (!result.deterministic) {
    int outcome;
    if (policy.kind == MeasurePolicy::Kind::force) {
      outcome = policy.forced_outcome >= 0 ? +1 : -1;
    } else {
      if (policy.rng == nullptr) throw std::invalid_argument("sampling requires an RNG");
      outcome = ((*policy.rng)() & 1) ? +1 : -1;
    }
    for (std::size_t row = 0; row < 2 * n; ++row) {
      if (row != pivot && anticommutes(row, p)) rowsum(row, pivot);
    }
    // The old pivot stabilizer becomes the matching destabilizer and the
    // measured Pauli (with the outcome sign) replaces it.
    const std::size_t dest = pivot - n;
    for (std::size_t w = 0; w < words_; ++w) {
      xs_[dest * words_ + w] = xs_[pivot * words_ + w];
      zs_[dest * words_ + w] = zs_[pivot * words_ + w];
    }
    r_[dest] = r_[pivot];
    for (std::size_t w = 0; w < words_; ++w) {
      xs_[pivot * words_ + w] = 0;
      zs_[pivot * words_ + w] = 0;
    }
    set_bit(xs_, pivot, words_, q, p.x[static_cast<std::size_t>(q)]);
    set_bit(zs_, pivot, words_, q, p.z[static_cast<std::size_t>(q)]);
    r_[pivot] = static_cast<std::uint8_t>(outcome < 0 ? 2 : 0);
    result.outcome = outcome;
    return result;
  }

  const int expectation = pauli_expectation(p);
  if (policy.kind == MeasurePolicy::Kind::force) {
    const int forced = policy.forced_outcome >= 0 ? +1 : -1;
    if (forced != expectation) {
      throw std::runtime_error("forced measurement outcome has zero probability");
    }
  }
  result.outcome = expectation;
  return result;
}

int StabilizerTableau::pauli_expectation(const PauliString& p) const {
  if (static_cast<int>(p.x.size()) != n_ || static_cast<int>(p.z.size()) != n_) {
    throw std::invalid_argument("pauli string size mismatch");
  }
  const std::size_t n = static_cast<std::size_t>(n_);
  for (std::size_t row = n; row < 2 * n; ++row) {
    if (anticommutes(row, p)) return 0;
  }
  // Synthesize P from stabilizers: accumulate the stabilizer rows whose
  // destabilizer partners anticommute with P, using a scratch row.
  std::vector<std::uint64_t> sx(words_, 0), sz(words_, 0);
  int sr2 = 0;  // phase exponent of i, mod 4
  for (std::size_t i = 0; i < n; ++i) {
    if (!anticommutes(i, p)) continue;
    const std::size_t stab = n + i;
    // scratch *= stabilizer row `stab`
    int sum = sr2 + r_[stab];
    for (int q = 0; q < n_; ++q) {
      const int x1 = get_bit(xs_, stab, words_, q);
      const int z1 = get_bit(zs_, stab, words_, q);
      if (x1 == 0 && z1 == 0) continue;
      const int x2 = static_cast<int>((sx[word_of(q)] >> (q & 63)) & 1);
      const int z2 = static_cast<int>((sz[word_of(q)] >> (q & 63)) & 1);
      if (x1 == 1 && z1 == 1) {
        sum += z2 - x2;
      } else if (x1 == 1) {
        sum += z2 * (2 * x2 - 1);
      } else {
        sum += x2 * (1 - 2 * z2);
      }
    }
    sr2 = ((sum % 4) + 4) % 4;
    for (std::size_t w = 0; w < words_; ++w) {
      sx[w] ^= xs_[stab * words_ + w];
      sz[w] ^= zs_[stab * words_ + w];
    }
  }
  for (int q = 0; q < n_; ++q) {
    const bool px = p.x[static_cast<std::size_t>(q)];
    const bool pz = p.z[static_cast<std::size_t>(q)];
    if (static_cast<bool>((sx[word_of(q)] >> (q & 63)) & 1) != px ||
        static_cast<bool>((sz[word_of(q)] >> (q & 63)) & 1) != pz) {
      throw std::logic_error("pauli synthesis failed; tableau corrupt");
    }
  }
  if (sr2 % 2 != 0) throw std::logic_error("pauli synthesis produced imaginary phase");
  return sr2 == 0 ? +1 : -1;
}

bool StabilizerTableau::is_ground(int q) const {
  PauliString p = PauliString::identity(n_);
  p.set(q, PauliBasis::Z);
  return pauli_expectation(p) == +1;
}

bool StabilizerTableau::check_internal() const {
  const std::size_t n = static_cast<std::size_t>(n_);
  auto row_pauli = [&](std::size_t row) {
    PauliString p = PauliString::identity(n_);
    for (int q = 0; q < n_; ++q) {
      const bool x = get_bit(xs_, row, words_, q);
      const bool z = get_bit(zs_, row, words_, q);
      if (x && z) {
        p.set(q, PauliBasis::Y);
      } else if (x) {
        p.set(q, PauliBasis::X);
      } else if (z) {
        p.set(q, PauliBasis::Z);
      }
    }
    return p;
  };
  for (std::size_t i = n; i < 2 * n; ++i) {
    const auto pi = row_pauli(i);
    for (std::size_t j = n; j < 2 * n; ++j) {
      if (i != j && anticommutes(j, pi)) return false;
    }
    // destabilizer partner anticommutes, all other destabilizers commute
    for (std::size_t j = 0; j < n; ++j) {
      const bool anti = anticommutes(j, pi);
      if ((j == i - n) != anti) return false;
    }
  }
  return true;
}

std::string StabilizerTableau::stabilizer_to_string(int row) const {
  const std::size_t r = static_cast<std::size_t>(n_ + row);
  std::string out = r_[r] == 2 ? "-" : "+";
  for (int q = 0; q < n_; ++q) {
    const bool x = get_bit(xs_, r, words_, q);
    const bool z = get_bit(zs_, r, words_, q);
    out += x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }
  return out;
}

PauliString GraphStateCertificate::stabilizer_for(int vertex, int n) const {
  PauliString p = PauliString::identity(n);
  p.set(vertex, PauliBasis::X);
  for (int b : neighborhood(vertex)) p.set(b, PauliBasis::Z);
  return p;
}

std::vector<int> GraphStateCertificate::neighborhood(int vertex) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == vertex) out.push_back(b);
    if (b == vertex) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CertificateReport check_certificate(const StabilizerTableau& tab, const GraphStateCertificate& cert) {
  std::vector<bool> in_cert(static_cast<std::size_t>(tab.num_qubits()), false);
  for (int v : cert.vertices) in_cert[static_cast<std::size_t>(v)] = true;
  for (int q = 0; q < tab.num_qubits(); ++q) {
    if (!in_cert[static_cast<std::size_t>(q)] && !tab.is_ground(q)) {
      throw std::runtime_error("qubit " + std::to_string(q) +
                               " outside the certificate is not in the ground state");
    }
  }
  CertificateReport report;
  report.pass = true;
  for (int v : cert.vertices) {
    const int e = tab.pauli_expectation(cert.stabilizer_for(v, tab.num_qubits()));
    CertificateEntry entry{v, static_cast<double>(e), e == +1};
    report.pass = report.pass && entry.pass;
    report.stabilizers.push_back(entry);
  }
  return report;
}

CertificateReport check_certificate_dense(const StateVector& state, const GraphStateCertificate& cert,
                                          double tol) {
  std::vector<bool> in_cert(static_cast<std::size_t>(state.num_qubits()), false);
  for (int v : cert.vertices) in_cert[static_cast<std::size_t>(v)] = true;
  for (int q = 0; q < state.num_qubits(); ++q) {
    if (!in_cert[static_cast<std::size_t>(q)] &&
        std::abs(pauli_expectation(state, q, PauliBasis::Z) - 1.0) > tol) {
      throw std::runtime_error("qubit " + std::to_string(q) +
                               " outside the certificate is not in the ground state");
    }
  }
  CertificateReport report;
  report.pass = true;
  for (int v : cert.vertices) {
    StateVector copy = state;
    apply_instant_gate(copy, v, InstantGate::x());
    for (int b : cert.neighborhood(v)) apply_instant_gate(copy, b, InstantGate::z());
    std::complex<double> overlap{0, 0};
    for (std::size_t i = 0; i < state.dim(); ++i) {
      overlap += std::conj(state.amp(i)) * copy.amp(i);
    }
    CertificateEntry entry{v, overlap.real(), std::abs(overlap.real() - 1.0) <= tol};
    report.pass = report.pass && entry.pass;
    report.stabilizers.push_back(entry);
  }
  return report;
}

std::string certificate_report_to_json(const CertificateReport& report) {
  nlohmann::json doc;
  doc["stabilizers"] = nlohmann::json::array();
  for (const auto& entry : report.stabilizers) {
    doc["stabilizers"].push_back(
        {{"vertex", entry.vertex}, {"expectation", entry.expectation}, {"pass", entry.pass}});
  }
  doc["pass"] = report.pass;
  return doc.dump(2);
}

StateVector certificate_reference_state(const GraphStateCertificate& cert, int n) {
  std::map<int, BasisInit> assignment;
  for (int q = 0; q < n; ++q) assignment[q] = BasisInit::ground;
  for (int v : cert.vertices) assignment[v] = BasisInit::plus;
  StateVector state = init_product_state(n, assignment);
  for (const auto& [a, b] : cert.edges) {
    // CZ = diag(1,1,1,-1): phase the doubly-excited component directly.
    const std::size_t ma = std::size_t{1} << a;
    const std::size_t mb = std::size_t{1} << b;
    for (std::size_t i = 0; i < state.dim(); ++i) {
      if ((i & ma) && (i & mb)) state.amp(i) = -state.amp(i);
    }
  }
  return state;
}

}  // namespace qsim
