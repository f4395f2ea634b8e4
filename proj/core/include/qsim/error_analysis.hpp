#pragma once

#include <string>
#include <vector>

#include "qsim/device.hpp"
#include "qsim/statevector.hpp"

namespace qsim {

/// Detuning error of a pi/2 pulse when all n neighbors of the driven qubit
/// are excited: 1 - |<ground| exp(-i H t) |+>|^2 for
/// H = (g n / 2) Z + (lambda / 2) Y and t = pi / (2 lambda), evaluated in
/// closed form and clamped to [0, 1].
double epsilon_pi2(double g, double lambda, int n_neighbors);

/// Per-qubit dephasing error over one controlled-phase duration
/// T_CZ = pi / g: exact (1 - e^{-T_CZ/T2})/2 or its first-order Taylor form
/// T_CZ / (2 T2).
double epsilon_d(double g, double t2, bool linearized = false);

enum class FidelityVariant { switch3, chain5 };

struct ErrorBudget {
  double eps_pi2 = 0.0;
  double eps_d = 0.0;
  int n_pi2 = 0;
  int n_d = 0;
  double fidelity = 0.0;  // clamped to [0, 1]
  bool clamped = false;   // true when the linear budget went negative
  double t2 = 0.0;
  double t_cz = 0.0;
};

/// Achievable-fidelity budget F = 1 - (n_pi2 eps_pi2 + n_d eps_d):
/// switch3 charges 2 detuned rotations and 3 qubit-durations of dephasing,
/// chain5 charges 4 and 15.  Both evaluate eps_pi2 at two excited neighbors.
ErrorBudget fidelity_model(double g, double lambda, double t2, FidelityVariant variant);

struct OptimalCoupling {
  double g_star = 0.0;
  double f_star = 0.0;
  bool bracket_ok = true;  // false: non-unimodal bracket, grid argmax returned
};

/// Maximizes F over g in [1/T2, lambda]: a 200-point log-grid bracket
/// followed by golden-section search on log g (relative tolerance 1e-6).
OptimalCoupling optimal_g(double lambda, double t2, FidelityVariant variant);

struct SweepRow {
  double lambda_t2 = 0.0;
  double g_t2 = 0.0;
  double eps_pi2 = 0.0;
  double eps_d = 0.0;
  double fidelity = 0.0;
};

struct SweepOptimum {
  double lambda_t2 = 0.0;
  double g_star_t2 = 0.0;
  double f_star = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;       // sorted by (lambda_T2, g_T2)
  std::vector<SweepOptimum> optima; // per-lambda optimum from optimal_g
};

/// Full Cartesian evaluation plus the per-lambda optimum; deterministic.
/// Lambda rows are evaluated in parallel and merged in order.
SweepResult sweep(const std::vector<double>& lambda_grid, const std::vector<double>& g_grid,
                  double t2, FidelityVariant variant);

std::vector<double> log_grid(double lo, double hi, int points);

/// CSV with header lambda_T2,g_T2,eps_pi2,eps_d,F at float64 round-trip
/// precision.
std::string sweep_to_csv(const SweepResult& result);
/// CSV with header lambda_T2,g_star_T2,F_star.
std::string optima_to_csv(const SweepResult& result);

struct DetuningValidationRow {
  int excited_neighbors = 0;
  double simulated_infidelity = 0.0;
  double analytic_epsilon = 0.0;
  double abs_difference = 0.0;
};

struct DetuningValidationReport {
  std::vector<DetuningValidationRow> rows;  // neighbor configurations 0, 1, 2
  double worst_row_difference = 0.0;
};

/// Runs the physical-mode pi/2 pulse on the middle qubit of a 3-chain with
/// the outer qubits forced to each neighbor configuration in the dense
/// engine and compares the simulated infidelity with the analytic formula.
DetuningValidationReport validate_against_simulation(double g, double lambda);

struct DephasingEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Monte Carlo dephasing-trajectory estimate of the per-qubit error over one
/// controlled-phase duration; validates the analytic epsilon_d.
DephasingEstimate estimate_epsilon_d_monte_carlo(double g, double t2, int samples,
                                                 unsigned long long seed);

}  // namespace qsim
