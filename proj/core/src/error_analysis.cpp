#include "qsim/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>

namespace qsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

double epsilon_pi2(double g, double lambda, int n_neighbors) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (g < 0.0 || n_neighbors < 0) throw std::invalid_argument("g and n must be non-negative");
  const double alpha = 0.5 * g * n_neighbors;            // Z coefficient
  const double omega = std::hypot(alpha, 0.5 * lambda);  // eigenfrequency
  const double t = kPi / (2.0 * lambda);
  // |<g| e^{-iHt} |+>|^2 = (1 + (lambda / 2 omega) sin(2 omega t)) / 2.
  const double survival = 0.5 * (1.0 + 0.5 * lambda / omega * std::sin(2.0 * omega * t));
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

double epsilon_d(double g, double t2, bool linearized) {
  if (!(g > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("g and T2 must be positive");
  const double t_cz = kPi / g;
  if (linearized) return 0.5 * t_cz / t2;
  return 0.5 * (1.0 - std::exp(-t_cz / t2));
}

ErrorBudget fidelity_model(double g, double lambda, double t2, FidelityVariant variant) {
  ErrorBudget budget;
  budget.n_pi2 = variant == FidelityVariant::switch3 ? 2 : 4;
  budget.n_d = variant == FidelityVariant::switch3 ? 3 : 15;
  budget.eps_pi2 = epsilon_pi2(g, lambda, 2);
  budget.eps_d = epsilon_d(g, t2);
  budget.t2 = t2;
  budget.t_cz = kPi / g;
  const double f = 1.0 - (budget.n_pi2 * budget.eps_pi2 + budget.n_d * budget.eps_d);
  budget.clamped = f < 0.0;
  budget.fidelity = std::clamp(f, 0.0, 1.0);
  return budget;
}

OptimalCoupling optimal_g(double lambda, double t2, FidelityVariant variant) {
  if (!(lambda > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("lambda and T2 must be positive");
  const double lo = std::log(1.0 / t2);
  const double hi = std::log(lambda);
  if (hi <= lo) {
    const double g = std::exp(lo);
    return {g, fidelity_model(g, lambda, t2, variant).fidelity, true};
  }
  auto f_of = [&](double log_g) {
    return fidelity_model(std::exp(log_g), lambda, t2, variant).fidelity;
  };

  constexpr int kGridPoints = 200;
  int best = 0;
  std::vector<double> values(kGridPoints);
  std::vector<double> xs(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    xs[i] = lo + (hi - lo) * i / (kGridPoints - 1);
    values[i] = f_of(xs[i]);
    if (values[i] > values[best]) best = i;
  }
  OptimalCoupling result;
  if (best == 0 || best == kGridPoints - 1) {
    // No interior bracket; report the grid argmax and flag it.
    result.bracket_ok = false;
    result.g_star = std::exp(xs[best]);
    result.f_star = values[best];
    return result;
  }

  // Golden-section search on log g inside the bracketing grid cells.
  constexpr double kGolden = 0.61803398874989484820;
  double a = xs[best - 1];
  double b = xs[best + 1];
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f_of(x1);
  double f2 = f_of(x2);
  while ((b - a) > 1e-6 * std::max(1.0, std::abs(b))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f_of(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f_of(x1);
    }
  }
  const double x = 0.5 * (a + b);
  result.g_star = std::exp(x);
  result.f_star = f_of(x);
  if (result.f_star < values[best]) {  // keep the grid point if it was better
    result.g_star = std::exp(xs[best]);
    result.f_star = values[best];
  }
  return result;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw std::invalid_argument("bad grid spec");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, llo + (lhi - llo) * i / (points - 1));
  }
  return grid;
}

SweepResult sweep(const std::vector<double>& lambda_grid_in, const std::vector<double>& g_grid_in,
                  double t2, FidelityVariant variant) {
  if (lambda_grid_in.empty() || g_grid_in.empty()) throw std::invalid_argument("empty sweep grid");
  auto sorted_unique = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const std::vector<double> lambda_grid = sorted_unique(lambda_grid_in);
  const std::vector<double> g_grid = sorted_unique(g_grid_in);

  struct LambdaRow {
    std::vector<SweepRow> rows;
    SweepOptimum optimum;
  };
  std::vector<std::future<LambdaRow>> futures;
  for (double lambda : lambda_grid) {
    futures.push_back(std::async(std::launch::async, [=, &g_grid]() {
      LambdaRow out;
      for (double g : g_grid) {
        const ErrorBudget budget = fidelity_model(g, lambda, t2, variant);
        out.rows.push_back({lambda * t2, g * t2, budget.eps_pi2, budget.eps_d, budget.fidelity});
      }
      const OptimalCoupling opt = optimal_g(lambda, t2, variant);
      out.optimum = {lambda * t2, opt.g_star * t2, opt.f_star};
      return out;
    }));
  }
  SweepResult result;
  for (auto& f : futures) {
    LambdaRow row = f.get();
    result.rows.insert(result.rows.end(), row.rows.begin(), row.rows.end());
    result.optima.push_back(row.optimum);
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "lambda_T2,g_T2,eps_pi2,eps_d,F\n";
  for (const auto& row : result.rows) {
    out += format_double(row.lambda_t2) + "," + format_double(row.g_t2) + "," +
           format_double(row.eps_pi2) + "," + format_double(row.eps_d) + "," +
           format_double(row.fidelity) + "\n";
  }
  return out;
}

std::string optima_to_csv(const SweepResult& result) {
  std::string out = "lambda_T2,g_star_T2,F_star\n";
  for (const auto& opt : result.optima) {
    out += format_double(opt.lambda_t2) + "," + format_double(opt.g_star_t2) + "," +
           format_double(opt.f_star) + "\n";
  }
  return out;
}

DetuningValidationReport validate_against_simulation(double g, double lambda) {
  if (!(g > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("g and lambda must be positive");
  DeviceGraph chain = build_chain(2, g);  // A - anc - C with the ancilla driven

  DetuningValidationReport report;
  for (int excited = 0; excited <= 2; ++excited) {
    std::map<int, BasisInit> assignment{{0, BasisInit::ground},
                                        {1, BasisInit::plus},
                                        {2, BasisInit::ground}};
    if (excited >= 1) assignment[0] = BasisInit::excited;
    if (excited >= 2) assignment[2] = BasisInit::excited;
    StateVector state = init_product_state(chain, assignment);
    // The feedforward-direction pi/2 pulse (|+> -> ground at zero detuning):
    // drive phase -pi/2.
    evolve_driven(state, chain, {1, lambda, -kPi / 2.0, kPi / (2.0 * lambda), 0.0});

    StateVector target = init_product_state(chain, {{0, assignment[0]},
                                                    {1, BasisInit::ground},
                                                    {2, assignment[2]}});
    const double infidelity = 1.0 - fidelity(target, state);
    DetuningValidationRow row;
    row.excited_neighbors = excited;
    row.simulated_infidelity = infidelity;
    row.analytic_epsilon = epsilon_pi2(g, lambda, excited);
    row.abs_difference = std::abs(infidelity - row.analytic_epsilon);
    report.rows.push_back(row);
  }
  report.worst_row_difference = report.rows.back().abs_difference;
  return report;
}

DephasingEstimate estimate_epsilon_d_monte_carlo(double g, double t2, int samples,
                                                 unsigned long long seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const double t_cz = kPi / g;
  std::mt19937_64 rng(seed);
  StateVector plus = init_product_state(1, {{0, BasisInit::plus}});
  int flips = 0;
  for (int s = 0; s < samples; ++s) {
    StateVector state = plus;
    apply_dephasing_interval(state, t_cz, t2, rng);
    if (fidelity(state, plus) < 0.5) ++flips;
  }
  DephasingEstimate estimate;
  estimate.samples = samples;
  estimate.estimate = static_cast<double>(flips) / samples;
  const double p = estimate.estimate;
  estimate.std_error = std::sqrt(std::max(p * (1.0 - p), 1e-12) / samples);
  return estimate;
}

}  // namespace qsim
