#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "optinstall/boundary.hpp"
#include "optinstall/oufn.hpp"
#include "optinstall/params.hpp"

namespace optinstall {

enum class Region { waiting, installing };

struct Classification {
  Region region = Region::waiting;
  bool saturated = false;  ///< y = theta, nothing left to install
};

/// Waiting iff x < F(y). At y = theta always Waiting, flagged saturated.
Classification classify(double x, double y, const FreeBoundary& fb);
Classification classify(double x, double y, const BoundaryIndex& fb);

/// Simulated trajectory on t_k = k dt_sim, k = 0..M.
///   prices[k]      X(t_k)
///   capacities[k]  Y(t_k-), capacity before the adjustment at t_k
///   increments[k]  dI(t_k) >= 0 for k < M, so capacities[k+1] = capacities[k] + increments[k]
/// The price step over [t_k, t_k+1] is driven by capacities[k+1].
struct StrategyPath {
  std::vector<double> times;
  std::vector<double> prices;
  std::vector<double> capacities;
  std::vector<double> increments;
  std::uint64_t seed = 0;
  double dt_sim = 0.0;
};

/// Installation rule evaluated at every grid time after the price is known.
class InstallationRule {
 public:
  enum class Kind { never, immediate, boundary, schedule };

  static InstallationRule never();
  /// Installs up to theta at t = 0 regardless of the price.
  static InstallationRule immediate();
  /// Raises capacity to boundary_inverse(price); jumps to theta at or above
  /// a constant boundary.
  static InstallationRule boundary(const FreeBoundary& fb);
  /// Cumulative installation I(t_k) per grid step; the last entry is held.
  static InstallationRule schedule(std::vector<double> cumulative);

  Kind kind() const { return kind_; }
  /// Capacity after the adjustment at step k.
  double target(std::size_t step, double price, double current, double y0, double theta) const;

 private:
  Kind kind_ = Kind::never;
  std::shared_ptr<const BoundaryIndex> boundary_;
  std::vector<double> schedule_;
};

enum class SimScheme {
  exact,           ///< exact O-U transition with the capacity frozen over the step
  euler_maruyama,
};

struct SimOptions {
  double horizon = 0.0;  ///< years; 0 selects ln(1e4) / rho
  double dt_sim = 1.0 / 52.0;
  std::size_t n_paths = 4000;
  std::uint64_t seed = 0;
  bool antithetic = true;
  /// Adds exp(-rho T) R(X(T), Y(T)) so the truncated integral keeps the
  /// value of holding the final capacity forever.
  bool terminal_closure = true;
  SimScheme scheme = SimScheme::exact;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  double resolved_horizon(double rho) const;
  std::size_t steps(double rho) const;
};

StrategyPath simulate_optimal(const PriceModel& model, const EconParams& econ,
                              const FreeBoundary& fb, double x0, double y0,
                              const SimOptions& options);

/// Simulates one path under an arbitrary rule, on the random stream of
/// sample 0 of payoff_mc.
StrategyPath simulate_rule(const PriceModel& model, const EconParams& econ,
                           const InstallationRule& rule, double x0, double y0,
                           const SimOptions& options);

struct PayoffEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double horizon = 0.0;
  double tail_bound = 0.0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of
///   E[ int_0^T e^{-rho t} a X(t) Y(t) dt - c sum_t e^{-rho t} dI(t) ]
/// with the revenue integral by the trapezoidal rule. With antithetic
/// variates each sample is the average of a path and its mirror, and
/// std_error is computed over the n_paths / 2 pair averages.
PayoffEstimate payoff_mc(const PriceModel& model, const EconParams& econ,
                         const InstallationRule& rule, double x0, double y0,
                         const SimOptions& options);

/// Value function of the unimpacted problem:
///   w = a (theta - y) psi(x) / ((rho+kappa) psi'(x_bar)) + R(x, y)   for x < x_bar
///   w = R(x, theta) - c (theta - y)                                  for x >= x_bar
double value_beta0(double x, double y, double x_bar, const EconParams& econ,
                   const PriceModel& model, const PsiConfig& config);

struct ComparisonReport {
  std::vector<Classification> labels;
  std::vector<double> depth_series;  ///< price - F(capacity)
  std::vector<bool> missed;
  double missed_fraction = 0.0;
  std::size_t installing_count = 0;
};

/// Labels each realized (price, capacity) against the boundary. An
/// observation is missed when it lies in the installation region below the
/// cap and the next realized capacity stays short of the optimal target
/// (theta for a constant boundary, boundary_inverse(price) for a curve); the
/// last observation has no successor and counts as not installing.
ComparisonReport compare_realized(const std::vector<double>& prices,
                                  const std::vector<double>& capacities,
                                  const FreeBoundary& fb);

struct SocialPlannerProfile {
  std::vector<double> initial_capacities;
  /// Cumulative installation I_i(t_k) per producer and grid step.
  std::vector<std::vector<double>> strategies;

  double gamma() const;
  std::vector<double> aggregate_nu() const;
  void validate(double theta) const;
};

struct SocialPayoff {
  PayoffEstimate aggregate;
  std::vector<PayoffEstimate> producers;
};

/// All producers share the price paths driven by the total capacity.
SocialPayoff aggregate_social(const SocialPlannerProfile& profile, const PriceModel& model,
                              const EconParams& econ, double x0, const SimOptions& options);

/// a_i >= b_i for all i with at least one strict inequality.
bool pareto_dominates(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace optinstall
