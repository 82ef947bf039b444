#pragma once

#include <cstddef>
#include <vector>

#include "optinstall/oufn.hpp"
#include "optinstall/params.hpp"

namespace optinstall {

enum class BoundaryKind { constant, curve };

/// Marching scheme for the free-boundary ODE, integrated from y = theta
/// down to y = 0.
enum class OdeScheme {
  /// Explicit Euler on a uniform grid. A grid step is split into 2^k equal
  /// sub-steps wherever a full step would cross D = 0 or change the
  /// right-hand side by more than `substep_rhs_change`.
  explicit_euler,
  /// Implicit Euler, for stiffness diagnostics.
  implicit_euler,
};

/**
 * Tabulated free boundary F separating the waiting region (x < F(y)) from
 * the installation region (x >= F(y)), together with F-hat(y) = F(y) + beta y.
 */
struct FreeBoundary {
  BoundaryKind kind = BoundaryKind::constant;
  std::vector<double> y_grid;       ///< increasing, from 0 to theta
  std::vector<double> f_values;     ///< F(y), EUR/MWh
  std::vector<double> fhat_values;  ///< F(y) + beta y
  double terminal_x = 0.0;          ///< F-hat(theta)
  double step_h = 0.0;
  double beta = 0.0;
  VariantTags variant_tags;
  std::size_t max_substeps = 1;  ///< largest sub-step split used by the integrator

  double theta() const { return y_grid.back(); }
  bool is_nondecreasing() const;
  void validate() const;  ///< throws NumericalError on an invariant breach
};

struct BracketInterval {
  double lo = 0.0;
  double hi = 0.0;
  int widenings = 0;
};

struct BoundaryOptions {
  double tol = 1e-6;  ///< bisection stops when the bracket and the residual are both within tol
  RhatYCoeff rhat_y_coeff = RhatYCoeff::rho_plus_2kappa;
  OdeScheme scheme = OdeScheme::explicit_euler;
  int max_widenings = 60;
  int max_substep_halvings = 20;
  double substep_rhs_change = 0.1;
};

struct RootSolution {
  double x = 0.0;
  double residual = 0.0;  ///< target function at x
  BracketInterval bracket;
  int iterations = 0;
};

/// Scale-free form of the terminal condition:
///   c_hat - R-hat_1(x, theta) + psi(x) / ((rho + kappa) psi'(x)).
/// Strictly decreasing in x; for beta = 0 it equals H(x) / (rho + kappa).
double terminal_target(double x, const EconParams& econ, const PriceModel& model,
                       const PsiConfig& config, RhatYCoeff y_coeff);

/// Root bracket (c_bar, c_bar + psi(c_bar)/psi'(c_bar)) with
/// c_bar = c_hat (rho+kappa) - (zeta kappa - beta k_y theta) / rho,
/// widened geometrically if the target does not change sign across it.
BracketInterval bracket(const EconParams& econ, const PriceModel& model,
                        const PsiConfig& config, const BoundaryOptions& options = {});

/// Root of H by bisection. Requires beta = 0.
RootSolution solve_constant_boundary(const EconParams& econ, const PriceModel& model,
                                     const PsiConfig& config,
                                     const BoundaryOptions& options = {});

/// Terminal value x-hat = F-hat(theta) by bisection on terminal_target.
RootSolution solve_terminal(const EconParams& econ, const PriceModel& model,
                            const PsiConfig& config, const BoundaryOptions& options = {});

/// Boundary F(y) = x_bar on [0, theta].
FreeBoundary constant_boundary(double x_bar, double theta, const BoundaryOptions& options = {});

/**
 * Integrates F-hat'(y) = beta N/D from F-hat(theta) = x-hat down to y = 0 on a
 * uniform grid of spacing step_h (the last step is shortened to land on 0).
 * For beta = 0 the right-hand side vanishes and the result is the constant
 * boundary x-hat sampled on the same grid.
 */
FreeBoundary integrate_free_boundary(const EconParams& econ, const PriceModel& model,
                                     const PsiConfig& config, double step_h,
                                     const BoundaryOptions& options = {});

/// F(y) by linear interpolation on the grid.
double boundary_value(const FreeBoundary& fb, double y);

/// Smallest y in [0, theta] with F(y) >= price: 0 when price <= F(0), theta
/// when price > F(theta). Throws NumericalError if F is not monotone.
double boundary_inverse(const FreeBoundary& fb, double price);

/// Validated view of a boundary for repeated lookups inside simulations.
class BoundaryIndex {
 public:
  explicit BoundaryIndex(const FreeBoundary& fb);

  double value(double y) const;
  double inverse(double price) const;
  double theta() const { return y_.back(); }
  bool is_constant() const { return constant_; }

 private:
  std::vector<double> y_;
  std::vector<double> f_;
  bool constant_ = false;
};

}  // namespace optinstall
