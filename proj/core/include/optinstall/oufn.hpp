#pragma once

#include <array>
#include <cstddef>

#include "optinstall/params.hpp"

namespace optinstall {

/**
 * Configuration of the fundamental-solution evaluator.
 *
 * psi(x) = 1/Gamma(rho/kappa) * int_0^inf t^(rho/kappa - 1)
 *          * exp(-t^2/2 + (x - zeta) sqrt(2 kappa)/sigma * t) dt
 *
 * is the positive, strictly increasing solution of
 * (sigma^2/2) u'' + kappa (zeta - x) u' - rho u = 0.
 */
struct PsiConfig {
  double rho = 0.0;
  double kappa = 0.0;
  double zeta = 0.0;
  double sigma = 0.0;
  double quad_rel_tol = 1e-12;
  std::size_t quad_max_nodes = 200000;
  PsiBranch branch = PsiBranch::increasing;

  static PsiConfig from(const PriceModel& model, const EconParams& econ,
                        double quad_rel_tol = 1e-12);

  void validate() const;
};

/**
 * psi and its first three derivatives at one point, stored as
 * psi^(n)(x) = exp(log_scale) * scaled[n].
 *
 * All four integrals share the same exponential weight and the same scale
 * factor, so ratios such as psi'/psi never see the scale and stay finite for
 * prices far above zeta where psi itself overflows.
 */
struct PsiMoments {
  double log_scale = 0.0;
  std::array<double, 4> scaled{};

  /// psi^(n)(x); throws NumericalError when the value overflows a double.
  double value(int order) const;
  /// log |psi^(n)(x)|.
  double log_value(int order) const;
  /// psi^(n)(x) / psi^(m)(x).
  double ratio(int n, int m) const { return scaled[n] / scaled[m]; }
};

/// Evaluates psi^(n) for n = 0..max_order by adaptive quadrature.
PsiMoments psi_moments(double x, const PsiConfig& config, int max_order = 3);

/// psi^(order)(x), order in {0, 1, 2, 3}.
double psi(double x, int order, const PsiConfig& config);

/// psi(zeta) in closed form: 2^(q/2 - 1) Gamma(q/2) / Gamma(q), q = rho/kappa.
double psi_at_mean_closed_form(const PsiConfig& config);

/**
 * Expected discounted revenue of never installing, starting from price x and
 * capacity y:
 *   R(x, y) = a x y/(rho+kappa) + a zeta kappa y/(rho(rho+kappa))
 *             [- a kappa beta y^2/(rho(rho+kappa)) when impacted].
 */
double r_baseline(double x, double y, const EconParams& econ,
                  const PriceModel& model, bool impacted);

/// R-hat(x, y) = a (zeta kappa + rho x - beta k_y y) / (rho (rho+kappa)).
double r_hat(double x, double y, const EconParams& econ,
             const PriceModel& model, RhatYCoeff y_coeff);

/// R-hat with a = 1, the form used inside the boundary equations together
/// with c_hat = c / a.
double r_hat_unit(double x, double y, const EconParams& econ,
                  const PriceModel& model, RhatYCoeff y_coeff);

/// H(x) = c_hat (rho+kappa) - zeta kappa/rho + psi(x)/psi'(x) - x.
/// Its unique root is the constant free boundary of the unimpacted problem.
double h_eval(double x, const EconParams& econ, const PriceModel& model,
              const PsiConfig& config);

/// Numerator and denominator of the free-boundary ODE at (y, x), both divided
/// by psi(x)^3.
struct OdeTerms {
  double numerator = 0.0;
  double denominator = 0.0;
};

OdeTerms ode_terms(double y, double x, const EconParams& econ,
                   const PriceModel& model, const PsiConfig& config,
                   RhatYCoeff y_coeff);

/// beta * N(y, fhat) / D(y, fhat). Throws NumericalError when |D| is
/// within 1e-12 of zero.
double ode_rhs(double y, double fhat, const EconParams& econ,
               const PriceModel& model, const PsiConfig& config,
               RhatYCoeff y_coeff);

}  // namespace optinstall
