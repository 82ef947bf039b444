#pragma once

#include <string>
#include <string_view>

namespace optinstall {

enum class SourceKind { photovoltaic, wind };

std::string_view to_string(SourceKind kind);
SourceKind source_kind_from_string(std::string_view name);

/// Impacted Ornstein-Uhlenbeck price dynamics with a single impacting source:
///   dS = kappa * (zeta - beta * Y - S) dt + sigma dW.
/// kappa, sigma in 1/year and EUR/MWh/sqrt(year); zeta in EUR/MWh; beta in
/// EUR/MWh per MW of installed capacity.
struct PriceModel {
  double kappa = 0.0;
  double zeta = 0.0;
  double beta = 0.0;
  double sigma = 0.0;

  void validate() const;
};

/// Economic parameters of the installation problem.
struct EconParams {
  double rho = 0.0;     ///< discount rate, 1/year
  double cost_c = 0.0;  ///< installation cost, EUR per MW
  double conv_a = 0.0;  ///< effective MWh per year per MW of rated power
  double theta = 0.0;   ///< capacity cap, MW

  /// Cost per unit of effective yearly production. All boundary equations
  /// are written in terms of this normalized cost.
  double c_hat() const { return cost_c / conv_a; }

  void validate() const;
};

/// y-coefficient used in the affine profit term R-hat(x, y).
enum class RhatYCoeff {
  rho_plus_2kappa,  ///< (rho + 2 kappa), as printed in the boundary ODE
  two_kappa,        ///< 2 kappa, the plain y-derivative of R
};

/// Which fundamental solution of the resolvent equation is evaluated.
enum class PsiBranch {
  increasing,  ///< exponent +(x - zeta) sqrt(2 kappa) / sigma * t
  decreasing,  ///< exponent -(x - zeta) sqrt(2 kappa) / sigma * t, diagnostics only
};

std::string_view to_string(RhatYCoeff coeff);
RhatYCoeff rhat_y_coeff_from_string(std::string_view name);
std::string_view to_string(PsiBranch branch);

/// Record of the formula variants behind a computed number.
struct VariantTags {
  PsiBranch psi_sign = PsiBranch::increasing;
  bool c_hat_normalization = true;
  RhatYCoeff rhat_y_coeff = RhatYCoeff::rho_plus_2kappa;
};

}  // namespace optinstall
