#include "optinstall/params.hpp"

#include <cmath>
#include <string>

#include "optinstall/error.hpp"

namespace optinstall {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::photovoltaic:
      return "photovoltaic";
    case SourceKind::wind:
      return "wind";
  }
  return "unknown";
}

SourceKind source_kind_from_string(std::string_view name) {
  if (name == "photovoltaic" || name == "pv") return SourceKind::photovoltaic;
  if (name == "wind") return SourceKind::wind;
  throw InputError("unknown source kind '" + std::string(name) + "'");
}

std::string_view to_string(RhatYCoeff coeff) {
  switch (coeff) {
    case RhatYCoeff::rho_plus_2kappa:
      return "rho_plus_2kappa";
    case RhatYCoeff::two_kappa:
      return "two_kappa";
  }
  return "unknown";
}

RhatYCoeff rhat_y_coeff_from_string(std::string_view name) {
  if (name == "rho_plus_2kappa") return RhatYCoeff::rho_plus_2kappa;
  if (name == "two_kappa") return RhatYCoeff::two_kappa;
  throw InputError("unknown rhat_y_coeff variant '" + std::string(name) +
                   "' (expected rho_plus_2kappa or two_kappa)");
}

std::string_view to_string(PsiBranch branch) {
  switch (branch) {
    case PsiBranch::increasing:
      return "increasing";
    case PsiBranch::decreasing:
      return "decreasing";
  }
  return "unknown";
}

void PriceModel::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw InputError("kappa must be positive and finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InputError("sigma must be positive and finite");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw InputError("beta must be nonnegative and finite");
  if (!std::isfinite(zeta)) throw InputError("zeta must be finite");
}

void EconParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(rho)) throw InputError("rho must be positive");
  if (!positive(cost_c)) throw InputError("cost c must be positive");
  if (!positive(conv_a)) throw InputError("conversion factor a must be positive");
  if (!positive(theta)) throw InputError("capacity cap theta must be positive");
}

}  // namespace optinstall
