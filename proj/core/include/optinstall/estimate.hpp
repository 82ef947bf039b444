#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "optinstall/params.hpp"

namespace optinstall {

/// Exogenous regressors keyed by source, each the same length as the price
/// series. Ordered, so photovoltaic always precedes wind in a fit.
using ExogenousSeries = std::map<SourceKind, std::vector<double>>;

struct Coefficient {
  double value = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1, "" otherwise.
std::string_view star_code(double p_value);

/// ARX(1) fit  X(n+1) = a + b X(n) + sum_i u_i Z_i(n) + delta eps(n).
struct ArxFit {
  Coefficient a;
  Coefficient b;
  std::map<SourceKind, Coefficient> u;
  double delta = 0.0;  ///< sqrt(SSR / (n - k))
  double delta_std_error = 0.0;
  /// Covariance of (a, b, u...) in that order, row-major k x k.
  std::vector<double> covariance;
  std::vector<double> raw_residuals;  ///< EUR/MWh
  std::vector<double> residuals;      ///< raw_residuals / delta (zeros when delta = 0)
  std::size_t n_obs = 0;              ///< length of the price series
  std::size_t n_params = 0;

  std::size_t dof() const { return n_obs - 1 - n_params; }
  double cov(std::size_t i, std::size_t j) const { return covariance[i * n_params + j]; }
};

/// Ordinary least squares with classical covariance and two-sided t-test
/// p-values. Throws InputError on too few observations and NumericalError on a
/// rank-deficient design.
ArxFit fit_arx1(const std::vector<double>& price, const ExogenousSeries& exogenous = {});

struct BoxPierceResult {
  double statistic = 0.0;
  std::size_t lags = 0;
  double p_value = 1.0;
};

/// Q = n sum_{k<=h} r_k^2 against chi-squared(h). With `ljung_box` the
/// small-sample weights (n+2)/(n-k) are applied.
BoxPierceResult box_pierce(const std::vector<double>& residuals, std::size_t lags = 10,
                           bool ljung_box = false);

/// Continuous parameters with one impact slope per source.
struct OuParams {
  double kappa = 0.0;
  double zeta = 0.0;
  std::map<SourceKind, double> beta;
  double sigma = 0.0;

  /// Single-source price model; a missing source has beta = 0.
  PriceModel model(SourceKind impact_source) const;
};

struct ArxCoefficients {
  double a = 0.0;
  double b = 0.0;
  std::map<SourceKind, double> u;
  double delta = 0.0;
};

ArxCoefficients coefficients(const ArxFit& fit);

/// Exact discretization: b = exp(-kappa dt), a = zeta (1-b), u_i = -beta_i (1-b),
/// delta = sigma sqrt((1-b^2) / (2 kappa)).
ArxCoefficients to_discrete(const OuParams& ou, double dt_years);

/// Inverse map. Throws NumericalError for b >= 1 or b <= 0.
OuParams to_continuous(const ArxCoefficients& coeffs, double dt_years);
OuParams to_continuous(const ArxFit& fit, double dt_years);

struct OuStdErrors {
  double kappa = 0.0;
  double zeta = 0.0;
  std::map<SourceKind, double> beta;
  double sigma = 0.0;
};

/// First-order propagation of the OLS covariance through the inverse map.
/// delta is treated as independent of the coefficients with
/// se(delta) = delta / sqrt(2 (n - k)).
OuStdErrors delta_method_se(const ArxFit& fit, double dt_years);

struct RefitResult {
  ArxFit full;
  ArxFit restricted;
  std::vector<SourceKind> retained;
};

/// Fits the full model, drops every exogenous regressor with p >= alpha and
/// refits on the rest.
RefitResult significance_refit(const std::vector<double>& price,
                               const ExogenousSeries& exogenous, double alpha = 0.05);

/// Simulates X(n+1) = a + b X(n) + sum u_i Z_i(n) + delta eps(n) for n + 1
/// points using a seeded generator. Each exogenous series needs >= n entries.
std::vector<double> simulate_arx1(const ArxCoefficients& coeffs, double x0,
                                  const ExogenousSeries& exogenous, std::size_t n_points,
                                  std::uint64_t seed);

}  // namespace optinstall
