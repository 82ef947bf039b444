#include "optinstall/estimate.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <random>
#include <string>

#include "optinstall/error.hpp"

namespace optinstall {

namespace {

double two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return 1.0;
  const boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Coefficient make_coefficient(double value, double variance, double dof) {
  Coefficient c;
  c.value = value;
  c.std_error = std::sqrt(std::max(variance, 0.0));
  if (c.std_error > 0.0) {
    c.t_stat = value / c.std_error;
  } else {
    c.t_stat = value == 0.0 ? 0.0 : std::copysign(INFINITY, value);
  }
  c.p_value = two_sided_p(c.t_stat, dof);
  return c;
}

}  // namespace

std::string_view star_code(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

ArxFit fit_arx1(const std::vector<double>& price, const ExogenousSeries& exogenous) {
  const std::size_t N = price.size();
  const std::size_t k = 2 + exogenous.size();
  if (N < k + 2)
    throw InputError("insufficient observations: " + std::to_string(N) + " prices for " +
                     std::to_string(k) + " regressors");
  for (const auto& [kind, series] : exogenous)
    if (series.size() != N)
      throw InputError("exogenous series '" + std::string(to_string(kind)) +
                       "' length differs from price series");
  for (double x : price)
    if (!std::isfinite(x)) throw InputError("price series contains non-finite values");

  const auto n = static_cast<Eigen::Index>(N - 1);
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(k));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = price[static_cast<std::size_t>(i)];
    Eigen::Index col = 2;
    for (const auto& [kind, series] : exogenous) X(i, col++) = series[static_cast<std::size_t>(i)];
    y(i) = price[static_cast<std::size_t>(i) + 1];
  }

  // Unit-norm columns so the rank test does not depend on units.
  Eigen::VectorXd scale = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale(j) == 0.0) throw NumericalError("rank-deficient design: all-zero regressor");
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(k))
    throw NumericalError("rank-deficient design (rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(k) + ")");
  const Eigen::VectorXd beta = qr.solve(y).cwiseQuotient(scale);
  const Eigen::VectorXd resid = y - X * beta;

  ArxFit fit;
  fit.n_obs = N;
  fit.n_params = k;
  const double dof = static_cast<double>(fit.dof());
  const double ssr = resid.squaredNorm();
  fit.delta = std::sqrt(ssr / dof);
  fit.delta_std_error = fit.delta / std::sqrt(2.0 * dof);

  const Eigen::MatrixXd gram = Xs.transpose() * Xs;
  const Eigen::MatrixXd inv_scaled = gram.ldlt().solve(Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
  const Eigen::MatrixXd cov = fit.delta * fit.delta * scale.cwiseInverse().asDiagonal() *
                              inv_scaled * scale.cwiseInverse().asDiagonal();
  fit.covariance.resize(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      fit.covariance[i * k + j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  fit.a = make_coefficient(beta(0), cov(0, 0), dof);
  fit.b = make_coefficient(beta(1), cov(1, 1), dof);
  Eigen::Index col = 2;
  for (const auto& [kind, series] : exogenous) {
    fit.u[kind] = make_coefficient(beta(col), cov(col, col), dof);
    ++col;
  }
  fit.raw_residuals.assign(resid.data(), resid.data() + resid.size());
  fit.residuals.resize(fit.raw_residuals.size(), 0.0);
  if (fit.delta > 0.0)
    for (std::size_t i = 0; i < fit.residuals.size(); ++i)
      fit.residuals[i] = fit.raw_residuals[i] / fit.delta;
  return fit;
}

BoxPierceResult box_pierce(const std::vector<double>& residuals, std::size_t lags,
                           bool ljung_box) {
  const std::size_t n = residuals.size();
  if (lags < 1) throw InputError("box_pierce: lags must be at least 1");
  if (lags >= n)
    throw InputError("box_pierce: lags (" + std::to_string(lags) +
                     ") must be smaller than the residual count (" + std::to_string(n) + ")");
  double mean = 0.0;
  for (double e : residuals) mean += e;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double e : residuals) denom += (e - mean) * (e - mean);
  if (!(denom > 0.0))
    throw InputError("box_pierce: residuals have zero variance, autocorrelation undefined");

  const double nn = static_cast<double>(n);
  double q = 0.0;
  for (std::size_t k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < n; ++t) num += (residuals[t] - mean) * (residuals[t - k] - mean);
    const double r = num / denom;
    q += ljung_box ? r * r * (nn + 2.0) / (nn - static_cast<double>(k)) : r * r;
  }
  BoxPierceResult out;
  out.statistic = nn * q;
  out.lags = lags;
  const boost::math::chi_squared dist(static_cast<double>(lags));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

PriceModel OuParams::model(SourceKind impact_source) const {
  PriceModel m;
  m.kappa = kappa;
  m.zeta = zeta;
  m.sigma = sigma;
  const auto it = beta.find(impact_source);
  m.beta = it == beta.end() ? 0.0 : it->second;
  return m;
}

ArxCoefficients coefficients(const ArxFit& fit) {
  ArxCoefficients c;
  c.a = fit.a.value;
  c.b = fit.b.value;
  for (const auto& [kind, coef] : fit.u) c.u[kind] = coef.value;
  c.delta = fit.delta;
  return c;
}

ArxCoefficients to_discrete(const OuParams& ou, double dt) {
  if (!(dt > 0.0)) throw InputError("dt_years must be positive");
  if (!(ou.kappa > 0.0)) throw InputError("kappa must be positive");
  ArxCoefficients c;
  c.b = std::exp(-ou.kappa * dt);
  const double one_minus_b = -std::expm1(-ou.kappa * dt);
  c.a = ou.zeta * one_minus_b;
  for (const auto& [kind, beta] : ou.beta) c.u[kind] = -beta * one_minus_b;
  c.delta = ou.sigma * std::sqrt(-std::expm1(-2.0 * ou.kappa * dt) / (2.0 * ou.kappa));
  return c;
}

OuParams to_continuous(const ArxCoefficients& c, double dt) {
  if (!(dt > 0.0)) throw InputError("dt_years must be positive");
  if (!(c.b < 1.0))
    throw NumericalError("no mean reversion: lag coefficient b = " + std::to_string(c.b) +
                         " >= 1");
  if (!(c.b > 0.0))
    throw NumericalError("lag coefficient b = " + std::to_string(c.b) +
                         " <= 0 lies outside the mean-reverting model class");
  OuParams ou;
  ou.kappa = -std::log(c.b) / dt;
  const double one_minus_b = 1.0 - c.b;
  ou.zeta = c.a / one_minus_b;
  for (const auto& [kind, u] : c.u) ou.beta[kind] = -u / one_minus_b;
  ou.sigma = c.delta * std::sqrt(2.0 * ou.kappa / (1.0 - c.b * c.b));
  return ou;
}

OuParams to_continuous(const ArxFit& fit, double dt) { return to_continuous(coefficients(fit), dt); }

OuStdErrors delta_method_se(const ArxFit& fit, double dt) {
  const OuParams ou = to_continuous(fit, dt);
  const double b = fit.b.value;
  const double a = fit.a.value;
  const double omb = 1.0 - b;
  const std::size_t k = fit.n_params;

  auto propagate = [&](const std::vector<double>& grad) {
    double var = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) var += grad[i] * fit.cov(i, j) * grad[j];
    return std::sqrt(std::max(var, 0.0));
  };

  OuStdErrors se;
  std::vector<double> g(k, 0.0);
  g[1] = -1.0 / (b * dt);
  se.kappa = propagate(g);

  std::fill(g.begin(), g.end(), 0.0);
  g[0] = 1.0 / omb;
  g[1] = a / (omb * omb);
  se.zeta = propagate(g);

  std::size_t col = 2;
  for (const auto& [kind, coef] : fit.u) {
    std::fill(g.begin(), g.end(), 0.0);
    g[1] = -coef.value / (omb * omb);
    g[col] = -1.0 / omb;
    se.beta[kind] = propagate(g);
    ++col;
  }

  // sigma = delta * sqrt(2 kappa(b) / (1 - b^2))
  const double dkappa_db = -1.0 / (b * dt);
  const double dsigma_db = 0.5 * ou.sigma * (dkappa_db / ou.kappa + 2.0 * b / (1.0 - b * b));
  const double dsigma_ddelta = fit.delta > 0.0 ? ou.sigma / fit.delta
                                               : std::sqrt(2.0 * ou.kappa / (1.0 - b * b));
  se.sigma = std::sqrt(dsigma_db * dsigma_db * fit.cov(1, 1) +
                       dsigma_ddelta * dsigma_ddelta * fit.delta_std_error * fit.delta_std_error);
  return se;
}

RefitResult significance_refit(const std::vector<double>& price,
                               const ExogenousSeries& exogenous, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  RefitResult out;
  out.full = fit_arx1(price, exogenous);
  ExogenousSeries kept;
  for (const auto& [kind, coef] : out.full.u) {
    if (coef.p_value < alpha) {
      kept.emplace(kind, exogenous.at(kind));
      out.retained.push_back(kind);
    }
  }
  out.restricted = kept.size() == exogenous.size() ? out.full : fit_arx1(price, kept);
  return out;
}

std::vector<double> simulate_arx1(const ArxCoefficients& c, double x0,
                                  const ExogenousSeries& exogenous, std::size_t n_points,
                                  std::uint64_t seed) {
  if (n_points == 0) return {};
  for (const auto& [kind, u] : c.u) {
    const auto it = exogenous.find(kind);
    if (it == exogenous.end() || it->second.size() + 1 < n_points)
      throw InputError("simulate_arx1: exogenous series '" + std::string(to_string(kind)) +
                       "' missing or too short");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n_points);
  x[0] = x0;
  for (std::size_t n = 0; n + 1 < n_points; ++n) {
    double next = c.a + c.b * x[n];
    for (const auto& [kind, u] : c.u) next += u * exogenous.at(kind)[n];
    x[n + 1] = next + c.delta * normal(gen);
  }
  return x;
}

}  // namespace optinstall
