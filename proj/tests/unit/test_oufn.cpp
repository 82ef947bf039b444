#include <gtest/gtest.h>

#include <cmath>

#include "optinstall/error.hpp"
#include "optinstall/oufn.hpp"
#include "zones.hpp"

using namespace optinstall;
using namespace optinstall::testing;

namespace {

PsiConfig config_of(const ZoneCase& z) { return PsiConfig::from(z.model, z.econ); }

double sd_of(const PriceModel& m) { return m.sigma / std::sqrt(2.0 * m.kappa); }

// psi^(n)(x) = 1/Gamma(q) int t^(q-1) (u t)^n exp(-t^2/2 + u (x - zeta) t) dt
// with t = s^(1/q), which turns t^(q-1) dt into ds / q, by composite Simpson.
double psi_oracle(double x, int order, const PriceModel& m, double rho) {
  const double q = rho / m.kappa;
  const double u = std::sqrt(2.0 * m.kappa) / m.sigma;
  const double c = u * (x - m.zeta);
  const double t_max = std::max(c, 0.0) + 12.0;
  const double s_max = std::pow(t_max, q);
  const int n = 400000;
  const double h = s_max / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = std::pow(i * h, 1.0 / q);
    const double f = std::pow(u * t, order) * std::exp(-0.5 * t * t + c * t);
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return sum * h / 3.0 / (q * std::tgamma(q));
}

}  // namespace

TEST(Psi, ClosedFormAtMean) {
  for (const auto& z : all_zones()) {
    const double q = z.econ.rho / z.model.kappa;
    const double expected =
        std::pow(2.0, q / 2.0 - 1.0) * std::tgamma(q / 2.0) / std::tgamma(q);
    EXPECT_NEAR(psi(z.model.zeta, 0, config_of(z)) / expected, 1.0, 1e-10) << z.name;
    EXPECT_NEAR(psi_at_mean_closed_form(config_of(z)) / expected, 1.0, 1e-12) << z.name;
  }
}

TEST(Psi, MatchesDirectQuadrature) {
  for (const auto& z : all_zones()) {
    for (double k : {-2.0, 0.5, 3.0}) {
      const double x = z.model.zeta + k * sd_of(z.model);
      for (int order : {0, 1, 2}) {
        const double want = psi_oracle(x, order, z.model, z.econ.rho);
        EXPECT_NEAR(psi(x, order, config_of(z)) / want, 1.0, 1e-6)
            << z.name << " x=" << x << " order " << order;
      }
    }
  }
}

TEST(Psi, PositiveIncreasingConvex) {
  for (const auto& z : all_zones()) {
    const auto cfg = config_of(z);
    double prev = 0.0;
    for (int i = 0; i < 40; ++i) {
      const double x = z.model.zeta + sd_of(z.model) * (-6.0 + 0.3 * i);
      const auto m = psi_moments(x, cfg);
      ASSERT_GT(m.value(0), prev);
      ASSERT_GT(m.value(1), 0.0);
      ASSERT_GT(m.value(2), 0.0);
      ASSERT_GT(m.value(3), 0.0);
      // Log-convexity inequality psi psi'' > psi'^2.
      ASSERT_GT(m.ratio(2, 0), m.ratio(1, 0) * m.ratio(1, 0));
      prev = m.value(0);
    }
  }
}

TEST(Psi, ResolventEquation) {
  const auto z = sardinia();
  const auto cfg = config_of(z);
  for (double k : {-5.0, -1.0, 0.0, 2.0, 5.0}) {
    const double x = z.model.zeta + k * sd_of(z.model);
    const auto m = psi_moments(x, cfg, 2);
    const double r = 0.5 * z.model.sigma * z.model.sigma * m.ratio(2, 0) +
                     z.model.kappa * (z.model.zeta - x) * m.ratio(1, 0) - z.econ.rho;
    EXPECT_LT(std::abs(r) / z.econ.rho, 1e-8) << x;
  }
}

TEST(Psi, LogDomainFarAboveMean) {
  const auto z = north();
  const auto cfg = config_of(z);
  const double x = 1e5;
  const auto m = psi_moments(x, cfg);
  EXPECT_THROW(m.value(0), NumericalError);
  EXPECT_TRUE(std::isfinite(m.log_value(0)));
  const double u = std::sqrt(2.0 * z.model.kappa) / z.model.sigma;
  // Laplace approximation of the ratio at a sharp peak t* ~ u (x - zeta).
  EXPECT_NEAR(m.ratio(1, 0) / (u * u * (x - z.model.zeta)), 1.0, 1e-3);
}

TEST(Psi, DecreasingBranch) {
  auto cfg = config_of(north());
  cfg.branch = PsiBranch::decreasing;
  EXPECT_GT(psi(100.0, 0, cfg), psi(120.0, 0, cfg));
  EXPECT_LT(psi(100.0, 1, cfg), 0.0);
}

TEST(Psi, ConfigValidation) {
  auto cfg = config_of(north());
  cfg.rho = 0.0;
  EXPECT_THROW(psi(1.0, 0, cfg), InputError);
  cfg = config_of(north());
  cfg.quad_rel_tol = 0.1;
  EXPECT_THROW(psi(1.0, 0, cfg), InputError);
  cfg = config_of(north());
  EXPECT_THROW(psi(1.0, 4, cfg), InputError);
}

TEST(Revenue, Baseline) {
  const auto z = north();
  EXPECT_EQ(r_baseline(80.0, 0.0, z.econ, z.model, true), 0.0);
  auto cn = central_north();
  EXPECT_EQ(r_baseline(40.0, 300.0, cn.econ, cn.model, true),
            r_baseline(40.0, 300.0, cn.econ, cn.model, false));
  const double a = 1400, rho = 0.1, k = 6.7, zeta = 124.7, beta = 0.0091;
  const double x = 50, y = 1000;
  const double expected = a * x * y / (rho + k) + a * zeta * k * y / (rho * (rho + k)) -
                          a * k * beta * y * y / (rho * (rho + k));
  EXPECT_NEAR(r_baseline(x, y, z.econ, z.model, true), expected, 1e-9 * expected);
}

TEST(Revenue, AffineProfitTerm) {
  auto cn = central_north();
  EXPECT_EQ(r_hat(30.0, 0.0, cn.econ, cn.model, RhatYCoeff::rho_plus_2kappa),
            r_hat(30.0, 5000.0, cn.econ, cn.model, RhatYCoeff::rho_plus_2kappa));
  const auto z = north();
  const double slope = r_hat(11.0, 100.0, z.econ, z.model, RhatYCoeff::two_kappa) -
                       r_hat(10.0, 100.0, z.econ, z.model, RhatYCoeff::two_kappa);
  EXPECT_NEAR(slope, z.econ.conv_a / (z.econ.rho + z.model.kappa), 1e-6);
  const double x = 500.0, th = 6500.0;
  const double by_hand = (124.7 * 6.7 + 0.1 * x - 0.0091 * (0.1 + 2 * 6.7) * th) / (0.1 * 6.8);
  EXPECT_NEAR(r_hat_unit(x, th, z.econ, z.model, RhatYCoeff::rho_plus_2kappa), by_hand, 1e-9);
  const double two_k = (124.7 * 6.7 + 0.1 * x - 0.0091 * (2 * 6.7) * th) / (0.1 * 6.8);
  EXPECT_NEAR(r_hat_unit(x, th, z.econ, z.model, RhatYCoeff::two_kappa), two_k, 1e-9);
}

TEST(H, DecreasingAndPositiveBelowThreshold) {
  const auto z = central_north();
  const auto cfg = config_of(z);
  const double c_bar =
      z.econ.c_hat() * (z.econ.rho + z.model.kappa) - z.model.zeta * z.model.kappa / z.econ.rho;
  double prev = INFINITY;
  for (int i = 0; i < 60; ++i) {
    const double x = -200.0 + 10.0 * i;
    const double h = h_eval(x, z.econ, z.model, cfg);
    ASSERT_LT(h, prev) << x;
    prev = h;
  }
  for (double x : {c_bar, c_bar - 10.0, c_bar - 500.0})
    EXPECT_GT(h_eval(x, z.econ, z.model, cfg), 0.0);
  EXPECT_LT(std::abs(h_eval(kCentralNorthBar, z.econ, z.model, cfg)), 0.1);
}

TEST(OdeRhs, ZeroWithoutImpact) {
  const auto z = central_north();
  for (double y : {0.0, 100.0, 6500.0})
    for (double x : {-50.0, 29.0, 300.0})
      EXPECT_EQ(ode_rhs(y, x, z.econ, z.model, config_of(z), RhatYCoeff::rho_plus_2kappa), 0.0);
}

TEST(OdeRhs, MatchesTermsAtTerminalState) {
  const auto z = north();
  const auto cfg = config_of(z);
  const double x = 1039.1072;
  const auto t = ode_terms(z.econ.theta, x, z.econ, z.model, cfg, RhatYCoeff::rho_plus_2kappa);
  const double rhs = ode_rhs(z.econ.theta, x, z.econ, z.model, cfg, RhatYCoeff::rho_plus_2kappa);
  EXPECT_TRUE(std::isfinite(rhs));
  EXPECT_NEAR(rhs, z.model.beta * t.numerator / t.denominator, 1e-12 * std::abs(rhs));
  EXPECT_GT(rhs, 0.0);
}

TEST(Psi, DerivativeIdentities) {
  for (const auto& z : all_zones()) {
    const auto cfg = config_of(z);
    const auto& m = z.model;
    double prev_ratio = INFINITY;
    for (int i = 0; i < 25; ++i) {
      const double x = m.zeta + sd_of(m) * (-4.0 + 0.35 * i);
      const auto mo = psi_moments(x, cfg);
      ASSERT_GT(mo.ratio(3, 1), mo.ratio(2, 1) * mo.ratio(2, 1)) << z.name << " x=" << x;
      const double r1 = 0.5 * m.sigma * m.sigma * mo.ratio(3, 1) +
                        m.kappa * (m.zeta - x) * mo.ratio(2, 1) - (z.econ.rho + m.kappa);
      ASSERT_LT(std::abs(r1) / (z.econ.rho + m.kappa), 1e-6) << z.name << " x=" << x;
      const double psi_over_slope = 1.0 / mo.ratio(1, 0);
      ASSERT_LT(psi_over_slope, prev_ratio);
      prev_ratio = psi_over_slope;
    }
  }
}

TEST(Revenue, CapacityOutsideRange) {
  const auto z = north();
  EXPECT_THROW(r_baseline(50.0, -1.0, z.econ, z.model, true), InputError);
  EXPECT_THROW(r_baseline(50.0, 7000.0, z.econ, z.model, true), InputError);
}
