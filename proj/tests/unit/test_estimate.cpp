#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "optinstall/dataio.hpp"
#include "optinstall/error.hpp"
#include "optinstall/estimate.hpp"

using namespace optinstall;

namespace {

constexpr double kDt = 1.0 / 52.0;

std::vector<double> running_max_trend(std::size_t n, double slope, double noise, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> z(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, 1000.0 + slope * static_cast<double>(i) + noise * normal(gen));
    z[i] = m;
  }
  return z;
}

}  // namespace

TEST(Estimate, NoiselessRecurrence) {
  std::vector<double> x{100.0};
  for (int i = 0; i < 30; ++i) x.push_back(10.0 + 0.5 * x.back());
  const auto fit = fit_arx1(x);
  EXPECT_NEAR(fit.a.value, 10.0, 1e-8);
  EXPECT_NEAR(fit.b.value, 0.5, 1e-10);
  EXPECT_NEAR(fit.delta, 0.0, 1e-8);
}

TEST(Estimate, InsufficientObservations) {
  const ExogenousSeries two = {{SourceKind::photovoltaic, {1, 2, 3}}, {SourceKind::wind, {3, 1, 2}}};
  try {
    fit_arx1({1.0, 2.0, 4.0}, two);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient observations"), std::string::npos);
  }
  EXPECT_THROW(fit_arx1({1.0, 2.0}, {{SourceKind::wind, {1.0}}}), InputError);
}

TEST(Estimate, RankDeficientDesign) {
  std::vector<double> x(30);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * i);
  std::vector<double> z(30, 1.0);
  EXPECT_THROW(fit_arx1(x, {{SourceKind::photovoltaic, z}}), NumericalError);
}

TEST(Estimate, ResidualsOrthogonalToRegressors) {
  const auto z = running_max_trend(321, 10.0, 200.0, 5);
  OuParams ou{10.37, 140.6, {{SourceKind::photovoltaic, 0.0172}}, 47.66};
  const auto x = simulate_arx1(to_discrete(ou, kDt), 120.0, {{SourceKind::photovoltaic, z}}, 321, 9);
  const auto fit = fit_arx1(x, {{SourceKind::photovoltaic, z}});
  double s1 = 0, sx = 0, sz = 0, scale = 0;
  for (std::size_t n = 0; n + 1 < x.size(); ++n) {
    const double e = fit.raw_residuals[n];
    s1 += e;
    sx += e * x[n];
    sz += e * z[n];
    scale += std::abs(e * z[n]);
  }
  EXPECT_LT(std::abs(s1), 1e-8 * scale);
  EXPECT_LT(std::abs(sx), 1e-8 * scale);
  EXPECT_LT(std::abs(sz), 1e-8 * scale);
  EXPECT_EQ(fit.n_obs, 321u);
  EXPECT_EQ(fit.n_params, 3u);
  EXPECT_EQ(fit.dof(), 317u);
  // Standardized residuals have SSR = dof.
  double ssr = 0;
  for (double r : fit.residuals) ssr += r * r;
  EXPECT_NEAR(ssr, 317.0, 1e-8);
}

TEST(Estimate, SeededRecoveryWithinThreeStandardErrors) {
  const auto z = running_max_trend(321, 10.0, 200.0, 6);
  ArxCoefficients truth{20.0, 0.8, {{SourceKind::photovoltaic, -0.004}}, 8.0};
  const auto x = simulate_arx1(truth, 90.0, {{SourceKind::photovoltaic, z}}, 321, 17);
  const auto fit = fit_arx1(x, {{SourceKind::photovoltaic, z}});
  EXPECT_LT(std::abs(fit.a.value - truth.a), 3 * fit.a.std_error);
  EXPECT_LT(std::abs(fit.b.value - truth.b), 3 * fit.b.std_error);
  const auto& u = fit.u.at(SourceKind::photovoltaic);
  EXPECT_LT(std::abs(u.value - truth.u.at(SourceKind::photovoltaic)), 3 * u.std_error);
  EXPECT_LT(std::abs(fit.delta - truth.delta), 3 * fit.delta_std_error);
}

TEST(Estimate, SimulationIsSeeded) {
  ArxCoefficients c{1.0, 0.5, {}, 2.0};
  EXPECT_EQ(simulate_arx1(c, 0.0, {}, 50, 4), simulate_arx1(c, 0.0, {}, 50, 4));
  EXPECT_NE(simulate_arx1(c, 0.0, {}, 50, 4), simulate_arx1(c, 0.0, {}, 50, 5));
  EXPECT_EQ(simulate_arx1(c, 0.0, {}, 50, 4).size(), 50u);
}

TEST(Estimate, StarCodes) {
  EXPECT_EQ(star_code(0.001), "***");
  EXPECT_EQ(star_code(0.03), "**");
  EXPECT_EQ(star_code(0.07), "*");
  EXPECT_EQ(star_code(0.5), "");
}

TEST(BoxPierce, HandComputedVector) {
  // mean 2.5, deviations -1.5 -0.5 0.5 1.5, c0 = 5, c1 = 0.75 - 0.25 + 0.75... = 1.25
  const auto r = box_pierce({1, 2, 3, 4}, 1);
  const double r1 = (-1.5 * -0.5 + -0.5 * 0.5 + 0.5 * 1.5) / 5.0;
  EXPECT_NEAR(r.statistic, 4.0 * r1 * r1, 1e-14);
  EXPECT_NEAR(r.statistic, 0.25, 1e-14);
  EXPECT_EQ(r.lags, 1u);
}

TEST(BoxPierce, AlternatingSeries) {
  std::vector<double> e(100);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = i % 2 ? -1.0 : 1.0;
  const auto r = box_pierce(e, 1);
  EXPECT_NEAR(r.statistic, 100.0 * 0.99 * 0.99, 1e-9);
  EXPECT_LT(r.p_value, 1e-20);
}

TEST(BoxPierce, InvariantToSignAndScale) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  std::vector<double> e(200), f(200);
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = normal(gen);
    f[i] = -3.5 * e[i];
  }
  EXPECT_NEAR(box_pierce(e).statistic, box_pierce(f).statistic, 1e-10);
  EXPECT_GT(box_pierce(e, 10, true).statistic, box_pierce(e).statistic);
}

TEST(BoxPierce, MeanOfStatisticMatchesChiSquared) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;
  double total = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> e(10000);
    for (double& v : e) v = normal(gen);
    total += box_pierce(e, 10).statistic;
  }
  EXPECT_NEAR(total / 200.0, 10.0, 1.0);
}

TEST(BoxPierce, RejectsDegenerateInput) {
  EXPECT_THROW(box_pierce({1, 2, 3}, 3), InputError);
  EXPECT_THROW(box_pierce({2, 2, 2, 2}, 1), InputError);
}

TEST(ParameterMap, RoundTripOnNorth) {
  OuParams ou{10.3702, 140.5894, {{SourceKind::photovoltaic, 0.0172}}, 47.6586};
  const auto d = to_discrete(ou, kDt);
  EXPECT_NEAR(d.b, std::exp(-10.3702 / 52.0), 1e-15);
  const auto back = to_continuous(d, kDt);
  EXPECT_NEAR(back.kappa, 10.3702, 1e-10 * 10.3702);
  EXPECT_NEAR(back.zeta, 140.5894, 1e-10 * 140.5894);
  EXPECT_NEAR(back.beta.at(SourceKind::photovoltaic), 0.0172, 1e-10 * 0.0172);
  EXPECT_NEAR(back.sigma, 47.6586, 1e-10 * 47.6586);
}

TEST(ParameterMap, DirectFormula) {
  ArxCoefficients c{1.0, std::exp(-0.1), {}, 1.0};
  EXPECT_NEAR(to_continuous(c, kDt).kappa, 5.2, 1e-12);
}

TEST(ParameterMap, NoMeanReversion) {
  ArxCoefficients c{1.0, 1.0, {}, 1.0};
  try {
    to_continuous(c, kDt);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("no mean reversion"), std::string::npos);
  }
  c.b = -0.2;
  EXPECT_THROW(to_continuous(c, kDt), NumericalError);
}

namespace {

ArxFit handmade_fit(double b, double se_a, double se_b, double cov_ab = 0.0) {
  ArxFit f;
  f.a.value = 12.0;
  f.b.value = b;
  f.a.std_error = se_a;
  f.b.std_error = se_b;
  f.delta = 9.0;
  f.n_obs = 321;
  f.n_params = 2;
  f.covariance = {se_a * se_a, cov_ab, cov_ab, se_b * se_b};
  return f;
}

}  // namespace

TEST(DeltaMethod, KappaStandardError) {
  const auto fit = handmade_fit(0.8, 1.5, 0.03, 0.01);
  const auto se = delta_method_se(fit, kDt);
  EXPECT_NEAR(se.kappa, 0.03 / (0.8 * kDt), 1e-12);
}

TEST(DeltaMethod, ZeroPropagates) {
  EXPECT_EQ(delta_method_se(handmade_fit(0.8, 1.5, 0.0), kDt).kappa, 0.0);
}

TEST(DeltaMethod, ZetaBlowsUpNearUnitRoot) {
  double prev = 0.0;
  for (double b : {0.9, 0.99, 0.999, 0.9999}) {
    const double s = delta_method_se(handmade_fit(b, 1.0, 0.01), kDt).zeta;
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_GT(prev, 1e6);
}

TEST(DeltaMethod, ZetaMatchesHandGradient) {
  const double b = 0.8, sa = 1.5, sb = 0.03, cab = 0.01;
  const auto se = delta_method_se(handmade_fit(b, sa, sb, cab), kDt);
  const double ga = 1.0 / (1.0 - b);
  const double gb = 12.0 / ((1.0 - b) * (1.0 - b));
  EXPECT_NEAR(se.zeta, std::sqrt(ga * ga * sa * sa + 2 * ga * gb * cab + gb * gb * sb * sb), 1e-10);
}

namespace {

struct ZoneData {
  std::vector<double> price;
  ExogenousSeries proxies;
};

ZoneData synthetic_zone(double beta_pv, double beta_wind, std::uint64_t seed) {
  ZoneData d;
  d.proxies[SourceKind::photovoltaic] = running_max_trend(321, 12.0, 150.0, seed);
  // Saturating wind so the two proxies are not collinear.
  std::vector<double> wind(321);
  double m = 0.0;
  std::mt19937_64 gen(seed + 1);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < wind.size(); ++i) {
    m = std::max(m, 1500.0 + 3000.0 * (1.0 - std::exp(-5.0 * i / 321.0)) + 150.0 * normal(gen));
    wind[i] = m;
  }
  d.proxies[SourceKind::wind] = wind;
  OuParams ou{10.0, 120.0, {{SourceKind::photovoltaic, beta_pv}, {SourceKind::wind, beta_wind}}, 45.0};
  d.price = simulate_arx1(to_discrete(ou, kDt), 100.0, d.proxies, 321, seed + 2);
  return d;
}

}  // namespace

// Each false regressor survives a 5% test about one time in twenty, so the
// pattern is checked as a rate over seeds.
TEST(SignificanceRefit, RetainsOnlySignificantSources) {
  const std::vector<SourceKind> pv{SourceKind::photovoltaic}, wind{SourceKind::wind}, none;
  int north = 0, sardinia = 0, central = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto n = synthetic_zone(0.02, 0.0, seed);
    north += significance_refit(n.price, n.proxies).retained == pv;
    const auto s = synthetic_zone(0.0, 0.02, seed);
    sardinia += significance_refit(s.price, s.proxies).retained == wind;
    const auto c = synthetic_zone(0.0, 0.0, seed);
    const auto r = significance_refit(c.price, c.proxies);
    central += r.retained == none;
    if (r.retained.empty()) EXPECT_TRUE(r.restricted.u.empty());
    EXPECT_EQ(r.full.u.size(), 2u);
  }
  EXPECT_GE(north, 40);
  EXPECT_GE(sardinia, 40);
  EXPECT_GE(central, 40);
}

TEST(SignificanceRefit, BundledDataPattern) {
  const std::pair<const char*, std::vector<SourceKind>> expected[] = {
      {"North", {SourceKind::photovoltaic}}, {"CentralNorth", {}}, {"Sardinia", {SourceKind::wind}}};
  for (const auto& [zone, retained] : expected) {
    const auto aligned = align(load_zonal_csv(OPTINSTALL_DATA_FILE, zone));
    const ExogenousSeries proxies = {{SourceKind::photovoltaic, aligned.pv.values},
                                     {SourceKind::wind, aligned.wind.values}};
    EXPECT_EQ(significance_refit(aligned.price, proxies).retained, retained) << zone;
  }
}
