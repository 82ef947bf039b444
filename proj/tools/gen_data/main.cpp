// Writes a synthetic six-zone weekly dataset in the zonal CSV layout.
//
// National production follows a growing trend with yearly seasonality and
// noise; each zone receives a fixed share. Zone prices follow the exact
// ARX(1) discretization of the impacted O-U model driven by the running
// maximum of national production.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "optinstall/dataio.hpp"
#include "optinstall/error.hpp"
#include "optinstall/estimate.hpp"
#include "optinstall/rng.hpp"

using namespace optinstall;

namespace {

struct ZoneSpec {
  std::string_view name;
  double kappa, zeta, beta_pv, beta_wind, sigma;
  double pv_share, wind_share;
};

// kappa, zeta, beta_pv, beta_wind, sigma, pv share, wind share
constexpr ZoneSpec kZones[] = {
    {"North", 10.3702, 140.5894, 0.0172, 0.0, 47.6586, 0.42, 0.02},
    {"CentralNorth", 9.2648, 55.6085, 0.0, 0.0, 65.9346, 0.12, 0.03},
    {"CentralSouth", 8.9, 75.0, 0.0, 0.0, 52.0, 0.14, 0.18},
    {"South", 12.0, 70.0, 0.0, 0.0, 58.0, 0.20, 0.45},
    {"Sicily", 11.0, 90.0, 0.0, 0.0, 70.0, 0.08, 0.20},
    {"Sardinia", 18.5248, 102.4620, 0.0, 0.0123, 68.2889, 0.04, 0.12},
};

// shape > 0: convex growth (t/T)^shape; shape < 0: saturating 1 - exp(shape t/T).
std::vector<double> national_series(std::size_t weeks, double base, double growth, double shape,
                                     double season, double noise, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::vector<double> out(weeks);
  for (std::size_t n = 0; n < weeks; ++n) {
    const double t = static_cast<double>(n);
    const double u = t / static_cast<double>(weeks);
    const double trend =
        base + growth * (shape > 0.0 ? std::pow(u, shape) : -std::expm1(shape * u));
    const double v = trend + season * std::sin(2.0 * std::numbers::pi * t / 52.0) + noise * normal(gen);
    out[n] = std::max(0.0, v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic zonal dataset generator"};
  std::string out_path = "synthetic_zonal.csv";
  std::size_t weeks = 321;
  std::uint64_t seed = 1;
  std::string start = "2015-01-05";
  double dt = 1.0 / 52.0;
  app.add_option("--out", out_path, "Output CSV");
  app.add_option("--weeks", weeks, "Number of weeks")->check(CLI::Range(2, 100000));
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--start", start, "First week_start (ISO date)");
  app.add_option("--dt_years", dt, "Week length in years");
  CLI11_PARSE(app, argc, argv);

  try {
    const long first_day = parse_iso_date(start);
    std::mt19937_64 gen(substream_seed(seed, 0));
    const auto pv = national_series(weeks, 1200.0, 3600.0, 2.0, 500.0, 150.0, gen);
    const auto wind = national_series(weeks, 1200.0, 2800.0, -5.0, 250.0, 200.0, gen);
    const std::size_t n_zones = std::size(kZones);
    ZonalTable table;
    table.rows.resize(weeks * n_zones);
    std::vector<double> national_pv(weeks, 0.0);
    std::vector<double> national_wind(weeks, 0.0);
    for (std::size_t n = 0; n < weeks; ++n) {
      for (std::size_t z = 0; z < n_zones; ++z) {
        auto& row = table.rows[n * n_zones + z];
        row.day = first_day + 7 * static_cast<long>(n);
        row.zone = std::string(kZones[z].name);
        row.pv = std::round(pv[n] * kZones[z].pv_share * 10.0) / 10.0;
        row.wind = std::round(wind[n] * kZones[z].wind_share * 10.0) / 10.0;
        national_pv[n] += row.pv;
        national_wind[n] += row.wind;
      }
    }
    ExogenousSeries proxies;
    proxies[SourceKind::photovoltaic] =
        installed_power_proxy(national_pv, SourceKind::photovoltaic).values;
    proxies[SourceKind::wind] = installed_power_proxy(national_wind, SourceKind::wind).values;

    for (std::size_t z = 0; z < n_zones; ++z) {
      const auto& zone = kZones[z];
      OuParams ou;
      ou.kappa = zone.kappa;
      ou.zeta = zone.zeta;
      ou.sigma = zone.sigma;
      ou.beta[SourceKind::photovoltaic] = zone.beta_pv;
      ou.beta[SourceKind::wind] = zone.beta_wind;
      const auto coeffs = to_discrete(ou, dt);
      const double x0 = zone.zeta - zone.beta_pv * proxies[SourceKind::photovoltaic][0] -
                        zone.beta_wind * proxies[SourceKind::wind][0];
      const auto prices = simulate_arx1(coeffs, x0, proxies, weeks, substream_seed(seed, z + 1));
      for (std::size_t n = 0; n < weeks; ++n)
        table.rows[n * n_zones + z].price = std::round(prices[n] * 100.0) / 100.0;
    }
    write_zonal_table(table, out_path);
    std::cout << "wrote " << weeks << " weeks x " << n_zones << " zones to " << out_path
              << "\n";
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
