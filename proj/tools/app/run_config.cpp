#include "run_config.hpp"

#include <CLI11.hpp>
#include <algorithm>

#include "optinstall/error.hpp"

namespace optinstall::app {

EconParams RunConfig::econ() const {
  EconParams e;
  e.rho = rho;
  e.cost_c = cost_c;
  e.conv_a = conv_a;
  e.theta = theta;
  return e;
}

SourceKind RunConfig::source() const { return source_kind_from_string(impact_source); }

RhatYCoeff RunConfig::coeff() const { return rhat_y_coeff_from_string(rhat_y_coeff); }

BoundaryOptions RunConfig::boundary_options() const {
  BoundaryOptions o;
  o.tol = tol;
  o.rhat_y_coeff = coeff();
  if (ode_scheme == "explicit_euler") {
    o.scheme = OdeScheme::explicit_euler;
  } else if (ode_scheme == "implicit_euler") {
    o.scheme = OdeScheme::implicit_euler;
  } else {
    throw InputError("unknown ode_scheme '" + ode_scheme +
                     "' (expected explicit_euler or implicit_euler)");
  }
  return o;
}

void RunConfig::finalize() {
  for (const auto& v : variants) {
    const auto eq = v.find('=');
    if (eq == std::string::npos) throw InputError("--variant expects key=value, got '" + v + "'");
    const auto key = v.substr(0, eq);
    const auto value = v.substr(eq + 1);
    if (key == "rhat_y_coeff") {
      rhat_y_coeff = value;
    } else if (key == "ode_scheme") {
      ode_scheme = value;
    } else {
      throw InputError("unknown variant '" + key + "' (expected rhat_y_coeff or ode_scheme)");
    }
  }
  zone = canonical_zone(zone);
  (void)coeff();
  (void)boundary_options();
  (void)source();
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(quad_rel_tol > 0.0 && quad_rel_tol <= 1e-3))
    throw InputError("quad_rel_tol must lie in (0, 1e-3]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(capacity_scale > 0.0)) throw InputError("capacity_scale must be positive");
  if (!(dt_years > 0.0)) throw InputError("dt_years must be positive");
}

std::string canonical_zone(const std::string& zone) {
  std::string out;
  std::copy_if(zone.begin(), zone.end(), std::back_inserter(out),
               [](char c) { return c != ' ' && c != '_' && c != '-'; });
  return out;
}

void register_options(CLI::App& app, RunConfig& c) {
  app.add_option("--zone", c.zone, "Price zone (North, CentralNorth, ...)");
  app.add_option("--data_path", c.data_path, "Zonal CSV file");
  app.add_option("--out,--output_dir", c.output_dir, "Output directory");

  app.add_option("--rho", c.rho, "Discount rate, 1/year");
  app.add_option("--cost_c", c.cost_c, "Installation cost, EUR/MW");
  app.add_option("--conv_a", c.conv_a, "Conversion factor, MWh/year per MW");
  app.add_option("--theta", c.theta, "Capacity cap, MW");

  app.add_option("--kappa", c.kappa, "Mean reversion override");
  app.add_option("--zeta", c.zeta, "Long-run mean override");
  app.add_option("--beta", c.beta, "Impact slope override");
  app.add_option("--sigma", c.sigma, "Volatility override");
  app.add_option("--impact_source", c.impact_source, "photovoltaic or wind");

  app.add_option("--tol", c.tol, "Root-solver bracket width, EUR/MWh");
  app.add_option("--quad_rel_tol", c.quad_rel_tol, "Quadrature relative tolerance");
  app.add_option("--step_h", c.step_h, "Boundary integration step, MW");
  app.add_option("--rhat_y_coeff", c.rhat_y_coeff, "rho_plus_2kappa or two_kappa");
  app.add_option("--ode_scheme", c.ode_scheme, "explicit_euler or implicit_euler");
  app.add_option("--variant", c.variants, "Formula variant, key=value")->take_all();

  app.add_option("--dt_sim", c.dt_sim, "Simulation step, years");
  app.add_option("--horizon", c.horizon, "Simulation horizon, years (0 = automatic)");
  app.add_option("--n_paths", c.n_paths, "Monte Carlo paths");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--antithetic", c.antithetic, "Antithetic variates");
  app.add_option("--x0", c.x0, "Initial price, EUR/MWh");
  app.add_option("--y0", c.y0, "Initial capacity, MW");

  app.add_option("--dt_years", c.dt_years, "Observation spacing, years");
  app.add_option("--box_pierce_lags", c.box_pierce_lags, "Box-Pierce lag count");
  app.add_option("--alpha", c.alpha, "Significance level of the restricted refit");
  app.add_option("--capacity_scale", c.capacity_scale, "Multiplier applied to capacity proxies");
  app.add_option("--psi_points", c.psi_points, "Grid size of psi-dump");

  app.add_option("--reference_terminal_x", c.reference_terminal_x,
                 "Reference terminal value reported next to the computed one");
  app.add_option("--reference_f0", c.reference_f0,
                 "Reference F(0) reported next to the computed one");
}

}  // namespace optinstall::app
