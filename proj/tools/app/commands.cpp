#include "commands.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "optinstall/dataio.hpp"
#include "optinstall/error.hpp"
#include "optinstall/estimate.hpp"
#include "optinstall/oufn.hpp"
#include "optinstall/policy.hpp"

namespace optinstall::app {

namespace {

using json = nlohmann::ordered_json;

// Shortest representation that round-trips.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::filesystem::path prepare_output(const RunConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + c.output_dir + "': " + ec.message());
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

json variant_json(const VariantTags& tags, OdeScheme scheme) {
  return {{"psi_sign", std::string(to_string(tags.psi_sign))},
          {"c_hat_normalization", tags.c_hat_normalization},
          {"rhat_y_coeff", std::string(to_string(tags.rhat_y_coeff))},
          {"ode_scheme", scheme == OdeScheme::explicit_euler ? "explicit_euler" : "implicit_euler"}};
}

json variant_json(const RunConfig& c) {
  VariantTags tags;
  tags.rhat_y_coeff = c.coeff();
  return variant_json(tags, c.boundary_options().scheme);
}

std::string csv_preamble(const RunConfig& c) {
  return "# zone=" + c.zone + " seed=" + std::to_string(c.seed) +
         " variant_tags=" + variant_json(c).dump() + "\n";
}

json deviation(double computed, const std::optional<double>& reference) {
  json j;
  j["computed"] = computed;
  if (reference) {
    j["reference"] = *reference;
    j["deviation_pct"] = 100.0 * (computed - *reference) / *reference;
  } else {
    j["reference"] = nullptr;
    j["deviation_pct"] = nullptr;
  }
  return j;
}

struct ZoneData {
  ZonalDataset dataset;
  AlignedSeries series;
  ExogenousSeries exogenous;
};

ZoneData load_zone(const RunConfig& c) {
  if (c.data_path.empty()) throw InputError("data_path is not set");
  if (c.zone.empty()) throw InputError("zone is not set");
  ZoneData z;
  z.dataset = load_zonal_csv(c.data_path, c.zone, c.dt_years);
  z.series = align(z.dataset);
  for (auto* proxy : {&z.series.pv, &z.series.wind})
    for (double& v : proxy->values) v *= c.capacity_scale;
  z.exogenous[SourceKind::photovoltaic] = z.series.pv.values;
  z.exogenous[SourceKind::wind] = z.series.wind.values;
  return z;
}

struct ResolvedModel {
  PriceModel model;
  std::string origin;
};

ResolvedModel resolve_model(const RunConfig& c) {
  const int given = c.kappa.has_value() + c.zeta.has_value() + c.sigma.has_value();
  ResolvedModel r;
  if (given == 3) {
    r.model = {*c.kappa, *c.zeta, c.beta.value_or(0.0), *c.sigma};
    r.origin = "config";
  } else if (given == 0) {
    const auto z = load_zone(c);
    const auto refit = significance_refit(z.series.price, z.exogenous, c.alpha);
    const auto ou = to_continuous(refit.restricted, c.dt_years);
    r.model = ou.model(c.source());
    if (c.beta) r.model.beta = *c.beta;
    if (r.model.beta < 0.0)
      throw NumericalError("estimated impact slope for " + c.impact_source +
                           " is negative; set beta explicitly");
    r.origin = "estimated";
  } else {
    throw InputError("kappa, zeta and sigma must be given together or not at all");
  }
  r.model.validate();
  return r;
}

json model_json(const PriceModel& m, const std::string& origin, const std::string& source) {
  return {{"origin", origin}, {"kappa", m.kappa}, {"zeta", m.zeta},
          {"beta", m.beta},   {"sigma", m.sigma}, {"impact_source", source}};
}

json econ_json(const EconParams& e) {
  return {{"rho", e.rho}, {"cost_c", e.cost_c}, {"conv_a", e.conv_a},
          {"theta", e.theta}, {"c_hat", e.c_hat()}};
}

json coefficient_json(const Coefficient& k) {
  return {{"value", k.value},
          {"std_error", k.std_error},
          {"t_stat", std::isfinite(k.t_stat) ? json(k.t_stat) : json(nullptr)},
          {"p_value", k.p_value},
          {"stars", std::string(star_code(k.p_value))}};
}

json fit_json(const ArxFit& fit, const RunConfig& c) {
  json j;
  json coefs;
  coefs["a"] = coefficient_json(fit.a);
  coefs["b"] = coefficient_json(fit.b);
  for (const auto& [kind, k] : fit.u) coefs["u_" + std::string(to_string(kind))] = coefficient_json(k);
  j["coefficients"] = coefs;
  j["delta"] = fit.delta;
  j["n_obs"] = fit.n_obs;
  j["dof"] = fit.dof();
  const auto bp = box_pierce(fit.residuals, c.box_pierce_lags);
  j["box_pierce"] = {{"statistic", bp.statistic}, {"lags", bp.lags}, {"p_value", bp.p_value},
                     {"independence_rejected", bp.p_value < 0.05}};
  try {
    const auto ou = to_continuous(fit, c.dt_years);
    const auto se = delta_method_se(fit, c.dt_years);
    json cont;
    cont["kappa"] = {{"value", ou.kappa}, {"std_error", se.kappa}};
    cont["zeta"] = {{"value", ou.zeta}, {"std_error", se.zeta}};
    for (const auto& [kind, b] : ou.beta)
      cont["beta_" + std::string(to_string(kind))] = {{"value", b},
                                                       {"std_error", se.beta.at(kind)}};
    cont["sigma"] = {{"value", ou.sigma}, {"std_error", se.sigma}};
    j["continuous"] = cont;
  } catch (const NumericalError& e) {
    j["continuous"] = {{"error", e.what()}};
  }
  return j;
}

FreeBoundary compute_boundary(const RunConfig& c, const PriceModel& model,
                              const BoundaryOptions& options) {
  const auto econ = c.econ();
  const auto cfg = PsiConfig::from(model, econ, c.quad_rel_tol);
  if (model.beta == 0.0) {
    const auto root = solve_constant_boundary(econ, model, cfg, options);
    return constant_boundary(root.x, econ.theta, options);
  }
  return integrate_free_boundary(econ, model, cfg, c.step_h, options);
}

std::string boundary_csv(const FreeBoundary& fb, const RunConfig& c) {
  std::string s = csv_preamble(c) + "y_mw,f_eur_mwh,fhat_eur_mwh\n";
  for (std::size_t i = 0; i < fb.y_grid.size(); ++i)
    s += num(fb.y_grid[i]) + "," + num(fb.f_values[i]) + "," + num(fb.fhat_values[i]) + "\n";
  return s;
}

std::string path_csv(const StrategyPath& p, const RunConfig& c) {
  std::string s = csv_preamble(c) + "t_years,price_eur_mwh,capacity_mw,increment_mw\n";
  for (std::size_t k = 0; k < p.times.size(); ++k)
    s += num(p.times[k]) + "," + num(p.prices[k]) + "," + num(p.capacities[k]) + "," +
         num(k < p.increments.size() ? p.increments[k] : 0.0) + "\n";
  return s;
}

json payoff_json(const PayoffEstimate& e) {
  return {{"mean", e.mean},         {"std_error", e.std_error}, {"n_paths", e.n_paths},
          {"horizon", e.horizon},   {"tail_bound", e.tail_bound}, {"seed", e.seed}};
}

SimOptions sim_options(const RunConfig& c) {
  SimOptions o;
  o.horizon = c.horizon;
  o.dt_sim = c.dt_sim;
  o.n_paths = c.n_paths;
  o.seed = c.seed;
  o.antithetic = c.antithetic;
  return o;
}

void check_sim(const RunConfig& c) {
  if (c.n_paths == 0) throw InputError("n_paths must be positive");
  if (!(c.dt_sim > 0.0)) throw InputError("dt_sim must be positive");
  if (c.horizon < 0.0) throw InputError("horizon must be nonnegative");
}

void check_step(const RunConfig& c) {
  if (!(c.step_h > 0.0)) throw InputError("step_h must be positive");
}

json boundary_summary(const FreeBoundary& fb) {
  return {{"terminal_x", fb.terminal_x}, {"f0", fb.f_values.front()}};
}

}  // namespace

void cmd_estimate(const RunConfig& c, std::ostream& log) {
  const auto z = load_zone(c);
  const auto refit = significance_refit(z.series.price, z.exogenous, c.alpha);
  json report;
  report["zone"] = c.zone;
  report["data_path"] = c.data_path;
  report["n_obs"] = z.dataset.size();
  report["dt_years"] = c.dt_years;
  report["alpha"] = c.alpha;
  report["capacity_scale"] = c.capacity_scale;
  report["seed"] = c.seed;
  report["variant_tags"] = variant_json(c);
  report["full"] = fit_json(refit.full, c);
  report["restricted"] = fit_json(refit.restricted, c);
  json retained = json::array();
  for (auto k : refit.retained) retained.push_back(std::string(to_string(k)));
  report["retained"] = retained;
  const auto dir = prepare_output(c);
  write_json(dir / "estimate_report.json", report);
  log << "estimate: zone " << c.zone << ", N = " << z.dataset.size() << ", retained "
      << retained.dump() << "\n";
}

void cmd_boundary(const RunConfig& c, std::ostream& log) {
  check_step(c);
  const auto resolved = resolve_model(c);
  const auto econ = c.econ();
  econ.validate();
  const auto options = c.boundary_options();
  const auto fb = compute_boundary(c, resolved.model, options);

  json j;
  j["zone"] = c.zone;
  j["kind"] = fb.kind == BoundaryKind::constant ? "constant" : "curve";
  j["model"] = model_json(resolved.model, resolved.origin, c.impact_source);
  j["econ"] = econ_json(econ);
  j["terminal_x"] = deviation(fb.terminal_x, c.reference_terminal_x);
  j["f0"] = deviation(fb.f_values.front(), c.reference_f0);
  j["step_h"] = fb.kind == BoundaryKind::curve ? json(fb.step_h) : json(nullptr);
  j["grid_points"] = fb.y_grid.size();
  j["max_substeps"] = fb.max_substeps;
  j["tol"] = c.tol;
  j["quad_rel_tol"] = c.quad_rel_tol;
  j["seed"] = c.seed;
  j["variant_tags"] = variant_json(fb.variant_tags, options.scheme);

  json variants = json::array();
  for (auto coeff : {RhatYCoeff::rho_plus_2kappa, RhatYCoeff::two_kappa}) {
    auto alt = options;
    alt.rhat_y_coeff = coeff;
    json v;
    v["rhat_y_coeff"] = std::string(to_string(coeff));
    if (coeff == options.rhat_y_coeff) {
      v["terminal_x"] = deviation(fb.terminal_x, c.reference_terminal_x);
      v["f0"] = deviation(fb.f_values.front(), c.reference_f0);
    } else {
      try {
        const auto other = compute_boundary(c, resolved.model, alt);
        v["terminal_x"] = deviation(other.terminal_x, c.reference_terminal_x);
        v["f0"] = deviation(other.f_values.front(), c.reference_f0);
      } catch (const NumericalError& e) {
        v["error"] = e.what();
      }
    }
    variants.push_back(v);
  }
  j["variant_comparison"] = variants;

  const auto dir = prepare_output(c);
  write_file(dir / "boundary.csv", boundary_csv(fb, c));
  write_json(dir / "boundary.json", j);
  log << "boundary: " << j["kind"].get<std::string>() << ", terminal_x = " << num(fb.terminal_x)
      << ", F(0) = " << num(fb.f_values.front()) << " [" << to_string(options.rhat_y_coeff)
      << "]\n";
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  check_sim(c);
  check_step(c);
  const auto resolved = resolve_model(c);
  const auto econ = c.econ();
  econ.validate();
  const auto options = c.boundary_options();
  const auto fb = compute_boundary(c, resolved.model, options);
  const auto sim = sim_options(c);
  const double x0 = c.x0.value_or(resolved.model.zeta);

  const auto path = simulate_optimal(resolved.model, econ, fb, x0, c.y0, sim);
  const BoundaryIndex index(fb);
  std::size_t violations = 0;
  for (std::size_t k = 0; k < path.increments.size(); ++k) {
    const double y = path.capacities[k + 1];
    if (y < econ.theta && path.prices[k] > index.value(y) * (1.0 + 1e-12) + 1e-9) ++violations;
    if (path.increments[k] < 0.0 || y > econ.theta)
      throw NumericalError("simulated strategy breaks irreversibility or the cap at step " +
                           std::to_string(k));
  }
  if (violations)
    throw NumericalError("simulated strategy left the waiting region " +
                         std::to_string(violations) + " times after adjustment");

  const auto optimal = payoff_mc(resolved.model, econ, InstallationRule::boundary(fb), x0, c.y0, sim);
  const auto never = payoff_mc(resolved.model, econ, InstallationRule::never(), x0, c.y0, sim);
  const auto immediate =
      payoff_mc(resolved.model, econ, InstallationRule::immediate(), x0, c.y0, sim);

  json j;
  j["zone"] = c.zone;
  j["model"] = model_json(resolved.model, resolved.origin, c.impact_source);
  j["econ"] = econ_json(econ);
  j["x0"] = x0;
  j["y0"] = c.y0;
  j["dt_sim"] = c.dt_sim;
  j["antithetic"] = c.antithetic;
  j["seed"] = c.seed;
  j["variant_tags"] = variant_json(fb.variant_tags, options.scheme);
  j["boundary"] = boundary_summary(fb);
  j["optimal"] = payoff_json(optimal);
  j["never_install"] = payoff_json(never);
  j["install_at_start"] = payoff_json(immediate);
  j["never_install_closed_form"] =
      r_baseline(x0, c.y0, econ, resolved.model, resolved.model.beta > 0.0);
  double installed = 0.0;
  for (double inc : path.increments) installed += inc;
  j["path"] = {{"steps", path.increments.size()}, {"installed_mw", installed},
               {"final_capacity_mw", path.capacities.back()}};

  const auto dir = prepare_output(c);
  write_file(dir / "simulated_path.csv", path_csv(path, c));
  write_json(dir / "payoff.json", j);
  log << "simulate: optimal payoff " << num(optimal.mean) << " +- " << num(optimal.std_error)
      << " EUR, installed " << num(installed) << " MW\n";
}

void cmd_compare(const RunConfig& c, std::ostream& log) {
  check_step(c);
  const auto z = load_zone(c);
  const auto resolved = resolve_model(c);
  const auto econ = c.econ();
  econ.validate();
  const auto options = c.boundary_options();
  const auto fb = compute_boundary(c, resolved.model, options);
  const auto& capacities =
      c.source() == SourceKind::photovoltaic ? z.series.pv.values : z.series.wind.values;
  const auto report = compare_realized(z.series.price, capacities, fb);

  std::string realized = csv_preamble(c) + "week,capacity_mw,price_eur_mwh,label,depth_eur_mwh,missed\n";
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    const auto& l = report.labels[i];
    const char* label = l.saturated ? "saturated"
                        : l.region == Region::installing ? "installing" : "waiting";
    realized += std::to_string(i) + "," + num(capacities[i]) + "," + num(z.series.price[i]) + "," +
                label + "," + num(report.depth_series[i]) + "," + (report.missed[i] ? "1" : "0") +
                "\n";
  }

  SimOptions sim = sim_options(c);
  sim.horizon = static_cast<double>(capacities.size() - 1) * c.dt_years;
  sim.dt_sim = c.dt_years;
  const auto path =
      simulate_optimal(resolved.model, econ, fb, z.series.price.front(), capacities.front(), sim);

  json j;
  j["zone"] = c.zone;
  j["model"] = model_json(resolved.model, resolved.origin, c.impact_source);
  j["econ"] = econ_json(econ);
  j["n_obs"] = capacities.size();
  j["capacity_scale"] = c.capacity_scale;
  j["installing_count"] = report.installing_count;
  j["missed_fraction"] = report.missed_fraction;
  j["boundary"] = boundary_summary(fb);
  j["seed"] = c.seed;
  j["variant_tags"] = variant_json(fb.variant_tags, options.scheme);
  j["plot_data"] = {"boundary.csv", "realized.csv", "counterfactual_path.csv"};

  const auto dir = prepare_output(c);
  write_file(dir / "boundary.csv", boundary_csv(fb, c));
  write_file(dir / "realized.csv", realized);
  write_file(dir / "counterfactual_path.csv", path_csv(path, c));
  write_json(dir / "comparison.json", j);
  log << "compare: zone " << c.zone << ", missed_fraction = " << num(report.missed_fraction)
      << " (" << report.installing_count << " of " << capacities.size()
      << " observations in the installation region)\n";
}

void cmd_psi_dump(const RunConfig& c, std::ostream& log) {
  const auto resolved = resolve_model(c);
  const auto econ = c.econ();
  econ.validate();
  if (c.psi_points < 2) throw InputError("psi_points must be at least 2");
  const auto cfg = PsiConfig::from(resolved.model, econ, c.quad_rel_tol);
  const double half = 5.0 * resolved.model.sigma / std::sqrt(2.0 * resolved.model.kappa);
  const double lo = resolved.model.zeta - half;
  std::string s = csv_preamble(c) +
                  "x_eur_mwh,log_psi,psi,psi1_over_psi,psi2_over_psi,psi3_over_psi\n";
  for (std::size_t i = 0; i < c.psi_points; ++i) {
    const double x = lo + 2.0 * half * static_cast<double>(i) / static_cast<double>(c.psi_points - 1);
    const auto m = psi_moments(x, cfg, 3);
    const double log_psi = m.log_value(0);
    s += num(x) + "," + num(log_psi) + "," + (log_psi < 709.0 ? num(std::exp(log_psi)) : "inf") +
         "," + num(m.ratio(1, 0)) + "," + num(m.ratio(2, 0)) + "," + num(m.ratio(3, 0)) + "\n";
  }
  const auto dir = prepare_output(c);
  write_file(dir / "psi_grid.csv", s);
  log << "psi-dump: " << c.psi_points << " points on [" << num(lo) << ", " << num(lo + 2 * half)
      << "]\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal renewable installation under price impact"};
  app.name("optinstall");
  RunConfig config;
  app.set_config("--config", "", "Run configuration file (key = value)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  register_options(app, config);
  app.require_subcommand(1, 1);
  auto* estimate = app.add_subcommand("estimate", "Fit the ARX(1) model and write estimate_report.json");
  auto* boundary = app.add_subcommand("boundary", "Compute the free boundary (boundary.csv, boundary.json)");
  auto* simulate = app.add_subcommand("simulate", "Simulate the optimal strategy and its payoff");
  auto* compare = app.add_subcommand("compare", "Audit realized installations against the boundary");
  auto* psi_dump = app.add_subcommand("psi-dump", "Tabulate psi and its derivatives");
  for (auto* sub : {estimate, boundary, simulate, compare, psi_dump}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    config.finalize();
    if (estimate->parsed()) cmd_estimate(config, out);
    if (boundary->parsed()) cmd_boundary(config, out);
    if (simulate->parsed()) cmd_simulate(config, out);
    if (compare->parsed()) cmd_compare(config, out);
    if (psi_dump->parsed()) cmd_psi_dump(config, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace optinstall::app
