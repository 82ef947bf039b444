#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optinstall/boundary.hpp"
#include "optinstall/params.hpp"

namespace CLI {
class App;
}

namespace optinstall::app {

/// Settings of one run. Every field is also a `key = value` entry of the
/// configuration file; command-line flags take precedence over the file.
struct RunConfig {
  std::string zone;
  std::string data_path;
  std::string output_dir = "out";

  double rho = 0.1;
  double cost_c = 0.0;
  double conv_a = 0.0;
  double theta = 0.0;

  std::optional<double> kappa;
  std::optional<double> zeta;
  std::optional<double> beta;
  std::optional<double> sigma;
  std::string impact_source = "photovoltaic";

  double tol = 1e-6;
  double quad_rel_tol = 1e-12;
  double step_h = 0.5;
  std::string rhat_y_coeff = "rho_plus_2kappa";
  std::string ode_scheme = "explicit_euler";
  std::vector<std::string> variants;  ///< `--variant key=value`

  double dt_sim = 1.0 / 52.0;
  double horizon = 0.0;
  std::size_t n_paths = 4000;
  std::uint64_t seed = 0;
  bool antithetic = true;
  std::optional<double> x0;
  double y0 = 0.0;

  double dt_years = 1.0 / 52.0;
  std::size_t box_pierce_lags = 10;
  double alpha = 0.05;
  double capacity_scale = 1.0;
  std::size_t psi_points = 101;

  std::optional<double> reference_terminal_x;
  std::optional<double> reference_f0;

  EconParams econ() const;
  SourceKind source() const;
  BoundaryOptions boundary_options() const;
  RhatYCoeff coeff() const;
  /// Applies `--variant` entries and checks enumerations.
  void finalize();
};

/// Registers every RunConfig field as an option of `app`.
void register_options(CLI::App& app, RunConfig& config);

/// Zone label as written in data files ("Central North" -> "CentralNorth").
std::string canonical_zone(const std::string& zone);

}  // namespace optinstall::app
