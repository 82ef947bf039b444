#include "optinstall/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optinstall/error.hpp"

namespace optinstall {

namespace {

double y_coefficient(const EconParams& econ, const PriceModel& model, RhatYCoeff coeff) {
  return coeff == RhatYCoeff::rho_plus_2kappa ? econ.rho + 2.0 * model.kappa
                                              : 2.0 * model.kappa;
}

std::string at(double y, double x) {
  return "(y = " + std::to_string(y) + ", F-hat = " + std::to_string(x) + ")";
}

// Bisection for a strictly decreasing target with target(lo) > 0 > target(hi).
template <class Target>
RootSolution bisect(Target&& target, BracketInterval br, double tol) {
  RootSolution out;
  out.bracket = br;
  double lo = br.lo;
  double hi = br.hi;
  double mid = 0.5 * (lo + hi);
  double value = target(mid);
  // Stops once both the bracket and the residual are within tol.
  while (hi - lo > tol || std::abs(value) > tol) {
    if (value > 0.0) {
      lo = mid;
    } else if (value < 0.0) {
      hi = mid;
    } else {
      break;
    }
    ++out.iterations;
    const double next = 0.5 * (lo + hi);
    if (next <= lo || next >= hi) break;  // bracket at floating-point resolution
    mid = next;
    value = target(mid);
  }
  out.x = mid;
  out.residual = value;
  return out;
}

template <class Target>
BracketInterval widen_until_sign_change(Target&& target, BracketInterval br,
                                        int max_widenings) {
  double step = std::max(br.hi - br.lo, 1.0);
  while (!(target(br.lo) > 0.0 && target(br.hi) < 0.0)) {
    if (br.widenings >= max_widenings)
      throw NumericalError("no sign change of the boundary equation in [" +
                           std::to_string(br.lo) + ", " + std::to_string(br.hi) + "]");
    br.lo -= step;
    br.hi += step;
    step *= 2.0;
    ++br.widenings;
  }
  return br;
}

struct RhsSample {
  double value = 0.0;
  double denominator = 0.0;
};

RhsSample sample_rhs(double y, double x, const EconParams& econ, const PriceModel& model,
                     const PsiConfig& config, RhatYCoeff coeff) {
  const double rhs = ode_rhs(y, x, econ, model, config, coeff);
  if (!std::isfinite(rhs))
    throw NumericalError("non-finite free-boundary slope at " + at(y, x));
  const auto terms = ode_terms(y, x, econ, model, config, coeff);
  return {rhs, terms.denominator};
}

}  // namespace

bool FreeBoundary::is_nondecreasing() const {
  return std::is_sorted(f_values.begin(), f_values.end());
}

void FreeBoundary::validate() const {
  if (y_grid.size() < 2 || f_values.size() != y_grid.size() ||
      fhat_values.size() != y_grid.size())
    throw NumericalError("free boundary grid is malformed");
  if (y_grid.front() != 0.0) throw NumericalError("free boundary grid must start at 0");
  if (!std::is_sorted(y_grid.begin(), y_grid.end()) ||
      std::adjacent_find(y_grid.begin(), y_grid.end()) != y_grid.end())
    throw NumericalError("free boundary grid must be strictly increasing");
  for (double f : f_values)
    if (!std::isfinite(f)) throw NumericalError("free boundary contains non-finite values");
  if (!is_nondecreasing()) throw NumericalError("free boundary F is not nondecreasing");
}

double terminal_target(double x, const EconParams& econ, const PriceModel& model,
                       const PsiConfig& config, RhatYCoeff y_coeff) {
  const auto m = psi_moments(x, config, 1);
  return econ.c_hat() - r_hat_unit(x, econ.theta, econ, model, y_coeff) +
         m.ratio(0, 1) / (econ.rho + model.kappa);
}

BracketInterval bracket(const EconParams& econ, const PriceModel& model,
                        const PsiConfig& config, const BoundaryOptions& options) {
  const double k_y = y_coefficient(econ, model, options.rhat_y_coeff);
  const double c_bar = econ.c_hat() * (econ.rho + model.kappa) -
                       (model.zeta * model.kappa - model.beta * k_y * econ.theta) / econ.rho;
  const double ratio = psi_moments(c_bar, config, 1).ratio(0, 1);
  BracketInterval br{c_bar, c_bar + ratio, 0};
  if (!(br.hi > br.lo)) throw NumericalError("degenerate boundary bracket");
  auto target = [&](double x) {
    return terminal_target(x, econ, model, config, options.rhat_y_coeff);
  };
  return widen_until_sign_change(target, br, options.max_widenings);
}

RootSolution solve_constant_boundary(const EconParams& econ, const PriceModel& model,
                                     const PsiConfig& config, const BoundaryOptions& options) {
  if (model.beta != 0.0)
    throw InputError("the constant free boundary requires beta = 0");
  econ.validate();
  model.validate();
  const auto br = bracket(econ, model, config, options);
  return bisect([&](double x) { return h_eval(x, econ, model, config); }, br, options.tol);
}

RootSolution solve_terminal(const EconParams& econ, const PriceModel& model,
                            const PsiConfig& config, const BoundaryOptions& options) {
  econ.validate();
  model.validate();
  const auto br = bracket(econ, model, config, options);
  return bisect(
      [&](double x) { return terminal_target(x, econ, model, config, options.rhat_y_coeff); },
      br, options.tol);
}

FreeBoundary constant_boundary(double x_bar, double theta, const BoundaryOptions& options) {
  FreeBoundary fb;
  fb.kind = BoundaryKind::constant;
  fb.y_grid = {0.0, theta};
  fb.f_values = {x_bar, x_bar};
  fb.fhat_values = {x_bar, x_bar};
  fb.terminal_x = x_bar;
  fb.step_h = theta;
  fb.variant_tags.rhat_y_coeff = options.rhat_y_coeff;
  return fb;
}

FreeBoundary integrate_free_boundary(const EconParams& econ, const PriceModel& model,
                                     const PsiConfig& config, double step_h,
                                     const BoundaryOptions& options) {
  econ.validate();
  model.validate();
  if (!(step_h > 0.0) || step_h > econ.theta)
    throw InputError("step_h must lie in (0, theta]");

  const double theta = econ.theta;
  const double beta = model.beta;
  const auto coeff = options.rhat_y_coeff;
  const double x_hat = solve_terminal(econ, model, config, options).x;

  // Grid from theta downwards: theta, theta - h, ..., last step shortened to 0.
  const auto n_steps = static_cast<std::size_t>(std::ceil(theta / step_h - 1e-9));
  std::vector<double> ys(n_steps + 1);
  for (std::size_t k = 0; k < n_steps; ++k) ys[k] = theta - static_cast<double>(k) * step_h;
  ys[n_steps] = 0.0;

  std::vector<double> fhat(n_steps + 1);
  fhat[0] = x_hat;
  std::size_t max_sub = 1;

  if (beta > 0.0) {
    RhsSample current = sample_rhs(ys[0], fhat[0], econ, model, config, coeff);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double y0 = ys[k];
      const double h = y0 - ys[k + 1];
      const double x0 = fhat[k];

      // Explicit step, refined until no sub-step crosses D = 0 or changes
      // the slope by more than the configured fraction.
      double x_end = x0;
      RhsSample end_sample = current;
      std::size_t sub = 1;
      for (int halvings = 0;; ++halvings) {
        bool ok = true;
        double y = y0;
        double x = x0;
        RhsSample s = current;
        const double dy = h / static_cast<double>(sub);
        for (std::size_t j = 0; j < sub; ++j) {
          const double x_next = x - dy * s.value;
          const double y_next = (j + 1 == sub) ? ys[k + 1] : y - dy;
          RhsSample next = sample_rhs(y_next, x_next, econ, model, config, coeff);
          const bool flipped = (next.denominator > 0.0) != (s.denominator > 0.0);
          const bool jump = std::abs(next.value - s.value) >
                            options.substep_rhs_change * std::abs(s.value) + 1e-3 * beta;
          if (flipped || jump) {
            ok = false;
            break;
          }
          x = x_next;
          y = y_next;
          s = next;
        }
        if (ok) {
          x_end = x;
          end_sample = s;
          break;
        }
        if (halvings >= options.max_substep_halvings)
          throw NumericalError("free-boundary ODE is singular near " + at(y0, x0) +
                               ": step refinement exhausted");
        sub *= 2;
      }
      max_sub = std::max(max_sub, sub);

      if (options.scheme == OdeScheme::implicit_euler) {
        // Secant iteration on z = x0 - h rhs(y1, z), seeded by the explicit step.
        const double y1 = ys[k + 1];
        auto g = [&](double z) {
          return z - x0 + h * ode_rhs(y1, z, econ, model, config, coeff);
        };
        double a = x_end;
        double ga = g(a);
        double b = x_end - 0.5 * ga;
        double gb = g(b);
        int it = 0;
        while (std::abs(gb) > 1e-12 * std::max(1.0, std::abs(b)) && it < 60) {
          if (gb == ga) break;
          const double c = b - gb * (b - a) / (gb - ga);
          a = b;
          ga = gb;
          b = c;
          gb = g(b);
          ++it;
        }
        if (!std::isfinite(b) || std::abs(gb) > 1e-8 * std::max(1.0, std::abs(b)))
          throw NumericalError("implicit Euler step did not converge at " + at(y0, x0));
        x_end = b;
        end_sample = sample_rhs(y1, x_end, econ, model, config, coeff);
      }

      if (!std::isfinite(x_end))
        throw NumericalError("non-finite free boundary value at " + at(ys[k + 1], x_end));
      fhat[k + 1] = x_end;
      current = end_sample;
    }
  } else {
    std::fill(fhat.begin(), fhat.end(), x_hat);
  }

  FreeBoundary fb;
  fb.kind = beta > 0.0 ? BoundaryKind::curve : BoundaryKind::constant;
  fb.terminal_x = x_hat;
  fb.step_h = step_h;
  fb.beta = beta;
  fb.variant_tags.rhat_y_coeff = coeff;
  fb.variant_tags.psi_sign = config.branch;
  fb.max_substeps = max_sub;
  fb.y_grid.assign(ys.rbegin(), ys.rend());
  fb.fhat_values.assign(fhat.rbegin(), fhat.rend());
  fb.f_values.resize(fb.y_grid.size());
  for (std::size_t i = 0; i < fb.y_grid.size(); ++i)
    fb.f_values[i] = fb.fhat_values[i] - beta * fb.y_grid[i];
  fb.y_grid.back() = theta;
  return fb;
}

namespace {

double interpolate(const std::vector<double>& ys, const std::vector<double>& fs, double y) {
  if (y <= ys.front()) return fs.front();
  if (y >= ys.back()) return fs.back();
  const auto it = std::upper_bound(ys.begin(), ys.end(), y);
  const auto k = static_cast<std::size_t>(it - ys.begin());
  const double w = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
  return fs[k - 1] + w * (fs[k] - fs[k - 1]);
}

double invert(const std::vector<double>& ys, const std::vector<double>& fs, double price) {
  if (price <= fs.front()) return ys.front();
  if (price > fs.back()) return ys.back();
  const auto it = std::lower_bound(fs.begin(), fs.end(), price);
  const auto k = static_cast<std::size_t>(it - fs.begin());
  if (fs[k] == price) return ys[k];
  const double w = (price - fs[k - 1]) / (fs[k] - fs[k - 1]);
  return ys[k - 1] + w * (ys[k] - ys[k - 1]);
}

}  // namespace

double boundary_value(const FreeBoundary& fb, double y) {
  return interpolate(fb.y_grid, fb.f_values, y);
}

double boundary_inverse(const FreeBoundary& fb, double price) {
  if (!fb.is_nondecreasing())
    throw NumericalError("boundary_inverse requires a nondecreasing free boundary");
  return invert(fb.y_grid, fb.f_values, price);
}

BoundaryIndex::BoundaryIndex(const FreeBoundary& fb)
    : y_(fb.y_grid), f_(fb.f_values), constant_(fb.kind == BoundaryKind::constant) {
  fb.validate();
}

double BoundaryIndex::value(double y) const { return interpolate(y_, f_, y); }

double BoundaryIndex::inverse(double price) const { return invert(y_, f_, price); }

}  // namespace optinstall
