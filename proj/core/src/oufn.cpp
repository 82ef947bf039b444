#include "optinstall/oufn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "optinstall/error.hpp"

namespace optinstall {

namespace {

constexpr double kMaxLog = 709.0;

using Moments = std::array<double, 4>;

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  Moments value{};
  Moments error{};  // |K15 - G7| per component
};

// Integrates the four moments t^(q-1+n) exp(-t^2/2 + v t - log_ref),
// n = 0..3, over (0, inf) in one pass; the shared exponential is evaluated
// once per node.
class MomentIntegrator {
 public:
  MomentIntegrator(double q, double v, double log_ref, double rel_tol, std::size_t max_nodes)
      : q_(q), v_(v), log_ref_(log_ref), tol_(rel_tol), max_nodes_(max_nodes) {}

  Moments integrate() {
    Moments total{};

    // For q < 1 the weight t^(q-1) is singular at 0; t = s^(1/q) maps
    // t^(q-1) dt to ds/q and leaves a smooth integrand on s in [0, 1].
    double split = 0.0;
    if (q_ < 1.0) {
      split = 1.0;
      auto g = [this](double s) {
        Moments out{};
        if (s <= 0.0) {
          out[0] = std::exp(-log_ref_) / q_;
          return out;
        }
        const double t = std::pow(s, 1.0 / q_);
        fill_powers(out, std::exp(exponent(t)) / q_, t);
        return out;
      };
      add(total, adaptive(g, 0.0, 1.0, total));
    }

    auto f = [this](double t) {
      Moments out{};
      if (t <= 0.0) {
        if (q_ == 1.0) out[0] = std::exp(-log_ref_);
        return out;
      }
      fill_powers(out, std::exp((q_ - 1.0) * std::log(t) + exponent(t)), t);
      return out;
    };

    // Stationary point of the order-0 integrand, clipped to the split.
    const double m = q_ - 1.0;
    double peak = std::max(v_, 0.0);
    const double disc = v_ * v_ + 4.0 * m;
    if (disc >= 0.0 && (v_ > 0.0 || m > 0.0)) peak = 0.5 * (v_ + std::sqrt(disc));
    peak = std::max(peak, split);

    const double width = 2.0 / std::max(1.0, -v_);
    Moments cutoff = f(peak);
    for (double& c : cutoff) c *= tol_ * 1e-3;

    // March right from the peak until the Gaussian tail is negligible, then
    // left down to the split point.
    for (double a = peak;; a += width) {
      const Moments part = adaptive(f, a, a + width, total);
      add(total, part);
      if (negligible(f(a + width), cutoff, part, total)) break;
      if (nodes_ > max_nodes_) budget_exceeded();
    }
    for (double b = peak; b > split;) {
      const double a = std::max(split, b - width);
      const Moments part = adaptive(f, a, b, total);
      add(total, part);
      if (negligible(f(a), cutoff, part, total)) break;
      b = a;
    }
    return total;
  }

 private:
  // -t^2/2 + v t - log_ref, centered at the peak when v > 0 so that large v
  // does not cancel catastrophically.
  double exponent(double t) const {
    if (v_ > 0.0) {
      const double d = t - v_;
      return -0.5 * d * d + (0.5 * v_ * v_ - log_ref_);
    }
    return -0.5 * t * t + v_ * t - log_ref_;
  }

  static void fill_powers(Moments& out, double base, double t) {
    out[0] = base;
    out[1] = base * t;
    out[2] = out[1] * t;
    out[3] = out[2] * t;
  }

  static void add(Moments& acc, const Moments& part) {
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += part[n];
  }

  bool negligible(const Moments& edge, const Moments& cutoff, const Moments& part,
                  const Moments& total) const {
    for (std::size_t n = 0; n < edge.size(); ++n) {
      if (edge[n] > cutoff[n] || std::abs(part[n]) > tol_ * std::abs(total[n])) return false;
    }
    return true;
  }

  template <class F>
  Segment rule(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Segment seg{a, b, {}, {}};
    Moments gauss{};
    const Moments fc = f(center);
    for (std::size_t n = 0; n < 4; ++n) {
      seg.value[n] = kKronrodWeights[7] * fc[n];
      gauss[n] = kGaussWeights[3] * fc[n];
    }
    for (std::size_t j = 0; j < 7; ++j) {
      const double dx = half * kKronrodNodes[j];
      const Moments lo = f(center - dx);
      const Moments hi = f(center + dx);
      for (std::size_t n = 0; n < 4; ++n) {
        const double sum = lo[n] + hi[n];
        seg.value[n] += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss[n] += kGaussWeights[j / 2] * sum;
      }
    }
    nodes_ += 15;
    for (std::size_t n = 0; n < 4; ++n) {
      seg.value[n] *= half;
      gauss[n] *= half;
    }
    for (std::size_t n = 0; n < 4; ++n) seg.error[n] = std::abs(seg.value[n] - gauss[n]);
    return seg;
  }

  // Bisects the worst segment until every component meets the relative
  // tolerance against max(|panel|, |running total|).
  template <class F>
  Moments adaptive(F& f, double a, double b, const Moments& running) {
    std::vector<Segment> segments;
    segments.push_back(rule(f, a, b));
    for (;;) {
      Moments sum{};
      Moments abs_err{};
      for (const auto& seg : segments) {
        for (std::size_t n = 0; n < 4; ++n) {
          sum[n] += seg.value[n];
          abs_err[n] += seg.error[n];
        }
      }
      Moments scale{};
      bool converged = true;
      for (std::size_t n = 0; n < 4; ++n) {
        if (!std::isfinite(sum[n])) {
          throw NumericalError("psi quadrature produced a non-finite value (v = " +
                               std::to_string(v_) + ")");
        }
        scale[n] = std::max({std::abs(sum[n]), std::abs(running[n] + sum[n]), 1e-300});
        if (abs_err[n] > tol_ * scale[n]) converged = false;
      }
      if (converged) return sum;
      if (nodes_ > max_nodes_) budget_exceeded();

      auto badness = [&scale](const Segment& seg) {
        double out = 0.0;
        for (std::size_t n = 0; n < 4; ++n) out = std::max(out, seg.error[n] / scale[n]);
        return out;
      };
      auto worst = std::max_element(
          segments.begin(), segments.end(),
          [&](const Segment& l, const Segment& r) { return badness(l) < badness(r); });
      const double mid = 0.5 * (worst->a + worst->b);
      const double hi = worst->b;
      *worst = rule(f, worst->a, mid);
      segments.push_back(rule(f, mid, hi));
    }
  }

  [[noreturn]] void budget_exceeded() const {
    throw NumericalError("psi quadrature did not converge within " +
                         std::to_string(max_nodes_) + " nodes (v = " + std::to_string(v_) + ")");
  }

  double q_;
  double v_;
  double log_ref_;
  double tol_;
  std::size_t max_nodes_;
  std::size_t nodes_ = 0;
};

}  // namespace

PsiConfig PsiConfig::from(const PriceModel& model, const EconParams& econ,
                          double quad_rel_tol) {
  PsiConfig cfg;
  cfg.rho = econ.rho;
  cfg.kappa = model.kappa;
  cfg.zeta = model.zeta;
  cfg.sigma = model.sigma;
  cfg.quad_rel_tol = quad_rel_tol;
  return cfg;
}

void PsiConfig::validate() const {
  if (!(rho > 0.0) || !(kappa > 0.0) || !(sigma > 0.0))
    throw InputError("psi config requires rho, kappa, sigma > 0");
  if (!std::isfinite(zeta)) throw InputError("psi config requires finite zeta");
  if (!(quad_rel_tol > 0.0) || quad_rel_tol > 1e-3)
    throw InputError("quad_rel_tol must lie in (0, 1e-3]");
  if (quad_max_nodes < 64) throw InputError("quad_max_nodes too small");
}

double PsiMoments::value(int order) const {
  const double lv = log_value(order);
  if (lv > kMaxLog)
    throw NumericalError("psi^(" + std::to_string(order) +
                         ") overflows a double; use the scaled representation");
  return std::copysign(std::exp(lv), scaled[order]);
}

double PsiMoments::log_value(int order) const {
  return log_scale + std::log(std::abs(scaled[order]));
}

PsiMoments psi_moments(double x, const PsiConfig& config, int max_order) {
  if (max_order < 0 || max_order > 3) throw InputError("psi order must be in 0..3");
  if (!std::isfinite(x)) throw InputError("psi evaluated at a non-finite price");
  config.validate();

  const double q = config.rho / config.kappa;
  const double u = std::sqrt(2.0 * config.kappa) / config.sigma;
  const double sign = config.branch == PsiBranch::increasing ? 1.0 : -1.0;
  const double v = sign * u * (x - config.zeta);
  const double log_ref = v > 0.0 ? 0.5 * v * v : 0.0;

  const Moments raw =
      MomentIntegrator(q, v, log_ref, config.quad_rel_tol, config.quad_max_nodes).integrate();
  PsiMoments out;
  out.log_scale = log_ref - std::lgamma(q);
  double factor = 1.0;
  for (int n = 0; n <= max_order; ++n) {
    out.scaled[n] = factor * raw[n];
    factor *= sign * u;
  }
  for (int n = max_order + 1; n <= 3; ++n)
    out.scaled[n] = std::numeric_limits<double>::quiet_NaN();
  return out;
}

double psi(double x, int order, const PsiConfig& config) {
  return psi_moments(x, config, order).value(order);
}

double psi_at_mean_closed_form(const PsiConfig& config) {
  config.validate();
  const double q = config.rho / config.kappa;
  return std::exp((0.5 * q - 1.0) * std::log(2.0) + std::lgamma(0.5 * q) - std::lgamma(q));
}

double r_baseline(double x, double y, const EconParams& econ, const PriceModel& model,
                  bool impacted) {
  if (y < 0.0 || y > econ.theta)
    throw InputError("capacity " + std::to_string(y) + " outside [0, theta]");
  const double rho = econ.rho;
  const double kappa = model.kappa;
  const double a = econ.conv_a;
  double r = a * x * y / (rho + kappa) + a * model.zeta * kappa * y / (rho * (rho + kappa));
  if (impacted) r -= a * kappa * model.beta * y * y / (rho * (rho + kappa));
  return r;
}

namespace {
double y_coefficient(const EconParams& econ, const PriceModel& model, RhatYCoeff coeff) {
  return coeff == RhatYCoeff::rho_plus_2kappa ? econ.rho + 2.0 * model.kappa
                                              : 2.0 * model.kappa;
}
}  // namespace

double r_hat_unit(double x, double y, const EconParams& econ, const PriceModel& model,
                  RhatYCoeff y_coeff) {
  const double rho = econ.rho;
  const double kappa = model.kappa;
  return (model.zeta * kappa + rho * x - model.beta * y_coefficient(econ, model, y_coeff) * y) /
         (rho * (rho + kappa));
}

double r_hat(double x, double y, const EconParams& econ, const PriceModel& model,
             RhatYCoeff y_coeff) {
  return econ.conv_a * r_hat_unit(x, y, econ, model, y_coeff);
}

double h_eval(double x, const EconParams& econ, const PriceModel& model,
              const PsiConfig& config) {
  const auto m = psi_moments(x, config, 1);
  return econ.c_hat() * (econ.rho + model.kappa) - model.zeta * model.kappa / econ.rho +
         m.ratio(0, 1) - x;
}

OdeTerms ode_terms(double y, double x, const EconParams& econ, const PriceModel& model,
                   const PsiConfig& config, RhatYCoeff y_coeff) {
  const auto m = psi_moments(x, config, 3);
  const double p1 = m.ratio(1, 0);
  const double p2 = m.ratio(2, 0);
  const double p3 = m.ratio(3, 0);
  const double rho = econ.rho;
  const double kappa = model.kappa;
  const double gap = (rho + kappa) * (econ.c_hat() - r_hat_unit(x, y, econ, model, y_coeff));

  OdeTerms terms;
  terms.numerator = (p2 - p1 * p1) * ((rho + 2.0 * kappa) / rho * p1 + (gap * p2 + p1));
  terms.denominator = gap * (p1 * p3 - p2 * p2) + p3 - p1 * p2;
  return terms;
}

double ode_rhs(double y, double fhat, const EconParams& econ, const PriceModel& model,
               const PsiConfig& config, RhatYCoeff y_coeff) {
  if (model.beta == 0.0) return 0.0;
  const auto t = ode_terms(y, fhat, econ, model, config, y_coeff);
  if (!std::isfinite(t.numerator) || !std::isfinite(t.denominator) ||
      std::abs(t.denominator) <= 1e-12 * std::max(1.0, std::abs(t.numerator))) {
    throw NumericalError("singular free-boundary ODE right-hand side at y = " +
                         std::to_string(y) + ", F-hat = " + std::to_string(fhat));
  }
  return model.beta * t.numerator / t.denominator;
}

}  // namespace optinstall
