#include "optinstall/policy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "optinstall/error.hpp"
#include "optinstall/rng.hpp"

namespace optinstall {

namespace {

Classification classify_with(double x, double y, double theta, double f_at_y) {
  if (y >= theta) return {Region::waiting, true};
  return {x >= f_at_y ? Region::installing : Region::waiting, false};
}

void check_capacity(double y, double theta) {
  if (!(y >= 0.0 && y <= theta))
    throw InputError("capacity " + std::to_string(y) + " outside [0, " + std::to_string(theta) +
                     "]");
}

// Recursive halving keeps the summation order independent of thread layout.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

PayoffEstimate summarize(const std::vector<double>& samples, std::size_t n_paths,
                         double horizon, double tail_bound, std::uint64_t seed) {
  PayoffEstimate est;
  const std::size_t n = samples.size();
  est.mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - est.mean) * (samples[i] - est.mean);
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(n));
  }
  est.n_paths = n_paths;
  est.horizon = horizon;
  est.tail_bound = tail_bound;
  est.seed = seed;
  return est;
}

// Simulation grid shared by every path of one estimate.
struct Grid {
  std::size_t steps = 0;
  double dt = 0.0;
  double horizon = 0.0;
  double decay = 0.0;      // exp(-kappa dt)
  double exact_sd = 0.0;   // sigma sqrt((1 - exp(-2 kappa dt)) / (2 kappa))
  std::vector<double> discount;

  Grid(const PriceModel& model, const EconParams& econ, const SimOptions& options) {
    if (!(options.dt_sim > 0.0) || !std::isfinite(options.dt_sim))
      throw InputError("dt_sim must be positive");
    if (options.horizon < 0.0 || !std::isfinite(options.horizon))
      throw InputError("horizon must be nonnegative");
    steps = options.steps(econ.rho);
    if (steps == 0) throw InputError("horizon shorter than one simulation step");
    dt = options.dt_sim;
    horizon = static_cast<double>(steps) * dt;
    decay = std::exp(-model.kappa * dt);
    exact_sd = model.sigma * std::sqrt(-std::expm1(-2.0 * model.kappa * dt) / (2.0 * model.kappa));
    discount.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
      discount[k] = std::exp(-econ.rho * static_cast<double>(k) * dt);
  }
};

// One price path with several producers sharing it. Index 0 of `payoff`
// accumulates the aggregate computed from the total capacity.
class PathState {
 public:
  PathState(const PriceModel& model, const EconParams& econ, const Grid& grid,
            const SimOptions& options, double x0, const std::vector<double>& caps0)
      : model_(model), econ_(econ), grid_(grid), scheme_(options.scheme),
        x_(x0), caps_(caps0), payoff_(caps0.size() + 1, 0.0) {}

  double price() const { return x_; }
  const std::vector<double>& caps() const { return caps_; }
  const std::vector<double>& payoff() const { return payoff_; }

  double total() const {
    double s = 0.0;
    for (double c : caps_) s += c;
    return s;
  }

  // Applies the control at step k (caps -> new_caps) and charges its cost.
  void adjust(std::size_t k, const std::vector<double>& new_caps) {
    const double d = grid_.discount[k];
    double total_inc = 0.0;
    for (std::size_t i = 0; i < caps_.size(); ++i) {
      const double inc = new_caps[i] - caps_[i];
      payoff_[i + 1] -= econ_.cost_c * d * inc;
      total_inc += inc;
    }
    payoff_[0] -= econ_.cost_c * d * total_inc;
    caps_ = new_caps;
  }

  // Advances the price over [t_k, t_k+1] with the current capacities.
  void advance(std::size_t k, double eps) {
    const double y = total();
    const double mean = model_.zeta - model_.beta * y;
    double next;
    if (scheme_ == SimScheme::exact) {
      next = mean + (x_ - mean) * grid_.decay + grid_.exact_sd * eps;
    } else {
      next = x_ + model_.kappa * (mean - x_) * grid_.dt + model_.sigma * std::sqrt(grid_.dt) * eps;
    }
    const double w = 0.5 * grid_.dt * econ_.conv_a *
                     (grid_.discount[k] * x_ + grid_.discount[k + 1] * next);
    payoff_[0] += w * y;
    for (std::size_t i = 0; i < caps_.size(); ++i) payoff_[i + 1] += w * caps_[i];
    x_ = next;
  }

  // exp(-rho T) times the value of holding the current capacities forever.
  void close() {
    const double y = total();
    const double rk = econ_.rho + model_.kappa;
    const double mean = model_.zeta - model_.beta * y;
    const double per_mw = econ_.conv_a * (x_ / rk + mean * model_.kappa / (econ_.rho * rk));
    const double d = grid_.discount[grid_.steps];
    payoff_[0] += d * per_mw * y;
    for (std::size_t i = 0; i < caps_.size(); ++i) payoff_[i + 1] += d * per_mw * caps_[i];
  }

 private:
  const PriceModel& model_;
  const EconParams& econ_;
  const Grid& grid_;
  SimScheme scheme_;
  double x_;
  std::vector<double> caps_;
  std::vector<double> payoff_;
};

// Controller: (step, price, caps before, caps after&).
template <class Control>
std::vector<double> run_sample(const PriceModel& model, const EconParams& econ, const Grid& grid,
                               const SimOptions& options, double x0,
                               const std::vector<double>& caps0, std::uint64_t stream_seed,
                               Control&& control) {
  std::mt19937_64 gen(stream_seed);
  std::normal_distribution<double> normal;
  const int n_mirror = options.antithetic ? 2 : 1;
  std::vector<PathState> paths;
  paths.reserve(2);
  for (int p = 0; p < n_mirror; ++p) paths.emplace_back(model, econ, grid, options, x0, caps0);
  std::vector<double> next(caps0.size());
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double eps = normal(gen);
    for (int p = 0; p < n_mirror; ++p) {
      auto& path = paths[static_cast<std::size_t>(p)];
      control(k, path.price(), path.caps(), next);
      path.adjust(k, next);
      path.advance(k, p == 0 ? eps : -eps);
    }
  }
  std::vector<double> out(caps0.size() + 1, 0.0);
  for (auto& path : paths) {
    if (options.terminal_closure) path.close();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += path.payoff()[i];
  }
  for (double& v : out) v /= static_cast<double>(n_mirror);
  return out;
}

// Runs every sample, possibly on several threads, and returns
// samples[producer+1][sample] with index 0 the aggregate.
template <class Control>
std::vector<std::vector<double>> run_all(const PriceModel& model, const EconParams& econ,
                                         const Grid& grid, const SimOptions& options, double x0,
                                         const std::vector<double>& caps0,
                                         const Control& control) {
  if (options.n_paths == 0) throw InputError("n_paths must be positive");
  if (options.antithetic && options.n_paths % 2 != 0)
    throw InputError("n_paths must be even with antithetic variates");
  const std::size_t n_samples = options.antithetic ? options.n_paths / 2 : options.n_paths;
  std::vector<std::vector<double>> samples(caps0.size() + 1, std::vector<double>(n_samples));

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_samples)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      auto values = run_sample(model, econ, grid, options, x0, caps0,
                               substream_seed(options.seed, s), control);
      for (std::size_t i = 0; i < values.size(); ++i) samples[i][s] = values[i];
    }
  };
  if (threads == 1) {
    work(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n_samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(n_samples, t * chunk);
      const std::size_t end = std::min(n_samples, begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return samples;
}

double tail_bound_for(const PriceModel& model, const EconParams& econ, double x0, double horizon) {
  const double scale =
      std::max(std::abs(model.zeta), std::abs(x0)) + 3.0 * model.sigma / std::sqrt(2.0 * model.kappa);
  return std::exp(-econ.rho * horizon) * econ.conv_a * econ.theta * scale / econ.rho;
}

auto single_control(const InstallationRule& rule, double y0, double theta) {
  return [&rule, y0, theta](std::size_t k, double price, const std::vector<double>& caps,
                            std::vector<double>& next) {
    next[0] = rule.target(k, price, caps[0], y0, theta);
  };
}

void check_model(const PriceModel& model, const EconParams& econ) {
  model.validate();
  econ.validate();
}

}  // namespace

Classification classify(double x, double y, const FreeBoundary& fb) {
  check_capacity(y, fb.theta());
  return classify_with(x, y, fb.theta(), boundary_value(fb, y));
}

Classification classify(double x, double y, const BoundaryIndex& fb) {
  check_capacity(y, fb.theta());
  return classify_with(x, y, fb.theta(), fb.value(y));
}

InstallationRule InstallationRule::never() { return {}; }

InstallationRule InstallationRule::immediate() {
  InstallationRule r;
  r.kind_ = Kind::immediate;
  return r;
}

InstallationRule InstallationRule::boundary(const FreeBoundary& fb) {
  InstallationRule r;
  r.kind_ = Kind::boundary;
  r.boundary_ = std::make_shared<const BoundaryIndex>(fb);
  return r;
}

InstallationRule InstallationRule::schedule(std::vector<double> cumulative) {
  if (cumulative.empty()) throw InputError("installation schedule is empty");
  if (cumulative.front() < 0.0 || !std::is_sorted(cumulative.begin(), cumulative.end()))
    throw InputError("installation schedule must be nonnegative and nondecreasing");
  InstallationRule r;
  r.kind_ = Kind::schedule;
  r.schedule_ = std::move(cumulative);
  return r;
}

double InstallationRule::target(std::size_t step, double price, double current, double y0,
                                double theta) const {
  double want = current;
  switch (kind_) {
    case Kind::never:
      break;
    case Kind::immediate:
      want = theta;
      break;
    case Kind::boundary:
      if (boundary_->is_constant()) {
        if (price >= boundary_->value(0.0)) want = theta;
      } else {
        want = boundary_->inverse(price);
      }
      break;
    case Kind::schedule:
      want = y0 + schedule_[std::min(step, schedule_.size() - 1)];
      break;
  }
  return std::min(theta, std::max(current, want));
}

double SimOptions::resolved_horizon(double rho) const {
  return horizon > 0.0 ? horizon : std::log(1e4) / rho;
}

std::size_t SimOptions::steps(double rho) const {
  return static_cast<std::size_t>(std::ceil(resolved_horizon(rho) / dt_sim - 1e-9));
}

StrategyPath simulate_rule(const PriceModel& model, const EconParams& econ,
                           const InstallationRule& rule, double x0, double y0,
                           const SimOptions& options) {
  check_model(model, econ);
  check_capacity(y0, econ.theta);
  if (!std::isfinite(x0)) throw InputError("x0 must be finite");
  const Grid grid(model, econ, options);
  SimOptions single = options;
  single.antithetic = false;

  StrategyPath path;
  path.seed = options.seed;
  path.dt_sim = grid.dt;
  path.times.resize(grid.steps + 1);
  path.prices.resize(grid.steps + 1);
  path.capacities.resize(grid.steps + 1);
  path.increments.resize(grid.steps);

  std::mt19937_64 gen(substream_seed(options.seed, 0));
  std::normal_distribution<double> normal;
  PathState state(model, econ, grid, single, x0, {y0});
  std::vector<double> next(1);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double eps = normal(gen);
    path.times[k] = static_cast<double>(k) * grid.dt;
    path.prices[k] = state.price();
    path.capacities[k] = state.caps()[0];
    next[0] = rule.target(k, state.price(), state.caps()[0], y0, econ.theta);
    path.increments[k] = next[0] - state.caps()[0];
    state.adjust(k, next);
    state.advance(k, eps);
    if (!std::isfinite(state.price()))
      throw NumericalError("simulated price became non-finite at step " + std::to_string(k));
  }
  path.times[grid.steps] = static_cast<double>(grid.steps) * grid.dt;
  path.prices[grid.steps] = state.price();
  path.capacities[grid.steps] = state.caps()[0];
  return path;
}

StrategyPath simulate_optimal(const PriceModel& model, const EconParams& econ,
                              const FreeBoundary& fb, double x0, double y0,
                              const SimOptions& options) {
  if (model.beta > 0.0 && fb.kind == BoundaryKind::constant)
    throw InputError("a constant boundary cannot drive an impacted (beta > 0) model");
  if (model.beta == 0.0 && fb.kind == BoundaryKind::curve)
    throw InputError("a curved boundary requires beta > 0");
  if (fb.theta() != econ.theta)
    throw InputError("boundary theta does not match the economic parameters");
  return simulate_rule(model, econ, InstallationRule::boundary(fb), x0, y0, options);
}

PayoffEstimate payoff_mc(const PriceModel& model, const EconParams& econ,
                         const InstallationRule& rule, double x0, double y0,
                         const SimOptions& options) {
  check_model(model, econ);
  check_capacity(y0, econ.theta);
  if (!std::isfinite(x0)) throw InputError("x0 must be finite");
  const Grid grid(model, econ, options);
  auto samples = run_all(model, econ, grid, options, x0, {y0},
                         single_control(rule, y0, econ.theta));
  return summarize(samples[1], options.n_paths, grid.horizon,
                   tail_bound_for(model, econ, x0, grid.horizon), options.seed);
}

double value_beta0(double x, double y, double x_bar, const EconParams& econ,
                   const PriceModel& model, const PsiConfig& config) {
  if (model.beta != 0.0) throw InputError("value_beta0 requires beta = 0");
  check_capacity(y, econ.theta);
  if (x >= x_bar)
    return r_baseline(x, econ.theta, econ, model, false) - econ.cost_c * (econ.theta - y);
  const double log_ratio =
      psi_moments(x, config, 0).log_value(0) - psi_moments(x_bar, config, 1).log_value(1);
  const double a_psi = econ.conv_a * (econ.theta - y) / (econ.rho + model.kappa) *
                       std::exp(log_ratio);
  return a_psi + r_baseline(x, y, econ, model, false);
}

ComparisonReport compare_realized(const std::vector<double>& prices,
                                  const std::vector<double>& capacities,
                                  const FreeBoundary& fb) {
  if (prices.size() != capacities.size())
    throw InputError("compare_realized: price and capacity series differ in length (" +
                     std::to_string(prices.size()) + " vs " + std::to_string(capacities.size()) +
                     ")");
  const BoundaryIndex index(fb);
  const double theta = index.theta();
  ComparisonReport report;
  const std::size_t n = prices.size();
  report.labels.reserve(n);
  report.depth_series.reserve(n);
  report.missed.reserve(n);
  std::size_t missed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = prices[i];
    const double y = capacities[i];
    check_capacity(y, theta);
    const auto label = classify(x, y, index);
    report.labels.push_back(label);
    report.depth_series.push_back(x - index.value(y));
    bool miss = false;
    if (label.region == Region::installing && !label.saturated) {
      ++report.installing_count;
      const double target = index.is_constant() ? theta : index.inverse(x);
      miss = i + 1 >= n || capacities[i + 1] < target;
    }
    report.missed.push_back(miss);
    if (miss) ++missed;
  }
  report.missed_fraction = n ? static_cast<double>(missed) / static_cast<double>(n) : 0.0;
  return report;
}

double SocialPlannerProfile::gamma() const {
  double s = 0.0;
  for (double y : initial_capacities) s += y;
  return s;
}

std::vector<double> SocialPlannerProfile::aggregate_nu() const {
  std::size_t len = 0;
  for (const auto& s : strategies) len = std::max(len, s.size());
  std::vector<double> nu(len, 0.0);
  for (const auto& s : strategies)
    for (std::size_t k = 0; k < len; ++k) nu[k] += s.empty() ? 0.0 : s[std::min(k, s.size() - 1)];
  return nu;
}

void SocialPlannerProfile::validate(double theta) const {
  if (initial_capacities.empty()) throw InputError("social planner profile has no producers");
  if (strategies.size() != initial_capacities.size())
    throw InputError("one installation strategy per producer is required");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (initial_capacities[i] < 0.0)
      throw InputError("negative initial capacity for producer " + std::to_string(i));
    const auto& s = strategies[i];
    if (s.empty() || s.front() < 0.0 || !std::is_sorted(s.begin(), s.end()))
      throw InputError("strategy of producer " + std::to_string(i) +
                       " must be nonempty, nonnegative and nondecreasing");
  }
  const double g = gamma();
  for (double v : aggregate_nu())
    if (g + v > theta * (1.0 + 1e-12))
      throw InputError("social planner profile breaches the capacity cap theta");
}

SocialPayoff aggregate_social(const SocialPlannerProfile& profile, const PriceModel& model,
                              const EconParams& econ, double x0, const SimOptions& options) {
  check_model(model, econ);
  profile.validate(econ.theta);
  if (!std::isfinite(x0)) throw InputError("x0 must be finite");
  const Grid grid(model, econ, options);
  const auto& y0 = profile.initial_capacities;
  auto control = [&profile, &y0](std::size_t k, double, const std::vector<double>& caps,
                                 std::vector<double>& next) {
    for (std::size_t i = 0; i < caps.size(); ++i) {
      const auto& s = profile.strategies[i];
      next[i] = std::max(caps[i], y0[i] + s[std::min(k, s.size() - 1)]);
    }
  };
  auto samples = run_all(model, econ, grid, options, x0, y0, control);
  const double tail = tail_bound_for(model, econ, x0, grid.horizon);
  SocialPayoff out;
  out.aggregate = summarize(samples[0], options.n_paths, grid.horizon, tail, options.seed);
  for (std::size_t i = 1; i < samples.size(); ++i)
    out.producers.push_back(
        summarize(samples[i], options.n_paths, grid.horizon, tail, options.seed));
  return out;
}

bool pareto_dominates(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("pareto_dominates: length mismatch");
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

}  // namespace optinstall
