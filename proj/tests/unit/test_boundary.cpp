#include <gtest/gtest.h>

#include <cmath>

#include "optinstall/boundary.hpp"
#include "optinstall/error.hpp"
#include "optinstall/oufn.hpp"
#include "zones.hpp"

using namespace optinstall;
using namespace optinstall::testing;

namespace {

PsiConfig config_of(const ZoneCase& z) { return PsiConfig::from(z.model, z.econ); }

FreeBoundary coarse_north(double h = 50.0, BoundaryOptions o = {}) {
  const auto z = north();
  return integrate_free_boundary(z.econ, z.model, config_of(z), h, o);
}

}  // namespace

TEST(Bracket, ConstantCaseEndpoints) {
  const auto z = central_north();
  const auto cfg = config_of(z);
  const auto br = bracket(z.econ, z.model, cfg);
  const double lo =
      z.econ.c_hat() * (z.econ.rho + z.model.kappa) - z.model.zeta * z.model.kappa / z.econ.rho;
  EXPECT_NEAR(br.lo, lo, 1e-9 * std::abs(lo));
  EXPECT_NEAR(br.hi, lo + psi(lo, 0, cfg) / psi(lo, 1, cfg), 1e-6);
  EXPECT_GT(br.hi, br.lo);
  EXPECT_EQ(br.widenings, 0);
  EXPECT_GT(kCentralNorthBar, br.lo);
  EXPECT_LT(kCentralNorthBar, br.hi);
}

TEST(ConstantBoundary, RootOfH) {
  const auto z = central_north();
  const auto cfg = config_of(z);
  BoundaryOptions o;
  const auto sol = solve_constant_boundary(z.econ, z.model, cfg, o);
  EXPECT_GT(h_eval(sol.x - o.tol, z.econ, z.model, cfg), 0.0);
  EXPECT_LT(h_eval(sol.x + o.tol, z.econ, z.model, cfg), 0.0);
  EXPECT_LE(std::abs(sol.residual), o.tol);
  EXPECT_NEAR(sol.x, kCentralNorthBar, 0.1 * kCentralNorthBar);
}

TEST(ConstantBoundary, CostComparativeStatics) {
  auto z = central_north();
  const double base = solve_constant_boundary(z.econ, z.model, config_of(z)).x;
  const double c_hat = z.econ.c_hat();
  z.econ.cost_c *= 2.0;
  EXPECT_DOUBLE_EQ(z.econ.c_hat(), 2.0 * c_hat);
  EXPECT_GT(solve_constant_boundary(z.econ, z.model, config_of(z)).x, base);
}

TEST(ConstantBoundary, RequiresNoImpact) {
  const auto z = north();
  EXPECT_THROW(solve_constant_boundary(z.econ, z.model, config_of(z)), InputError);
}

TEST(Terminal, EqualsConstantWithoutImpact) {
  const auto z = central_north();
  const double a = solve_terminal(z.econ, z.model, config_of(z)).x;
  const double b = solve_constant_boundary(z.econ, z.model, config_of(z)).x;
  EXPECT_NEAR(a / b, 1.0, 1e-6);
}

TEST(Terminal, InsideBracketForBothVariants) {
  for (const auto& z : {north(), sardinia()}) {
    for (auto coeff : {RhatYCoeff::rho_plus_2kappa, RhatYCoeff::two_kappa}) {
      BoundaryOptions o;
      o.rhat_y_coeff = coeff;
      const auto br = bracket(z.econ, z.model, config_of(z), o);
      const auto sol = solve_terminal(z.econ, z.model, config_of(z), o);
      EXPECT_GT(sol.x, br.lo);
      EXPECT_LT(sol.x, br.hi);
      EXPECT_LT(terminal_target(sol.x - 1e-3, z.econ, z.model, config_of(z), coeff) *
                    terminal_target(sol.x + 1e-3, z.econ, z.model, config_of(z), coeff),
                0.0);
    }
  }
  // The smaller y-coefficient lowers the terminal value.
  const auto z = north();
  BoundaryOptions two;
  two.rhat_y_coeff = RhatYCoeff::two_kappa;
  EXPECT_LT(solve_terminal(z.econ, z.model, config_of(z), two).x,
            solve_terminal(z.econ, z.model, config_of(z)).x);
}

TEST(FreeBoundary, ZeroImpactDegeneratesToConstant) {
  const auto z = central_north();
  const auto fb = integrate_free_boundary(z.econ, z.model, config_of(z), 100.0);
  EXPECT_EQ(fb.kind, BoundaryKind::constant);
  for (double f : fb.f_values) EXPECT_EQ(f, fb.terminal_x);
}

TEST(FreeBoundary, GridLayout) {
  const auto fb = coarse_north(300.0);
  EXPECT_EQ(fb.kind, BoundaryKind::curve);
  EXPECT_EQ(fb.y_grid.front(), 0.0);
  EXPECT_EQ(fb.theta(), 6500.0);
  // 6500 = 21 * 300 + 200: one shortened step at the bottom.
  ASSERT_EQ(fb.y_grid.size(), 23u);
  EXPECT_NEAR(fb.y_grid[1], 200.0, 1e-9);
  EXPECT_EQ(fb.fhat_values.back(), fb.terminal_x);
  for (std::size_t k = 0; k < fb.y_grid.size(); ++k)
    EXPECT_NEAR(fb.f_values[k], fb.fhat_values[k] - fb.beta * fb.y_grid[k], 1e-9);
  EXPECT_TRUE(fb.is_nondecreasing());
  EXPECT_NO_THROW(fb.validate());
}

TEST(FreeBoundary, StepValidation) {
  const auto z = north();
  EXPECT_THROW(integrate_free_boundary(z.econ, z.model, config_of(z), 0.0), InputError);
  EXPECT_THROW(integrate_free_boundary(z.econ, z.model, config_of(z), -1.0), InputError);
  EXPECT_THROW(integrate_free_boundary(z.econ, z.model, config_of(z), 7000.0), InputError);
}

TEST(FreeBoundary, Deterministic) {
  const auto a = coarse_north();
  const auto b = coarse_north();
  EXPECT_EQ(a.f_values, b.f_values);
  EXPECT_EQ(a.fhat_values, b.fhat_values);
  EXPECT_EQ(a.terminal_x, b.terminal_x);
}

TEST(FreeBoundary, FirstOrderConvergence) {
  const double f1 = coarse_north(2.0).f_values.front();
  const double f2 = coarse_north(1.0).f_values.front();
  const double f3 = coarse_north(0.5).f_values.front();
  const double order = std::log2(std::abs(f1 - f2) / std::abs(f2 - f3));
  EXPECT_NEAR(order, 1.0, 0.2);
}

// The two first-order schemes err on opposite sides of the fine-grid value.
TEST(FreeBoundary, ImplicitSchemeBracketsFineSolution) {
  BoundaryOptions o;
  o.scheme = OdeScheme::implicit_euler;
  const auto imp = coarse_north(10.0, o);
  const auto exp = coarse_north(10.0);
  const double fine = coarse_north(1.0).f_values.front();
  EXPECT_TRUE(imp.is_nondecreasing());
  EXPECT_LT(exp.f_values.front(), fine);
  EXPECT_GT(imp.f_values.front(), fine);
}

TEST(FreeBoundary, VariantTagsRecorded) {
  BoundaryOptions o;
  o.rhat_y_coeff = RhatYCoeff::two_kappa;
  EXPECT_EQ(coarse_north(500.0, o).variant_tags.rhat_y_coeff, RhatYCoeff::two_kappa);
  EXPECT_EQ(coarse_north(500.0).variant_tags.rhat_y_coeff, RhatYCoeff::rho_plus_2kappa);
}

namespace {

FreeBoundary handmade() {
  FreeBoundary fb;
  fb.kind = BoundaryKind::curve;
  fb.y_grid = {0.0, 10.0, 20.0, 30.0};
  fb.f_values = {50.0, 60.0, 60.0, 80.0};
  fb.fhat_values = fb.f_values;
  fb.terminal_x = 80.0;
  return fb;
}

}  // namespace

TEST(BoundaryLookup, ValueInterpolates) {
  const auto fb = handmade();
  EXPECT_EQ(boundary_value(fb, 0.0), 50.0);
  EXPECT_EQ(boundary_value(fb, 5.0), 55.0);
  EXPECT_EQ(boundary_value(fb, 25.0), 70.0);
  EXPECT_EQ(boundary_value(fb, 30.0), 80.0);
}

TEST(BoundaryLookup, InverseClampsAndHitsGrid) {
  const auto fb = handmade();
  EXPECT_EQ(boundary_inverse(fb, 10.0), 0.0);
  EXPECT_EQ(boundary_inverse(fb, 50.0), 0.0);
  EXPECT_EQ(boundary_inverse(fb, 90.0), 30.0);
  EXPECT_EQ(boundary_inverse(fb, 80.0), 30.0);
  EXPECT_EQ(boundary_inverse(fb, 55.0), 5.0);
  EXPECT_EQ(boundary_inverse(fb, 60.0), 10.0);  // smallest y on the flat piece
  EXPECT_EQ(boundary_inverse(fb, 70.0), 25.0);
}

TEST(BoundaryLookup, IndexAgreesWithFreeFunctions) {
  const auto fb = coarse_north(250.0);
  const BoundaryIndex idx(fb);
  EXPECT_FALSE(idx.is_constant());
  EXPECT_EQ(idx.theta(), fb.theta());
  for (double y = 0.0; y <= 6500.0; y += 137.0) EXPECT_EQ(idx.value(y), boundary_value(fb, y));
  for (double p = 50.0; p < 1100.0; p += 23.0) EXPECT_EQ(idx.inverse(p), boundary_inverse(fb, p));
  for (std::size_t k = 0; k < fb.y_grid.size(); ++k)
    EXPECT_EQ(boundary_inverse(fb, fb.f_values[k]) <= fb.y_grid[k], true);
}

TEST(BoundaryLookup, RejectsNonMonotone) {
  auto fb = handmade();
  fb.f_values[2] = 55.0;
  EXPECT_THROW(boundary_inverse(fb, 57.0), NumericalError);
  EXPECT_THROW(BoundaryIndex{fb}, NumericalError);
}

TEST(BoundaryLookup, ConstantBoundary) {
  const auto fb = constant_boundary(29.0, 6500.0);
  EXPECT_EQ(fb.kind, BoundaryKind::constant);
  EXPECT_EQ(boundary_value(fb, 1234.0), 29.0);
  EXPECT_EQ(boundary_inverse(fb, 28.0), 0.0);
  EXPECT_EQ(boundary_inverse(fb, 30.0), 6500.0);
  EXPECT_TRUE(BoundaryIndex(fb).is_constant());
}
