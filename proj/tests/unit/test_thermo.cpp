#include <gtest/gtest.h>

#include <cmath>

#include <fareyphase/thermo.hpp>

using namespace fareyphase;

namespace {

ThermoOptions quick() {
  ThermoOptions o;
  o.dims = {256, 512};
  return o;
}

} // namespace

TEST(FreeEnergy, Examples) {
  EXPECT_EQ(free_energy(1.5, LambdaSource::matrix), 0.0);
  EXPECT_EQ(free_energy(1.0, LambdaSource::ratio), 0.0);
  // beta f -> -ln 2
  const double b = 1e-6;
  EXPECT_NEAR(b * free_energy(b, LambdaSource::matrix, quick()), -std::log(2.0), 1e-3);
  const double lam = solve_spectrum(0.5, 512).lambda;
  EXPECT_NEAR(free_energy(0.5, LambdaSource::matrix, quick()), -2.0 * std::log(lam), 1e-9);
  EXPECT_THROW(free_energy(0.0, LambdaSource::matrix), domain_error);
  EXPECT_THROW(free_energy(-1.0, LambdaSource::matrix), domain_error);
}

TEST(FreeEnergy, NegativeBelowTransition) {
  for (double b : {0.2, 0.6, 0.9})
    EXPECT_LT(free_energy(b, LambdaSource::matrix, quick()), 0.0);
}

TEST(FreeEnergy, SpinChainConvention) {
  const auto o = quick();
  EXPECT_EQ(free_energy(1.2, LambdaSource::matrix, o, Convention::spin_chain),
            free_energy(0.6, LambdaSource::matrix, o));
  EXPECT_EQ(free_energy(2.0, LambdaSource::matrix, o, Convention::spin_chain), 0.0);
  EXPECT_LT(free_energy(1.98, LambdaSource::matrix, o, Convention::spin_chain), 0.0);
}

TEST(FreeEnergy, SourcesAgree) {
  ThermoOptions o = quick();
  o.ratio_level = 24;
  EXPECT_NEAR(free_energy(0.5, LambdaSource::ratio, o), free_energy(0.5, LambdaSource::matrix, o),
              1e-4);
}

TEST(LambdaEstimate, EscalatesNearOne) {
  const auto far = lambda_estimate(0.5, LambdaSource::matrix);
  EXPECT_EQ(far.dim, 256);
  EXPECT_TRUE(far.resolved);
  const auto near = lambda_estimate(0.99, LambdaSource::matrix);
  EXPECT_GT(near.dim, 256);
  EXPECT_TRUE(near.resolved);
  EXPECT_LT(near.uncertainty / near.lambda, 0.1 * std::log(near.lambda));
  EXPECT_THROW(lambda_estimate(1.0, LambdaSource::matrix), domain_error);
}

TEST(FiniteSize, Examples) {
  for (int k : {2, 6, 14}) {
    const double f = finite_size_free_energy(Model::farey_tree, k, 1.0);
    EXPECT_GT(f, 0.0);
    EXPECT_TRUE(std::isfinite(f));
  }
  EXPECT_LT(std::abs(finite_size_free_energy(Model::knauf, 20, 2.0)),
            std::abs(finite_size_free_energy(Model::knauf, 10, 2.0)));
  // chain beta = 4: Z_k -> zeta(3)/zeta(4)
  EXPECT_NEAR(finite_size_free_energy(Model::knauf, 20, 4.0), -std::log(zeta_ratio(2.0)) / 80.0,
              5e-6);
  // O(1/k) approach; the level increment converges much faster
  const double f = free_energy(0.5, LambdaSource::matrix, quick());
  double prev_gap = 1.0;
  for (int k : {8, 16, 24}) {
    const double gap = std::abs(finite_size_free_energy(Model::farey_tree, k, 0.5) - f);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  const double increment =
      -std::log(z_farey_tree(24, 0.5).value / z_farey_tree(23, 0.5).value) / 0.5;
  EXPECT_NEAR(increment, f, 0.05);
  EXPECT_THROW(finite_size_free_energy(Model::knauf_even, 5, 1.0), domain_error);
  EXPECT_THROW(finite_size_free_energy(Model::knauf, 1, 1.0), domain_error);
}

TEST(SpecificHeat, PositiveAndGrowing) {
  const auto c5 = specific_heat(0.5);
  EXPECT_GT(c5.value, 0.0);
  EXPECT_TRUE(std::isfinite(c5.value));
  const auto c9 = specific_heat(0.9);
  const auto c99 = specific_heat(0.99);
  EXPECT_GT(c99.value, c9.value);
}

TEST(SpecificHeat, StableUnderStepHalving) {
  const auto a = specific_heat(0.8, 1e-3);
  const auto b = specific_heat(0.8, 5e-4);
  EXPECT_NEAR(a.value, b.value, 10.0 * std::max(a.richardson_error, 1e-6 * std::abs(a.value)));
  EXPECT_EQ(default_step(0.5), 1e-3);
  EXPECT_NEAR(default_step(0.9995), 5e-5, 1e-15);
}

TEST(SpecificHeat, Errors) {
  EXPECT_THROW(specific_heat(0.999, 0.01), domain_error);
  EXPECT_THROW(specific_heat(1.0), domain_error);
  EXPECT_THROW(specific_heat(0.5, -1e-3), domain_error);
}

TEST(Curve, ShapeAndConcurrency) {
  ThermoOptions o = quick();
  const std::vector<double> grid{0.3, 0.6, 0.9, 1.0, 1.3};
  const auto c1 = thermo_curve(grid, LambdaSource::matrix, o);
  o.threads = 3;
  const auto c3 = thermo_curve(grid, LambdaSource::matrix, o);
  ASSERT_EQ(c1.points.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(c1.points[i].beta, grid[i]);
    EXPECT_EQ(c1.points[i].f, c3.points[i].f);
    EXPECT_EQ(c1.points[i].c, c3.points[i].c);
  }
  EXPECT_EQ(c1.points[3].f, 0.0);
  EXPECT_EQ(c1.points[4].f, 0.0);
  double prev = -1e300;
  for (std::size_t i = 0; i < 3; ++i) {
    const double phi = grid[i] * c1.points[i].f;
    EXPECT_LT(c1.points[i].f, 0.0);
    EXPECT_GT(phi, prev);
    prev = phi;
  }
}

TEST(Prellberg, FitOnWindow) {
  const auto fit = prellberg_fit({3e-3, 1e-2, 3e-2});
  EXPECT_GT(fit.c_hat, 0.0);
  for (const auto& p : fit.points)
    EXPECT_GT(p.c_eps, 0.0);
  EXPECT_LT(fit.stability, 0.25);
  EXPECT_LT(fit.heat_spread, 2.0);
  EXPECT_EQ(fit.eps_min, 3e-3);
  EXPECT_EQ(fit.eps_max, 3e-2);
}

TEST(Prellberg, Refusals) {
  EXPECT_THROW(prellberg_fit({}), domain_error);
  EXPECT_THROW(prellberg_fit({0.5}), domain_error);
  ThermoOptions o;
  o.dims = {256};
  try {
    prellberg_fit({1e-3}, o);
    FAIL() << "expected convergence_error";
  } catch (const convergence_error& e) {
    EXPECT_NE(std::string(e.what()).find("M>="), std::string::npos);
  }
}

TEST(Prellberg, SpreadShrinksTowardTransition) {
  // |c(eps1)/c(eps2) - 1| over equal log-width windows
  auto spread = [](double a, double b) {
    const auto f = prellberg_fit({a, b});
    return std::abs(f.points[0].c_eps / f.points[1].c_eps - 1.0);
  };
  EXPECT_LT(spread(3e-3, 1e-2), spread(3e-2, 1e-1));
}

TEST(Hausdorff, Examples) {
  const auto rep = hausdorff_check({0.9, 1.0, 1.1}, {10, 14, 20});
  EXPECT_TRUE(rep.consistent);
  EXPECT_TRUE(rep.violations.empty());
  ASSERT_EQ(rep.rows.size(), 9u);
  EXPECT_GT(rep.rows[2].z, rep.rows[0].z);
  EXPECT_LT(rep.rows[8].z, rep.rows[6].z);
  for (int i = 3; i < 6; ++i) {
    EXPECT_GT(rep.rows[i].z, 0.0);
    EXPECT_LT(rep.rows[i].z, 1.0);
  }
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}
