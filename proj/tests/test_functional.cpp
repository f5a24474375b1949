#include <cmath>

#include "doctest.h"
#include "tmlab/dilation.hpp"
#include "tmlab/functional.hpp"
#include "tmlab/towers.hpp"

using namespace tmlab;

TEST_CASE("nonlinearity providers") {
  const auto model = model_nonlinearity();
  CHECK(model.g(2.0) == 2.0);
  CHECK(model.g_prime(2.0) == 1.0);
  CHECK(model.F_closed(0.5) == doctest::Approx(std::expm1(M_PI)));
  CHECK(check_growth_conditions(model));

  const auto cubic = cubic_nonlinearity();
  CHECK(check_growth_conditions(cubic));
  // closed form against adaptive quadrature
  Nonlinearity numeric = cubic;
  numeric.F_closed = nullptr;
  for (double u : {0.3, 0.9, 1.7}) {
    CHECK(big_F(numeric, u) ==
          doctest::Approx(cubic.F_closed(u)).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)nonlinearity_by_name("nope"), SpecError);
}

TEST_CASE("evaluate_J on elementary inputs") {
  const auto nl = model_nonlinearity();
  const LogGrid grid = make_uniform_grid(40.0, (1u << 16) + 1);

  SUBCASE("zero function") {
    const auto zero = sample_function(grid, [](double) { return 0.0; });
    CHECK(evaluate_J(zero, nl) == 0.0);
    CHECK(nonlinear_mass(zero, nl) == 0.0);
  }

  SUBCASE("constant one: closed-form nonlinear mass") {
    const auto one = sample_function(grid, [](double) { return 1.0; });
    const double expected = std::expm1(kFourPi) / 8.0;
    CHECK(nonlinear_mass(one, nl) ==
          doctest::Approx(expected).epsilon(1e-6));
  }

  SUBCASE("small amplitude reduces to the quadratic functional") {
    for (double amp : {1e-3, 1e-4}) {
      const auto u = sample_function(grid, [&](double t) {
        return amp * std::min(t, 1.0) * std::exp(-0.3 * t);
      });
      const double J = evaluate_J(u, nl);
      // 1/2 |grad u|^2 - 1/2 |u|^2_{L2}, the L2 norm by the same trapezoid
      std::vector<double> sq(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        sq[i] = u.value(i) * u.value(i) * std::exp(-2.0 * grid[i]);
      const double l2 = 2.0 * M_PI * trapezoid(grid, sq);
      const double quadratic = 0.5 * dirichlet_energy(u) - 0.5 * l2;
      // quartic Taylor remainder scales like sup|u|^2
      const double tol = 3.0 * 2.0 * M_PI * amp * amp + 1e-12;
      CHECK(std::abs(J - quadratic) / std::abs(J) <= tol);
    }
  }

  SUBCASE("envelope-violating input overflows with a diagnostic") {
    const auto big = sample_function(grid, [](double) { return 10.0; });
    CHECK_THROWS_AS((void)nonlinear_mass(big, nl), NumericError);
  }
}

TEST_CASE("ap_residual basics") {
  const auto nl = model_nonlinearity();

  SUBCASE("zero function has zero residual") {
    const LogGrid grid = make_uniform_grid(20.0, 4097);
    const auto zero = sample_function(grid, [](double) { return 0.0; });
    CHECK(ap_residual(zero, nl) == doctest::Approx(0.0));
  }

  SUBCASE("an undilated tower is not critical") {
    const auto tower = build_tower(SignedClosedSet::from_points({1.0}, {+1}));
    const auto u = sample(tower, default_tower_grid(tower, (1u << 15) + 1));
    CHECK(ap_residual(u, nl) > 1e-3);
  }

  SUBCASE("self-convergence under factor-2 refinement") {
    const auto tower = build_tower(SignedClosedSet::from_points({2.0}, {+1}));
    const auto coarse =
        sample(tower, default_tower_grid(tower, (1u << 15) + 1));
    const auto fine = sample(tower, default_tower_grid(tower, (1u << 16) + 1));
    const double a = ap_residual(coarse, nl);
    const double b = ap_residual(fine, nl);
    CHECK(std::abs(a - b) / b <= 1e-2);
  }
}

TEST_CASE("concentration_profile") {
  SUBCASE("undilated Moser carries no mass inside r < 1/e") {
    const auto tower = build_tower(SignedClosedSet::from_points({1.0}, {+1}));
    const auto u = sample(tower, default_tower_grid(tower, (1u << 14) + 1));
    const auto rep = concentration_profile(u, {std::exp(-1.0)});
    REQUIRE(rep.mass_fraction.size() == 1);
    CHECK(rep.mass_fraction[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(rep.zero_function);
  }

  SUBCASE("blow-up pushes all mass inside any fixed probe") {
    const auto tower = build_tower(SignedClosedSet::from_points({1.0}, {+1}));
    const LogGrid grid =
        grid_with_nodes(400.0, (1u << 15) + 1, {1.0, 16.0, 64.0});
    const auto u = sample_function(grid, [&](double t) {
      return std::sqrt(16.0) * tower.evaluate(t / 16.0);
    });
    const auto rep = concentration_profile(u, {std::exp(-1.0)});
    CHECK(rep.mass_fraction[0] > 0.9);
    const auto u2 = sample_function(grid, [&](double t) {
      return std::sqrt(64.0) * tower.evaluate(t / 64.0);
    });
    const auto rep2 = concentration_profile(u2, {std::exp(-1.0)});
    CHECK(rep2.mass_fraction[0] > rep.mass_fraction[0]);
  }

  SUBCASE("monotone in rho and flags the zero function") {
    const auto tower = build_tower(SignedClosedSet::from_points({2.0}, {+1}));
    const auto u = sample(tower, default_tower_grid(tower, (1u << 14) + 1));
    std::vector<double> rhos;
    for (int k = 1; k <= 9; ++k) rhos.push_back(0.1 * k);
    const auto rep = concentration_profile(u, rhos);
    // rho increasing means t threshold decreasing: fractions nondecreasing
    for (std::size_t i = 0; i + 1 < rhos.size(); ++i)
      CHECK(rep.mass_fraction[i + 1] >= rep.mass_fraction[i] - 1e-10);

    const auto zero = sample_function(u.grid(), [](double) { return 0.0; });
    CHECK(concentration_profile(zero, rhos).zero_function);
    CHECK_THROWS_AS((void)concentration_profile(u, {1.5}), SpecError);
  }
}

TEST_CASE("evaluate_J against an extended-precision oracle on bounded input") {
  const auto nl = model_nonlinearity();
  const LogGrid grid = make_uniform_grid(40.0, (1u << 15) + 1);
  const auto u = sample_function(grid, [](double t) {
    return 0.9 * std::min(t, 1.2) / 1.2 * std::exp(-0.05 * t);
  });
  const double J = evaluate_J(u, nl);

  // same quadrature rule carried out in long double with the exact model
  // integrand
  long double dir = 0.0L, nlm = 0.0L;
  const auto& t = grid.nodes();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const long double du = (long double)u.value(i + 1) - u.value(i);
    dir += du * du / ((long double)t[i + 1] - t[i]);
    const long double f0 =
        std::expm1((long double)kFourPi * u.value(i) * u.value(i)) *
        std::exp(-2.0L * t[i]);
    const long double f1 =
        std::expm1((long double)kFourPi * u.value(i + 1) * u.value(i + 1)) *
        std::exp(-2.0L * t[i + 1]);
    nlm += 0.5L * (f0 + f1) * ((long double)t[i + 1] - t[i]);
  }
  const long double oracle = 0.5L * 2.0L * M_PI * dir - 0.25L * nlm;
  CHECK(std::abs(J - (double)oracle) / std::abs((double)oracle) <= 1e-8);
}

TEST_CASE("bookkeeping identity J = half energy minus nonlinear mass") {
  const auto nl = model_nonlinearity();
  const auto tower = build_tower(SignedClosedSet::from_points({1.0}, {+1}));
  const LogGrid grid = default_tower_grid(tower, (1u << 14) + 1);
  const auto u = sample_function(
      grid, [&](double t) { return 0.5 * tower.evaluate(t); });
  CHECK(evaluate_J(u, nl) == doctest::Approx(0.5 * dirichlet_energy(u) -
                                             nonlinear_mass(u, nl)));
}
