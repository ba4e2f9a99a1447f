#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "tankseis/beamtank.hpp"

using namespace tankseis;

namespace {

TankSpec empty_of(TankSpec t) {
  t.liquid.density = 0.0;
  t.top_ring_mass = 0.0;
  return t;
}

}  // namespace

TEST_SUITE("beamtank") {
  TEST_CASE("rigid shape added mass integrates to the impulsive mass") {
    for (const TankSpec& t : {slender_tank(), broad_tank()}) {
      const auto grid = uniform_grid(401);
      const ModeShape rigid = [](double) { return 1.0; };
      const PressureProfile p = flexible_impulsive_pressure_profile(t, rigid, grid, {}, false);
      const Eigen::VectorXd ma = added_mass_from_pressure(p, rigid, t);
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        total += 0.5 * (ma[static_cast<Eigen::Index>(k)] + ma[static_cast<Eigen::Index>(k) + 1]) * (grid[k + 1] - grid[k]);
      total *= t.geometry.fill_height;
      CHECK(test::rel(total, impulsive_params(t).mass) < 0.02);
      CHECK(ma.minCoeff() >= 0.0);
    }
  }

  TEST_CASE("no added mass above the liquid") {
    const ImpulsiveMode m = impulsive_mode(slender_tank());
    const double H = slender_tank().geometry.fill_height;
    for (Eigen::Index k = 0; k < m.beam.z.size(); ++k)
      if (m.beam.z[k] > H + 1e-12) CHECK(m.beam.added_mass[k] == 0.0);
    CHECK(m.beam.added_mass.maxCoeff() > 0.0);
  }

  TEST_CASE("beam has a station at the fill height and the mode is normalized there") {
    const TankSpec t = broad_tank();
    const ImpulsiveMode m = impulsive_mode(t);
    bool found = false;
    for (Eigen::Index k = 0; k < m.beam.z.size(); ++k)
      if (m.beam.z[k] == t.geometry.fill_height) {
        found = true;
        CHECK(m.mode.deflection[k] == doctest::Approx(1.0));
      }
    CHECK(found);
    CHECK(m.shape(0.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(m.shape(1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("slender tank impulsive period") {
    const ImpulsiveMode m = impulsive_mode(slender_tank());
    CHECK(m.period >= 0.046);
    CHECK(m.period <= 0.076);
  }

  TEST_CASE("empty tank is a classic cantilever") {
    const TankSpec t = empty_of(slender_tank());
    BeamOptions o;
    o.timoshenko = false;
    const ImpulsiveMode m = impulsive_mode(t, o);
    const double R = t.geometry.radius, s = t.geometry.shell_thickness;
    const double mass = t.shell.density * 2 * M_PI * R * s;
    const double EI = t.shell.elastic_modulus * M_PI * R * R * R * s;
    CHECK(test::rel(m.period, cantilever_period(t.geometry.total_height, mass, EI)) < 0.01);
  }

  TEST_CASE("cantilever closed form") {
    // T = 2 pi / (1.8751^2) sqrt(m L^4 / EI)
    CHECK(cantilever_period(2.0, 3.0, 5.0) ==
          doctest::Approx(2 * M_PI / (1.8751040687119611 * 1.8751040687119611) * std::sqrt(3.0 * 16.0 / 5.0)));
  }

  TEST_CASE("liquid lengthens the period") {
    for (const TankSpec& t : {slender_tank(), broad_tank()})
      CHECK(impulsive_mode(t).period > impulsive_mode(empty_of(t)).period);
  }

  TEST_CASE("shear flexibility lengthens the period") {
    BeamOptions eb;
    eb.timoshenko = false;
    for (const TankSpec& t : {slender_tank(), broad_tank()})
      CHECK(impulsive_mode(t).period > impulsive_mode(t, eb).period);
  }

  TEST_CASE("fixed-point trajectory does not oscillate") {
    for (const TankSpec& t : {slender_tank(), broad_tank()}) {
      const ImpulsiveMode m = impulsive_mode(t);
      const auto& tr = m.trajectory;
      REQUIRE(tr.size() >= 2);
      const double sgn = tr[1] >= tr[0] ? 1.0 : -1.0;
      for (std::size_t k = 2; k < tr.size(); ++k) CHECK(sgn * (tr[k] - tr[k - 1]) >= -0.005 * tr[k]);
      CHECK(m.iterations == static_cast<int>(tr.size()));
    }
  }

  TEST_CASE("station refinement") {
    for (const TankSpec& t : {slender_tank(), broad_tank()}) {
      BeamOptions coarse, fine;
      coarse.stations = 50;
      fine.stations = 200;
      CHECK(test::rel(impulsive_mode(t, coarse).period, impulsive_mode(t, fine).period) < 0.005);
    }
  }

  TEST_CASE("converged slender shape drives a pressure peak away from the base") {
    const TankSpec t = slender_tank();
    const ImpulsiveMode m = impulsive_mode(t);
    const auto grid = uniform_grid(201);
    const PressureProfile p = flexible_impulsive_pressure_profile(t, m.shape, grid);
    Eigen::Index arg = 0;
    p.pressure.maxCoeff(&arg);
    CHECK(grid[static_cast<std::size_t>(arg)] > 0.1);
  }

  TEST_CASE("iteration cap raises with the trajectory attached") {
    BeamOptions o;
    o.max_iter = 1;
    o.tolerance = 1e-12;
    try {
      impulsive_mode(slender_tank(), o);
      FAIL("expected BeamIterationError");
    } catch (const BeamIterationError& e) {
      CHECK(!e.trajectory().empty());
    }
  }

  TEST_CASE("mode shape csv has a header and the requested rows") {
    const std::string csv = mode_shape_csv(impulsive_mode(broad_tank()), 11);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  }
}
