#include <doctest.h>

#include "support.hpp"
#include "tankseis/uplift.hpp"

using namespace tankseis;

namespace {

// Uplifted segment of a pinned plate: D w'''' = -q on [0, l] with
// w(l) = w'(l) = w''(l) = 0 and w''(0) = 0 gives w(0) = q l^4 / (24 D) and
// an edge force of q l / 2.
double pinned_length(const StripModel& s, double w) { return std::pow(24.0 * s.rigidity * w / s.load, 0.25); }
double pinned_force(const StripModel& s, double w) { return 0.5 * s.load * pinned_length(s, w); }

std::vector<double> rotations(double max, int n) {
  std::vector<double> th(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) th[static_cast<std::size_t>(k)] = max * k / (n - 1);
  return th;
}

}  // namespace

TEST_SUITE("uplift") {
  TEST_CASE("zero uplift gives full contact") {
    const StripModel s = tank_strip(broad_tank(), 0.02);
    const StripSolution r = solve_strip(s, 0.0);
    CHECK(r.force == 0.0);
    CHECK(r.uplift_length == 0.0);
    CHECK(r.deflection.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(solve_strip(s, -1e-3), std::invalid_argument);
  }

  TEST_CASE("pinned strip matches the closed-form uplifted segment") {
    const StripModel s = tank_strip(broad_tank(), 0.02, 200, EndRestraint::pinned);
    for (double w : {0.002, 0.005, 0.01, 0.02}) {
      const StripSolution r = solve_strip(s, w);
      CHECK(test::rel(r.force, pinned_force(s, w)) < 0.01);
      CHECK(test::rel(r.uplift_length, pinned_length(s, w)) < 0.01);
      CHECK(std::abs(r.junction_moment) < 1e-6 * r.force * r.uplift_length);
    }
  }

  TEST_CASE("contact complementarity and sign of reactions") {
    for (EndRestraint e : {EndRestraint::pinned, EndRestraint::rotation_spring, EndRestraint::fixed}) {
      const StripModel s = tank_strip(broad_tank(), 0.02, 200, e);
      const double h = s.length / (s.nodes - 1);
      for (double w : {0.001, 0.01, 0.02}) {
        const StripSolution r = solve_strip(s, w);
        CHECK(r.complementarity < 1e-10 * s.load * h);
        CHECK(r.reaction.minCoeff() >= 0.0);
        CHECK(r.deflection.minCoeff() >= -1e-12);
      }
    }
  }

  TEST_CASE("stiffer junction needs more force") {
    const TankSpec t = broad_tank();
    const double w = 0.01;
    const double pinned = solve_strip(tank_strip(t, w, 200, EndRestraint::pinned), w).force;
    const double spring = solve_strip(tank_strip(t, w, 200, EndRestraint::rotation_spring), w).force;
    const double fixed = solve_strip(tank_strip(t, w, 200, EndRestraint::fixed), w).force;
    CHECK(pinned < spring);
    CHECK(spring < fixed);
  }

  TEST_CASE("uplift curve is monotone and converged in nodes") {
    const TankSpec t = broad_tank();
    const UpliftCurve a = uplift_curve(tank_strip(t, 0.02, 200), 0.02, 20);
    const UpliftCurve b = uplift_curve(tank_strip(t, 0.02, 400), 0.02, 20);
    for (std::size_t k = 1; k < a.samples.size(); ++k) {
      CHECK(a.samples[k].force >= a.samples[k - 1].force);
      CHECK(a.samples[k].length >= a.samples[k - 1].length);
      CHECK(test::rel(a.samples[k].force, b.samples[k].force) < 0.005);
    }
    CHECK(a.force(0.0) == 0.0);
    CHECK(a.force(a.samples[7].uplift) == doctest::Approx(a.samples[7].force));
  }

  TEST_CASE("edge work balances strain energy and work against the liquid") {
    const StripModel s = tank_strip(broad_tank(), 0.01, 200, EndRestraint::pinned);
    const UpliftCurve c = uplift_curve(s, 0.01, 200);
    double work = 0.0;
    for (std::size_t k = 1; k < c.samples.size(); ++k)
      work += 0.5 * (c.samples[k].force + c.samples[k - 1].force) * (c.samples[k].uplift - c.samples[k - 1].uplift);
    const StripSolution end = solve_strip(s, 0.01);
    CHECK(test::rel(work, end.strain_energy + end.load_work) < 0.02);
  }

  TEST_CASE("curve does not depend on the thread count") {
    const StripModel s = tank_strip(broad_tank(), 0.02);
    const UpliftCurve a = uplift_curve(s, 0.02, 16, 1), b = uplift_curve(s, 0.02, 16, 4);
    for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].force == b.samples[k].force);
  }

  TEST_CASE("plastic limit") {
    const TankSpec t = broad_tank();
    const StripModel s = tank_strip(t, 0.05);
    const PlasticLimit none = plastic_limit_check(s, t.geometry.bottom_thickness, 1e30);
    CHECK(!none.first_yield_uplift.has_value());
    UpliftCurve c = uplift_curve(s, 0.05, 10);
    annotate(c, none);
    for (const auto& x : c.samples) CHECK(!x.beyond_yield);

    const PlasticLimit p = plastic_limit_check(s, t.geometry.bottom_thickness, t.shell.yield_stress);
    CHECK(p.hinge_moment == doctest::Approx(0.001 * 0.001 * 215e6 / 4));
    REQUIRE(p.first_yield_uplift.has_value());
    const StripSolution at = solve_strip(s, *p.first_yield_uplift);
    CHECK(std::abs(at.junction_moment) == doctest::Approx(p.hinge_moment).epsilon(1e-4));
    annotate(c, p);
    for (const auto& x : c.samples) CHECK(x.beyond_yield == (x.uplift > *p.first_yield_uplift));
  }

  TEST_CASE("moment rotation at zero rotation") {
    const MomentRotationCurve m = moment_rotation(broad_tank(), {0.0, 0.001});
    CHECK(m.samples[0].moment == doctest::Approx(0.0).scale(1.0));
    CHECK(m.samples[0].max_uplift == 0.0);
  }

  TEST_CASE("anchored tanks and coarse sectors are refused") {
    TankSpec t = broad_tank();
    MomentRotationOptions o;
    o.sectors = 36;
    CHECK_THROWS_AS(moment_rotation(t, {0.0, 0.001}, o), ConfigError);
    t.geometry.anchorage = Anchorage::anchored;
    CHECK_THROWS_AS(moment_rotation(t, {0.0, 0.001}), ConfigError);
  }

  TEST_CASE("moment rotation is monotone and in vertical equilibrium") {
    const MomentRotationCurve m = moment_rotation(broad_tank(), rotations(0.01, 21));
    for (std::size_t k = 1; k < m.samples.size(); ++k) {
      CHECK(m.samples[k].moment >= m.samples[k - 1].moment);
      CHECK(m.samples[k].max_uplift >= m.samples[k - 1].max_uplift);
    }
    for (const auto& s : m.samples) CHECK(std::abs(s.residual) < 0.005);
    CHECK(m.samples.back().max_uplift > 0.0);
  }

  TEST_CASE("moment rotation is independent of the thread count") {
    MomentRotationOptions a, b;
    b.jobs = 3;
    const auto x = moment_rotation(broad_tank(), rotations(0.005, 6), a);
    const auto y = moment_rotation(broad_tank(), rotations(0.005, 6), b);
    CHECK(moment_rotation_csv(x) == moment_rotation_csv(y));
  }

  TEST_CASE("end restraint names") {
    for (EndRestraint e : {EndRestraint::pinned, EndRestraint::rotation_spring, EndRestraint::fixed})
      CHECK(parse_end_restraint(to_string(e)) == e);
    CHECK_THROWS(parse_end_restraint("hinged"));
  }
}
