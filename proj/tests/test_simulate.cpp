#include <doctest.h>

#include "support.hpp"
#include "tankseis/simulate.hpp"

using namespace tankseis;

namespace {

TankSpec anchored(TankSpec t) {
  t.geometry.anchorage = Anchorage::anchored;
  return t;
}

SystemOptions modes(int n) {
  SystemOptions o;
  o.convective_modes = n;
  return o;
}

std::vector<double> rotations(double max, int n) {
  std::vector<double> th(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) th[static_cast<std::size_t>(k)] = max * k / (n - 1);
  return th;
}

// Every `stride`-th row of a column, aligned with record samples.
Eigen::VectorXd at_record_times(const Eigen::MatrixXd& d, int column, int stride) {
  Eigen::VectorXd out((d.rows() - 1) / stride + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = d(k * stride, column);
  return out;
}

GroundMotion busy_record(double dt, double duration) {
  GroundMotion gm = test::sine_record(1.0, 1.7, dt, duration);
  for (Eigen::Index k = 0; k < gm.size(); ++k)
    gm.accel[k] += 0.8 * std::sin(0.9 * dt * k * 2 * M_PI) * std::exp(-0.1 * dt * k) + 0.3 * std::sin(k * k * 0.013);
  return gm;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("two-mass system reproduces the component periods") {
    const TankSpec t = anchored(broad_tank());
    const ReducedSystem s = assemble_system(t, modes(1));
    REQUIRE(s.size() == 2);
    const auto p = natural_periods(s);
    CHECK(p[0] == doctest::Approx(convective_params(t, 1)[0].period).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(impulsive_params(t).period).epsilon(1e-9));
  }

  TEST_CASE("three convective modes plus impulsive, rocking adds one") {
    const TankSpec t = broad_tank();
    CHECK(assemble_system(t, modes(3)).size() == 4);
    const MomentRotationCurve mr = moment_rotation(t, rotations(0.01, 11));
    const ReducedSystem r = assemble_system(t, modes(3), &mr);
    CHECK(r.size() == 5);
    CHECK(r.rocking);
    CHECK(natural_periods(r).size() == 5);
    CHECK_THROWS_AS(assemble_system(anchored(t), modes(3), &mr), ConfigError);
  }

  TEST_CASE("massless convective modes decouple to the impulsive oscillator") {
    const TankSpec t = anchored(broad_tank());
    auto m = convective_params(t, 3);
    for (auto& x : m) x.mass = 0.0;
    const ReducedSystem a = assemble_system(t, impulsive_params(t), m, modes(3));
    const ReducedSystem b = assemble_system(t, impulsive_params(t), {}, modes(3));
    REQUIRE(a.size() == 1);
    const GroundMotion gm = busy_record(0.01, 4.0);
    const ResponseHistory ha = newmark(a, gm), hb = newmark(b, gm);
    CHECK((ha.displacement - hb.displacement).cwiseAbs().maxCoeff() <= 1e-12 * hb.displacement.cwiseAbs().maxCoeff());
  }

  TEST_CASE("zero record gives zero response") {
    const ResponseHistory h = newmark(assemble_system(broad_tank()), test::zero_record(0.01, 300));
    CHECK(h.displacement.cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.base_shear.cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.eta0.cwiseAbs().maxCoeff() == 0.0);
    const PeakReport p = peak_report(h, broad_tank());
    CHECK(p.wave_height.value == 0.0);
    CHECK(!p.freeboard_exceeded);
  }

  TEST_CASE("convective DOFs follow the exact SDOF solution") {
    const TankSpec t = anchored(broad_tank());
    const ReducedSystem s = assemble_system(t, modes(3));
    const GroundMotion gm = busy_record(0.01, 20.0);
    NewmarkParams np;
    np.dt_sub = 0.001;
    const ResponseHistory h = newmark(s, gm, np);
    for (int j = 0; j < 3; ++j) {
      const auto& m = s.modes[static_cast<std::size_t>(j)];
      const Eigen::VectorXd exact = test::exact_sdof(gm, m.omega, 0.005);
      const Eigen::VectorXd q = at_record_times(h.displacement, 1 + j, 10);
      CHECK((q - exact).cwiseAbs().maxCoeff() < 1e-3 * exact.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("resonant sine matches the closed-form transient") {
    const TankSpec t = anchored(broad_tank());
    const ReducedSystem s = assemble_system(t, modes(1));
    const double w = s.modes[0].omega;
    const GroundMotion gm = test::sine_record(0.3, 2 * M_PI / w, 0.01, 150.0);
    const ResponseHistory h = newmark(s, gm);
    const Eigen::VectorXd exact = test::exact_sdof(gm, w, 0.005);
    const int stride = static_cast<int>(std::llround(gm.dt / h.dt));
    const Eigen::VectorXd q = at_record_times(h.displacement, 1, stride);
    const Eigen::Index tail = static_cast<Eigen::Index>(2 * M_PI / w / gm.dt) + 1;
    CHECK(test::rel(q.tail(tail).cwiseAbs().maxCoeff(), exact.tail(tail).cwiseAbs().maxCoeff()) < 0.02);
  }

  TEST_CASE("log decrement recovers the structural damping") {
    const TankSpec t = anchored(broad_tank());
    const ReducedSystem s = assemble_system(t, modes(3));
    NewmarkParams np;
    np.initial_displacement = Eigen::VectorXd::Zero(s.size());
    np.initial_displacement[0] = 1e-3;
    np.dt_sub = s.impulsive_period / 200.0;
    const ResponseHistory h = newmark(s, test::zero_record(s.impulsive_period / 20.0, 200), np);
    std::vector<double> peaks;
    for (Eigen::Index k = 1; k + 1 < h.steps(); ++k) {
      const double a = h.displacement(k - 1, 0), b = h.displacement(k, 0), c = h.displacement(k + 1, 0);
      if (b > a && b >= c && b > 0) peaks.push_back(b);
    }
    REQUIRE(peaks.size() >= 6);
    const double m = 5.0;
    const double delta = std::log(peaks[0] / peaks[5]) / m;
    const double xi = delta / std::sqrt(4 * M_PI * M_PI + delta * delta);
    CHECK(test::rel(xi, 0.02) < 0.05);
  }

  TEST_CASE("energy ledger closes") {
    const GroundMotion gm = busy_record(0.01, 8.0);
    const ResponseHistory lin = newmark(assemble_system(anchored(broad_tank())), gm);
    CHECK(lin.energy_residual() < 0.01);
    const MomentRotationCurve mr = moment_rotation(broad_tank(), rotations(0.01, 21));
    GroundMotion strong = gm;
    strong.accel *= 3.0;
    const ResponseHistory up = newmark(assemble_system(broad_tank(), modes(3), &mr), strong);
    CHECK(up.energy_residual() < 0.01);
    CHECK(up.uplift0.cwiseAbs().maxCoeff() > 0.0);
  }

  TEST_CASE("anchored response is linear in the record") {
    const ReducedSystem s = assemble_system(anchored(broad_tank()));
    const GroundMotion gm = busy_record(0.01, 5.0);
    GroundMotion twice = gm;
    twice.accel *= 2.0;
    const ResponseHistory a = newmark(s, gm), b = newmark(s, twice);
    CHECK((b.displacement - 2.0 * a.displacement).cwiseAbs().maxCoeff() <=
          1e-9 * b.displacement.cwiseAbs().maxCoeff());
    CHECK((b.wall_pressure - 2.0 * a.wall_pressure).cwiseAbs().maxCoeff() <=
          1e-9 * b.wall_pressure.cwiseAbs().maxCoeff());
  }

  TEST_CASE("Froude similitude of the sloshing response") {
    const double l = 0.25;
    const TankSpec proto = anchored(broad_tank());
    const TankSpec model = scaled_geometry(proto, l);
    const GroundMotion gm = busy_record(0.01, 15.0);
    ScaleModel sm;
    sm.length_ratio = l;
    const GroundMotion gs = froude_scale(gm, sm);
    NewmarkParams a, b;
    a.dt_sub = 0.001;
    b.dt_sub = 0.001 * std::sqrt(l);
    const ResponseHistory hp = newmark(assemble_system(proto), gm, a);
    const ResponseHistory hm = newmark(assemble_system(model), gs, b);
    REQUIRE(hp.steps() == hm.steps());
    const double peak = l * hp.eta0.cwiseAbs().maxCoeff();
    CHECK((hm.eta0 - l * hp.eta0).cwiseAbs().maxCoeff() < 0.01 * peak);
    CHECK(hm.time[hm.steps() - 1] == doctest::Approx(hp.time[hp.steps() - 1] * std::sqrt(l)));
  }

  TEST_CASE("halving the sub-step barely moves the peaks") {
    const ReducedSystem s = assemble_system(anchored(broad_tank()));
    const GroundMotion gm = busy_record(0.01, 6.0);
    NewmarkParams a, b;
    a.dt_sub = s.impulsive_period / 20.0;
    b.dt_sub = s.impulsive_period / 40.0;
    const PeakReport pa = peak_report(newmark(s, gm, a), anchored(broad_tank()));
    const PeakReport pb = peak_report(newmark(s, gm, b), anchored(broad_tank()));
    CHECK(test::rel(pa.wave_height.value, pb.wave_height.value) < 0.01);
    CHECK(test::rel(pa.base_shear.value, pb.base_shear.value) < 0.01);
    CHECK(test::rel(pa.moment.value, pb.moment.value) < 0.01);
  }

  TEST_CASE("wave height is the sum of modal surface pressures over rho g") {
    const TankSpec t = anchored(broad_tank());
    const ReducedSystem s = assemble_system(t, modes(2));
    const ResponseHistory h = newmark(s, busy_record(0.01, 3.0));
    const Eigen::Index k = h.steps() / 2;
    double p = 0.0;
    for (int j = 0; j < 2; ++j) {
      const auto& m = s.modes[static_cast<std::size_t>(j)];
      p += convective_surface_pressure(m, t, m.omega * m.omega * h.displacement(k, 1 + j));
    }
    CHECK(h.eta0[k] == doctest::Approx(p / (t.liquid.density * t.gravity)).epsilon(1e-12));
    CHECK(h.eta_pi[k] == doctest::Approx(-h.eta0[k]).epsilon(1e-12));
  }

  TEST_CASE("sub-step larger than the record step is refused") {
    NewmarkParams np;
    np.dt_sub = 0.1;
    CHECK_THROWS_AS(newmark(assemble_system(broad_tank()), test::zero_record(0.01, 10), np), ConfigError);
  }

  TEST_CASE("response csv has one row per step") {
    const ResponseHistory h = newmark(assemble_system(broad_tank()), test::zero_record(0.01, 11));
    const std::string csv = response_csv(h);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == h.steps() + 1);
  }
}
