// Acceptance suite: one PASS/FAIL line per criterion. The exit status is
// driven by the gating checks; a check marked as a known deviation is still
// printed as FAIL but does not fail the run.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "support.hpp"
#include "tankseis/beamtank.hpp"
#include "tankseis/cli.hpp"
#include "tankseis/config.hpp"
#include "tankseis/mechmodel.hpp"
#include "tankseis/simulate.hpp"
#include "tankseis/sloshfem.hpp"
#include "tankseis/uplift.hpp"

using namespace tankseis;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string what;
  bool ok = false;
  bool gating = true;
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  void check(std::string what, bool ok, bool gating = true) { checks.push_back({std::move(what), ok, gating}); }
  void note(std::string s) { notes.push_back(std::move(s)); }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
  bool gating_passed() const {
    for (const auto& c : checks)
      if (!c.ok && c.gating) return false;
    return true;
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string pct(double v) { return num(100.0 * v, 3) + "%"; }

TankSpec anchored(TankSpec t) {
  t.geometry.anchorage = Anchorage::anchored;
  return t;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
  return x;
}

// Elastic design spectrum shape (Type 1, ground type B) used only to weight
// the impulsive and convective parts of the combined pressure profile.
double design_spectrum(double T, double xi) {
  const double S = 1.2, TB = 0.15, TC = 0.5, TD = 2.0;
  const double eta = std::max(0.55, std::sqrt(10.0 / (5.0 + 100.0 * xi)));
  if (T < TB) return S * (1.0 + T / TB * (2.5 * eta - 1.0));
  if (T < TC) return S * 2.5 * eta;
  if (T < TD) return S * 2.5 * eta * TC / T;
  return S * 2.5 * eta * TC * TD / (T * T);
}

GroundMotion broadband_record(double dt, double duration, double scale) {
  GroundMotion gm = test::sine_record(0.0, 1.0, dt, duration);
  for (Eigen::Index k = 0; k < gm.size(); ++k) {
    const double t = dt * k;
    double a = 0.0;
    for (int j = 1; j <= 12; ++j) a += std::sin(2 * M_PI * 0.35 * j * t + 0.7 * j * j) / j;
    gm.accel[k] = scale * a * std::exp(-0.15 * t) * (1.0 - std::exp(-2.0 * t));
  }
  gm.name = "broadband";
  return gm;
}

// ------------------------------------------------------------------ 1

Criterion convective_formula() {
  Criterion c{1, "convective periods, formula path", {}, {}};
  Stopwatch sw;
  const auto s = convective_params(slender_tank(), 3);
  const auto b = convective_params(broad_tank(), 3);
  const double elapsed = sw.seconds();
  const double ts[] = {1.479, 0.869, 0.687}, tb[] = {2.100, 1.068, 0.841};
  for (int k = 0; k < 3; ++k) {
    c.check("slender T_c" + std::to_string(k + 1) + " = " + num(s[k].period) + " s vs " + num(ts[k]) + " (dev " +
                pct(test::rel(s[k].period, ts[k])) + ", tol 0.2%)",
            test::rel(s[k].period, ts[k]) <= 0.002);
    c.check("broad T_c" + std::to_string(k + 1) + " = " + num(b[k].period) + " s vs " + num(tb[k]) + " (dev " +
                pct(test::rel(b[k].period, tb[k])) + ", tol 0.2%)",
            test::rel(b[k].period, tb[k]) <= 0.002);
  }
  c.check("runtime " + num(elapsed, 3) + " s < 1 s", elapsed < 1.0);
  return c;
}

// ------------------------------------------------------------------ 2

Criterion convective_fe() {
  Criterion c{2, "convective periods, FE path", {}, {}};
  Stopwatch sw;
  for (const TankSpec& t : {slender_tank(), broad_tank()}) {
    const EigenSolution fe = solve_sloshing(t.geometry, t.liquid, t.gravity, 0.02, 1, 3);
    const auto an = convective_params(t, 3);
    const double e1 = test::rel(fe.period(0), an[0].period), e3 = test::rel(fe.period(2), an[2].period);
    c.check(t.name + " mode 1: FE " + num(fe.period(0), 6) + " s vs analytic " + num(an[0].period, 6) + " (dev " +
                pct(e1) + ", tol 0.5%)",
            e1 <= 0.005);
    c.check(t.name + " mode 3: FE " + num(fe.period(2), 6) + " s vs analytic " + num(an[2].period, 6) + " (dev " +
                pct(e3) + ", tol 1.5%)",
            e3 <= 0.015);
  }
  const TankSpec b = broad_tank();
  const double exact = convective_params(b, 1)[0].omega;
  std::vector<double> err;
  for (double h : {0.16, 0.08, 0.04}) {
    const EigenSolution fe = solve_sloshing(b.geometry, b.liquid, b.gravity, h, 1, 1);
    err.push_back(test::rel(fe.eigenvalues[0], exact * exact));
  }
  const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  c.check("refinement errors " + num(err[0]) + ", " + num(err[1]) + ", " + num(err[2]) + " decrease monotonically",
          err[0] > err[1] && err[1] > err[2]);
  c.check("observed orders " + num(p1, 3) + ", " + num(p2, 3) + " >= 1.9", p1 >= 1.9 && p2 >= 1.9);
  const double elapsed = sw.seconds();
  c.check("runtime " + num(elapsed, 3) + " s < 30 s", elapsed < 30.0);
  return c;
}

// ------------------------------------------------------------------ 3

Criterion impulsive_periods() {
  Criterion c{3, "impulsive periods", {}, {}};
  struct Row {
    TankSpec spec;
    double code, fe;
    bool beam_gating;
  };
  // The broad-tank beam check is a documented, currently unattainable target:
  // a ring-section cantilever is far stiffer than the shell at this aspect ratio.
  const Row rows[] = {{slender_tank(), 0.069, 0.061, true}, {broad_tank(), 0.016, 0.013, false}};
  for (const Row& r : rows) {
    const double en = impulsive_params(r.spec).period;
    const double beam = impulsive_mode(r.spec).period;
    c.check(r.spec.name + " code formula T_i = " + num(en) + " s vs " + num(r.code) + " (dev " +
                pct(test::rel(en, r.code)) + ", tol 20%)",
            test::rel(en, r.code) <= 0.20);
    c.check(r.spec.name + " beam T_i = " + num(beam) + " s vs " + num(r.fe) + " (dev " + pct(test::rel(beam, r.fe)) +
                ", tol 25%)" + (r.beam_gating ? "" : " [known deviation, non-gating]"),
            test::rel(beam, r.fe) <= 0.25, r.beam_gating);
    c.note(r.spec.name + " assumed shell " + r.spec.shell.grade + ": E = " + num(r.spec.shell.elastic_modulus) +
           " Pa, nu = " + num(r.spec.shell.poisson_ratio) + ", density = " + num(r.spec.shell.density) + " kg/m3");
  }
  return c;
}

// ------------------------------------------------------------------ 4

Criterion pressure_structure() {
  Criterion c{4, "pressure-profile structure", {}, {}};
  Stopwatch sw;
  const auto grid = uniform_grid(201);
  {
    const TankSpec t = broad_tank();
    std::vector<PressureProfile> parts{rigid_impulsive_pressure_profile(t, grid)};
    std::vector<double> demand{design_spectrum(impulsive_params(t).period, 0.02)};
    for (const auto& m : convective_params(t, 3)) {
      parts.push_back(convective_pressure_profile(m, t, grid));
      demand.push_back(design_spectrum(m.period, 0.005));
    }
    const PressureProfile p = combine_absolute(parts, demand);
    bool strict = true;
    for (Eigen::Index k = 1; k < p.pressure.size(); ++k) strict = strict && p.pressure[k] < p.pressure[k - 1];
    c.check("broad combined profile strictly decreasing with height (p(0) = " + num(p.pressure[0]) +
                ", p(1) = " + num(p.pressure[p.pressure.size() - 1]) + " Pa per m/s2 of ground demand)",
            strict);
  }
  {
    const TankSpec t = slender_tank();
    const ImpulsiveMode m = impulsive_mode(t);
    const PressureProfile p = flexible_impulsive_pressure_profile(t, m.shape, grid);
    Eigen::Index arg = 0;
    p.pressure.maxCoeff(&arg);
    const double z = grid[static_cast<std::size_t>(arg)];
    c.check("slender flexible-wall profile peaks at zeta = " + num(z, 3) + " > 0.1", z > 0.1);
  }
  for (const TankSpec& t : {slender_tank(), broad_tank()}) {
    const double r = wall_resultant(rigid_impulsive_pressure_profile(t, grid), t);
    const double mi = impulsive_params(t).mass;
    c.check(t.name + " rigid resultant " + num(r, 6) + " kg vs m_i " + num(mi, 6) + " (dev " + pct(test::rel(r, mi)) +
                ", tol 2%)",
            test::rel(r, mi) <= 0.02);
  }
  const double elapsed = sw.seconds();
  c.check("runtime " + num(elapsed, 3) + " s < 5 s", elapsed < 5.0);
  return c;
}

// ------------------------------------------------------------------ 5

std::optional<GroundMotion> env_record(const char* var) {
  const char* p = std::getenv(var);
  if (!p || !*p || !fs::exists(p)) return std::nullopt;
  return load_record(p, format_from_path(p));
}

Criterion time_history() {
  Criterion c{5, "time-history properties", {}, {}};
  {
    // (a) resonant sine, twelve time constants so the transient is gone
    const TankSpec t = anchored(broad_tank());
    SystemOptions so;
    so.convective_modes = 1;
    const ReducedSystem s = assemble_system(t, so);
    const double w = s.modes[0].omega, xi = so.convective_damping, A = 0.02;
    const double T = 2 * M_PI / w;
    const GroundMotion gm = test::sine_record(A, T, 0.02, 12.0 / (xi * w));
    NewmarkParams np;
    np.dt_sub = gm.dt;
    const ResponseHistory h = newmark(s, gm, np);
    const Eigen::Index tail = static_cast<Eigen::Index>(2 * T / h.dt);
    const double amp = h.displacement.col(1).tail(tail).cwiseAbs().maxCoeff();
    const double exact = A / (w * w) / (2 * xi);
    c.check("(a) resonant steady state " + num(amp, 6) + " m vs closed form " + num(exact, 6) + " (dev " +
                pct(test::rel(amp, exact)) + ", tol 2%)",
            test::rel(amp, exact) <= 0.02);
  }
  {
    // (b) free vibration of the impulsive oscillator
    const ReducedSystem s = assemble_system(anchored(broad_tank()));
    NewmarkParams np;
    np.initial_displacement = Eigen::VectorXd::Zero(s.size());
    np.initial_displacement[0] = 1e-3;
    np.dt_sub = s.impulsive_period / 200.0;
    const ResponseHistory h = newmark(s, test::zero_record(s.impulsive_period / 20.0, 241), np);
    std::vector<double> peaks;
    for (Eigen::Index k = 1; k + 1 < h.steps(); ++k) {
      const double a = h.displacement(k - 1, 0), b = h.displacement(k, 0), d = h.displacement(k + 1, 0);
      if (b > a && b >= d && b > 0.0) peaks.push_back(b);
    }
    const int m = static_cast<int>(peaks.size()) - 1;
    const double delta = m > 0 ? std::log(peaks.front() / peaks.back()) / m : 0.0;
    const double xi = delta / std::sqrt(4 * M_PI * M_PI + delta * delta);
    c.check("(b) log decrement over " + std::to_string(m) + " cycles gives xi = " + num(xi) + " vs 0.02 (dev " +
                pct(test::rel(xi, 0.02)) + ", tol 5%)",
            m >= 5 && test::rel(xi, 0.02) <= 0.05);
  }
  {
    // (c) energy ledger, linear and rocking
    const GroundMotion gm = broadband_record(0.01, 12.0, 1.0);
    const ResponseHistory lin = newmark(assemble_system(anchored(broad_tank())), gm);
    MomentRotationOptions mo;
    const MomentRotationCurve mr = moment_rotation(broad_tank(), linspace(0.0, 0.03, 61), mo);
    GroundMotion strong = gm;
    strong.accel *= 2.5;
    const ResponseHistory up = newmark(assemble_system(broad_tank(), {}, &mr), strong);
    const double w = std::max(up.uplift0.cwiseAbs().maxCoeff(), up.uplift_pi.cwiseAbs().maxCoeff());
    c.check("(c) energy residual linear " + num(lin.energy_residual()) + ", rocking " + num(up.energy_residual()) +
                " (peak uplift " + num(w) + " m, within the tabulated " + num(mr.samples.back().max_uplift) +
                " m), tol 1%",
            lin.energy_residual() <= 0.01 && up.energy_residual() <= 0.01 && w > 0.0 &&
                w <= mr.samples.back().max_uplift);
  }
  {
    // (d) Froude similitude, prototype (lambda = 1/18 inverse) against the bundled model
    const TankSpec model = anchored(broad_tank());
    const double l = model.scale.length_ratio;
    const TankSpec proto = scaled_geometry(model, 1.0 / l);
    const GroundMotion gp = broadband_record(0.01, 40.0, 1.0);
    const GroundMotion gm = froude_scale(gp, model.scale);
    NewmarkParams a, b;
    a.dt_sub = 0.002;
    b.dt_sub = 0.002 * std::sqrt(l);
    const ResponseHistory hp = newmark(assemble_system(proto), gp, a);
    const ResponseHistory hm = newmark(assemble_system(model), gm, b);
    const double peak = l * hp.eta0.cwiseAbs().maxCoeff();
    const double err = hp.steps() == hm.steps() ? (hm.eta0 - l * hp.eta0).cwiseAbs().maxCoeff() / peak : 1.0;
    c.check("(d) scaled sloshing history vs lambda * prototype: max error " + pct(err) + " of peak, tol 1%",
            err <= 0.01);
  }
  {
    // conditional, non-gating: user-supplied scaled records
    const auto chichi = env_record("TANKSEIS_CHICHI");
    const auto northridge = env_record("TANKSEIS_NORTHRIDGE");
    const TankSpec t = broad_tank();
    if (chichi) {
      for (double xi : {0.005, 0.02}) {
        SystemOptions so;
        so.convective_damping = xi;
        const double eta = peak_report(newmark(assemble_system(t, so), *chichi), t).wave_height.value;
        c.check("(conditional) Chi-Chi eta_max = " + num(eta) + " m at xi_c = " + num(xi) + " vs 0.074 (dev " +
                    pct(test::rel(eta, 0.074)) + ", tol 25%) [non-gating]",
                test::rel(eta, 0.074) <= 0.25, false);
      }
    } else {
      c.note("conditional Chi-Chi check skipped: set TANKSEIS_CHICHI to a scaled record");
    }
    if (northridge) {
      const MomentRotationCurve mr = moment_rotation(t, linspace(0.0, 0.03, 61));
      for (double xi : {0.005, 0.02}) {
        SystemOptions so;
        so.convective_damping = xi;
        const double w = peak_report(newmark(assemble_system(t, so, &mr), *northridge), t).uplift.value;
        c.check("(conditional) Northridge w_max = " + num(w) + " m at xi_c = " + num(xi) + " vs 0.016 (dev " +
                    pct(test::rel(w, 0.016)) + ", tol 30%) [non-gating]",
                test::rel(w, 0.016) <= 0.30, false);
      }
    } else {
      c.note("conditional Northridge check skipped: set TANKSEIS_NORTHRIDGE to a scaled record");
    }
  }
  return c;
}

// ------------------------------------------------------------------ 6

Criterion uplift_mechanics() {
  Criterion c{6, "uplift mechanics", {}, {}};
  const TankSpec t = broad_tank();
  const StripModel s = tank_strip(t, 0.02, 200, EndRestraint::pinned);
  double worst_p = 0.0, worst_l = 0.0, worst_c = 0.0;
  const double h = s.length / (s.nodes - 1);
  for (double w : linspace(0.001, 0.02, 20)) {
    const StripSolution r = solve_strip(s, w);
    const double l = std::pow(24.0 * s.rigidity * w / s.load, 0.25);
    worst_p = std::max(worst_p, test::rel(r.force, 0.5 * s.load * l));
    worst_l = std::max(worst_l, test::rel(r.uplift_length, l));
    worst_c = std::max(worst_c, r.complementarity / (s.load * h));
  }
  c.check("strip vs closed-form segment: max edge-force error " + pct(worst_p) + ", uplift-length error " +
              pct(worst_l) + " (200 nodes, tol 1%)",
          worst_p <= 0.01 && worst_l <= 0.01);
  c.check("complementarity residual " + num(worst_c) + " (q h units) < 1e-10", worst_c < 1e-10);
  Stopwatch sw;
  MomentRotationOptions mo;
  mo.sectors = 72;
  const MomentRotationCurve mr = moment_rotation(t, linspace(0.0, 0.01, 41), mo);
  const double elapsed = sw.seconds();
  bool monotone = true;
  double residual = 0.0;
  for (std::size_t k = 0; k < mr.samples.size(); ++k) {
    if (k > 0) monotone = monotone && mr.samples[k].moment >= mr.samples[k - 1].moment;
    residual = std::max(residual, std::abs(mr.samples[k].residual));
  }
  c.check("moment-rotation monotone over " + std::to_string(mr.samples.size()) + " samples", monotone);
  c.check("vertical equilibrium residual " + pct(residual) + " < 0.5%", residual < 0.005);
  c.check("72-sector curve runtime " + num(elapsed, 3) + " s < 10 s", elapsed < 10.0);
  return c;
}

// ------------------------------------------------------------------ 7

Criterion mass_closure() {
  Criterion c{7, "mass closure", {}, {}};
  const double declared[] = {16400.0, 5600.0};
  int k = 0;
  for (const TankSpec& t : {slender_tank(), broad_tank()}) {
    double conv = 0.0;
    for (const auto& m : convective_params(t, 50)) conv += m.mass;
    const double mi = impulsive_params(t).series_mass;
    const double e = test::rel(mi + conv, liquid_mass(t));
    c.check(t.name + " m_i + sum of 50 m_cn = " + num(mi + conv, 7) + " kg vs m_L " + num(liquid_mass(t), 7) +
                " (dev " + pct(e) + ", tol 0.5%)",
            e <= 0.005);
    const double em = test::rel(total_mass(t), declared[k]);
    c.check(t.name + " total mass " + num(total_mass(t), 6) + " kg vs " + num(declared[k], 6) + " (dev " + pct(em) +
                ", tol 2%)",
            em <= 0.02);
    ++k;
  }
  return c;
}

// ------------------------------------------------------------------ 8

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = test::slurp(e.path());
  return files;
}

Criterion determinism() {
  Criterion c{8, "determinism", {}, {}};
  const fs::path root = test::scratch("acceptance_determinism");
  const fs::path rec = root / "record.csv";
  test::spit(rec, format_record(broadband_record(0.01, 6.0, 2.0)));
  const std::vector<std::vector<std::string>> commands = {
      {"modal", "--spec", "broad", "--dump-mode", "1"},
      {"spectrum", "--record", rec.string()},
      {"pressure-profile", "--spec", "slender"},
      {"simulate", "--spec", "broad", "--record", rec.string(), "--uplift"},
      {"uplift-curve", "--spec", "broad"},
      {"scale-record", "--record", rec.string(), "--spec", "broad"},
      {"report"},
  };
  for (const auto& cmd : commands) {
    std::vector<std::map<std::string, std::string>> runs;
    bool ok = true;
    int idx = 0;
    for (const char* jobs : {"1", "1", "3"}) {
      const fs::path out = root / (cmd[0] + "_" + std::to_string(idx++));
      std::vector<std::string> args{"tankseis", "--out", out.string(), "--jobs", jobs};
      args.insert(args.end(), cmd.begin(), cmd.end());
      std::streambuf* saved = std::cout.rdbuf();
      std::ostringstream sink;
      std::cout.rdbuf(sink.rdbuf());
      const int rc = cli::run(args);
      std::cout.rdbuf(saved);
      ok = ok && rc == cli::kExitOk;
      runs.push_back(snapshot(out));
    }
    ok = ok && !runs[0].empty() && runs[0] == runs[1] && runs[0] == runs[2];
    c.check("`" + cmd[0] + "` reruns (jobs 1, 1, 3) byte-identical over " + std::to_string(runs[0].size()) + " files",
            ok);
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::function<Criterion()>> suite = {convective_formula, convective_fe, impulsive_periods,
                                                         pressure_structure, time_history,  uplift_mechanics,
                                                         mass_closure,       determinism};
  bool gate = true;
  int id = 0;
  for (const auto& run : suite) {
    Criterion c{++id, "aborted", {}, {}};
    try {
      c = run();
    } catch (const std::exception& e) {
      c.check(std::string("exception: ") + e.what(), false);
    }
    std::printf("%s criterion %d: %s\n", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& k : c.checks) std::printf("    [%s] %s\n", k.ok ? "ok" : (k.gating ? "FAIL" : "fail*"), k.what.c_str());
    for (const auto& n : c.notes) std::printf("    note: %s\n", n.c_str());
    gate = gate && c.gating_passed();
  }
  std::printf("fail* = known deviation, reported but not gating\n");
  std::printf("%s\n", gate ? "acceptance gate: PASS" : "acceptance gate: FAIL");
  return gate ? 0 : 1;
}
