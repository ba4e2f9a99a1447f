#include "tankseis/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tankseis/config.hpp"

namespace tankseis {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

ReducedSystem assemble_system(const TankSpec& spec, const SystemOptions& opts, const MomentRotationCurve* uplift) {
  if (opts.convective_modes < 1) throw ConfigError("simulate: at least one convective mode is required");
  return assemble_system(spec, impulsive_params(spec, opts.series), convective_params(spec, opts.convective_modes),
                         opts, uplift);
}

ReducedSystem assemble_system(const TankSpec& spec, const ImpulsiveComponent& impulsive,
                              const std::vector<ConvectiveMode>& modes, const SystemOptions& opts,
                              const MomentRotationCurve* uplift) {
  if (uplift && spec.geometry.anchorage == Anchorage::anchored)
    throw ConfigError("simulate: uplift spring given for an anchored tank");
  if (!(opts.structural_damping >= 0.0 && opts.convective_damping >= 0.0))
    throw ConfigError("simulate: damping ratios must be >= 0");
  if (!(impulsive.mass > 0.0)) throw ConfigError("simulate: impulsive mass must be positive");

  ReducedSystem sys;
  sys.spec = spec;
  sys.impulsive = impulsive;
  for (const auto& m : modes)
    if (m.mass > 0.0) sys.modes.push_back(m);
  sys.impulsive_period = opts.impulsive_period > 0.0 ? opts.impulsive_period : impulsive.period;
  if (!(sys.impulsive_period > 0.0)) throw ConfigError("simulate: impulsive period must be positive");
  sys.omega_ref = 2.0 * kPi / sys.impulsive_period;

  const int nc = sys.convective_count();
  sys.rocking = uplift != nullptr;
  const int n = 1 + nc + (sys.rocking ? 1 : 0);
  sys.theta = sys.rocking ? n - 1 : -1;

  sys.masses.push_back(impulsive.mass);
  sys.heights.push_back(impulsive.height);
  sys.dof_names.push_back("u_i");
  for (const auto& m : sys.modes) {
    sys.masses.push_back(m.mass);
    sys.heights.push_back(m.height);
    sys.dof_names.push_back("q_" + std::to_string(m.index));
  }
  if (sys.rocking) sys.dof_names.push_back("theta");

  // empty-tank mass lumped at mid-height of the wall, top ring at the top
  sys.shell_mass = spec.empty_mass + spec.top_ring_mass;
  sys.shell_height = sys.shell_mass > 0.0
                         ? (0.5 * spec.empty_mass * spec.geometry.total_height +
                            spec.top_ring_mass * spec.geometry.total_height) /
                               sys.shell_mass
                         : 0.0;

  sys.M = Eigen::MatrixXd::Zero(n, n);
  sys.K = Eigen::MatrixXd::Zero(n, n);
  sys.load = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Ms = Eigen::MatrixXd::Zero(n, n);  // structural part, for damping
  for (int j = 0; j <= nc; ++j) {
    const double m = sys.masses[static_cast<std::size_t>(j)];
    const double omega = j == 0 ? sys.omega_ref : sys.modes[static_cast<std::size_t>(j - 1)].omega;
    sys.M(j, j) = m;
    sys.K(j, j) = m * omega * omega;
    sys.load[j] = m;
  }
  Ms(0, 0) = sys.M(0, 0);
  if (sys.rocking) {
    const int t = sys.theta;
    double mtt = sys.shell_mass * sys.shell_height * sys.shell_height;
    double load_t = sys.shell_mass * sys.shell_height;
    for (int j = 0; j <= nc; ++j) {
      const double m = sys.masses[static_cast<std::size_t>(j)], h = sys.heights[static_cast<std::size_t>(j)];
      sys.M(j, t) = sys.M(t, j) = m * h;
      mtt += m * h * h;
      load_t += m * h;
    }
    sys.M(t, t) = mtt;
    sys.load[t] = load_t;
    const double hi = sys.heights[0], mi = sys.masses[0];
    Ms(0, t) = Ms(t, 0) = mi * hi;
    Ms(t, t) = mi * hi * hi + sys.shell_mass * sys.shell_height * sys.shell_height;

    std::vector<double> th, mo, wu;
    for (const auto& s : uplift->samples) {
      if (!th.empty() && s.rotation <= th.back()) continue;
      th.push_back(s.rotation);
      mo.push_back(s.moment);
      wu.push_back(s.max_uplift);
    }
    if (th.size() < 2 || th.front() != 0.0)
      throw ConfigError("simulate: moment-rotation curve needs >= 2 samples starting at zero rotation");
    sys.moment_of_rotation = Pchip(th, mo);
    sys.uplift_of_rotation = Pchip(th, wu);
  }
  sys.C = (2.0 * opts.structural_damping * sys.omega_ref) * Ms;
  for (int j = 1; j <= nc; ++j)
    sys.C(j, j) += 2.0 * opts.convective_damping * sys.modes[static_cast<std::size_t>(j - 1)].omega * sys.masses[static_cast<std::size_t>(j)];

  sys.probes = opts.probes;
  std::vector<double> grid = opts.probes;
  grid.push_back(0.0);  // base edge
  const PressureProfile rigid = rigid_impulsive_pressure_profile(spec, grid, opts.series);
  sys.rigid_probe = rigid.pressure;
  sys.convective_probe = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), nc);
  for (int j = 0; j < nc; ++j)
    sys.convective_probe.col(j) = convective_pressure_profile(sys.modes[static_cast<std::size_t>(j)], spec, grid).pressure;
  return sys;
}

std::vector<double> natural_periods(const ReducedSystem& sys) {
  Eigen::MatrixXd K = sys.K;
  if (sys.rocking) K(sys.theta, sys.theta) += sys.moment_of_rotation.slope(0.0);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, sys.M);
  std::vector<double> out;
  for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k)
    out.push_back(2.0 * kPi / std::sqrt(es.eigenvalues()[k]));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double ResponseHistory::energy_residual() const {
  double peak = 0.0, worst = 0.0;
  for (Eigen::Index k = 0; k < steps(); ++k) {
    peak = std::max(peak, std::abs(input_energy[k]));
    worst = std::max(worst, std::abs(input_energy[k] - kinetic_energy[k] - strain_energy[k] - damped_energy[k]));
  }
  return peak > 0.0 ? worst / peak : 0.0;
}

ResponseHistory newmark(const ReducedSystem& sys, const GroundMotion& gm, const NewmarkParams& params) {
  if (gm.size() < 2 || !(gm.dt > 0.0)) throw ConfigError("newmark: record needs at least two samples");
  if (!(params.beta > 0.0 && params.gamma > 0.0)) throw ConfigError("newmark: beta and gamma must be positive");
  double target = params.dt_sub > 0.0 ? params.dt_sub : std::min(gm.dt, sys.impulsive_period / 20.0);
  if (target > gm.dt) throw ConfigError("newmark: dt_sub must not exceed the record step");
  const int sub = std::max(1, static_cast<int>(std::ceil(gm.dt / target - 1e-9)));
  const double dt = gm.dt / sub;
  const Eigen::Index steps = (gm.size() - 1) * sub + 1;
  const int n = sys.size(), nc = sys.convective_count();
  const double beta = params.beta, gamma = params.gamma;

  ResponseHistory h;
  h.dt = dt;
  h.probes = sys.probes;
  const auto np = static_cast<Eigen::Index>(sys.probes.size());
  h.time.resize(steps);
  h.ground.resize(steps);
  h.displacement.resize(steps, n);
  for (Eigen::VectorXd* v : {&h.base_shear, &h.moment, &h.eta0, &h.eta_pi, &h.base_edge_pressure, &h.uplift0,
                             &h.uplift_pi, &h.input_energy, &h.kinetic_energy, &h.strain_energy, &h.damped_energy})
    v->setZero(steps);
  h.wall_pressure.setZero(steps, np);

  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index i = k / sub, r = k % sub;
    h.time[k] = static_cast<double>(k) * dt;
    h.ground[k] = r == 0 ? gm.accel[i] : gm.accel[i] + (gm.accel[i + 1] - gm.accel[i]) * static_cast<double>(r) / sub;
  }

  auto spring = [&](double th, double& tangent) {
    const double a = std::abs(th);
    tangent = sys.moment_of_rotation.slope(a);
    const double m = sys.moment_of_rotation(a);
    return th < 0.0 ? -m : m;
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n), a(n);
  if (params.initial_displacement.size() == n) u = params.initial_displacement;
  double fs_theta = 0.0, kt = 0.0;
  if (sys.rocking) fs_theta = spring(u[sys.theta], kt);
  auto internal = [&](const Eigen::VectorXd& x, double fnl) {
    Eigen::VectorXd f = sys.K * x;
    if (sys.rocking) f[sys.theta] += fnl;
    return f;
  };
  const Eigen::LDLT<Eigen::MatrixXd> mass_ldlt(sys.M);
  {
    const Eigen::VectorXd rhs = -sys.load * h.ground[0] - sys.C * v - internal(u, fs_theta);
    a = mass_ldlt.solve(rhs);
  }

  const double a1 = 1.0 / (beta * dt * dt), a2 = gamma / (beta * dt);
  const Eigen::MatrixXd Klin = a1 * sys.M + a2 * sys.C + sys.K;
  const Eigen::LDLT<Eigen::MatrixXd> lin_ldlt(Klin);

  // initial potential energy counts as already stored work
  double e_in = 0.0, e_strain = 0.0, e_damp = 0.0;
  if (params.initial_displacement.size() == n) {
    e_strain = 0.5 * u.dot(sys.K * u);
    e_in = e_strain;
  }
  double peak_force = 0.0;

  auto record = [&](Eigen::Index k, const Eigen::VectorXd& x, const Eigen::VectorXd& acc) {
    h.displacement.row(k) = x.transpose();
    const double ag = h.ground[k];
    const double th_acc = sys.rocking ? acc[sys.theta] : 0.0;
    double shear = sys.shell_mass * (ag + sys.shell_height * th_acc);
    double moment = sys.shell_mass * sys.shell_height * (ag + sys.shell_height * th_acc);
    for (int j = 0; j <= nc; ++j) {
      const double m = sys.masses[static_cast<std::size_t>(j)], hj = sys.heights[static_cast<std::size_t>(j)];
      const double aj = ag + acc[j] + hj * th_acc;
      shear += m * aj;
      moment += m * hj * aj;
    }
    h.base_shear[k] = shear;
    h.moment[k] = moment;

    const double ai = ag + acc[0] + sys.heights[0] * th_acc;  // impulsive absolute acceleration
    Eigen::VectorXd pseudo(nc);
    std::vector<double> surface(static_cast<std::size_t>(nc));
    for (int j = 0; j < nc; ++j) {
      const auto& mode = sys.modes[static_cast<std::size_t>(j)];
      pseudo[j] = mode.omega * mode.omega * x[j + 1];
      surface[static_cast<std::size_t>(j)] = convective_surface_pressure(mode, sys.spec, pseudo[j]);
    }
    const double eta = wave_height_profile(surface, sys.spec);
    h.eta0[k] = eta;
    h.eta_pi[k] = -eta;
    const Eigen::VectorXd p = sys.rigid_probe * ai + sys.convective_probe * pseudo;
    h.wall_pressure.row(k) = p.head(np).transpose();
    h.base_edge_pressure[k] = p[np];
    if (sys.rocking) {
      const double th = x[sys.theta];
      const double w = std::max(sys.uplift_of_rotation(std::abs(th)), 0.0);
      h.uplift0[k] = th > 0.0 ? w : 0.0;
      h.uplift_pi[k] = th < 0.0 ? w : 0.0;
    }
    h.input_energy[k] = e_in;
    h.kinetic_energy[k] = 0.5 * v.dot(sys.M * v);
    h.strain_energy[k] = e_strain;
    h.damped_energy[k] = e_damp;
  };
  record(0, u, a);

  for (Eigen::Index k = 1; k < steps; ++k) {
    const Eigen::VectorXd F = -sys.load * h.ground[k];
    const Eigen::VectorXd F0 = -sys.load * h.ground[k - 1];
    // predictor terms shared by every iteration
    const Eigen::VectorXd pa = u / (beta * dt * dt) + v / (beta * dt) + (0.5 / beta - 1.0) * a;
    const Eigen::VectorXd pv = gamma / (beta * dt) * u + (gamma / beta - 1.0) * v + dt * (0.5 * gamma / beta - 1.0) * a;
    const Eigen::VectorXd fd_old = sys.C * v;
    const Eigen::VectorXd fs_old = internal(u, fs_theta);

    Eigen::VectorXd un;
    double fs_new = fs_theta;
    if (!sys.rocking) {
      un = lin_ldlt.solve(F + sys.M * pa + sys.C * pv);
    } else {
      un = u;
      const int t = sys.theta;
      int it = 0;
      for (;; ++it) {
        fs_new = spring(un[t], kt);
        const Eigen::VectorXd an = a1 * un - pa, vn = a2 * un - pv;
        const Eigen::VectorXd res = F - sys.M * an - sys.C * vn - internal(un, fs_new);
        const double scale = std::max({peak_force, F.cwiseAbs().maxCoeff(), std::abs(fs_new), 1e-300});
        if (res.norm() < params.newton_tolerance * scale) break;
        if (it >= params.newton_max_iter)
          throw NumericError("newmark: Newton iteration did not converge at step " + std::to_string(k) +
                             " (t = " + format_double(h.time[k]) + " s)");
        Eigen::MatrixXd J = Klin;
        J(t, t) += kt;
        const Eigen::VectorXd step = J.ldlt().solve(res);
        // backtracking keeps Newton from bouncing between the stiff bearing
        // branch and the soft uplift branch of the spring
        double lambda = 1.0;
        const double r0 = res.norm();
        for (int ls = 0; ls < 30; ++ls) {
          const Eigen::VectorXd trial = un + lambda * step;
          double kt_trial = 0.0;
          const double f_trial = spring(trial[t], kt_trial);
          const Eigen::VectorXd r_trial =
              F - sys.M * (a1 * trial - pa) - sys.C * (a2 * trial - pv) - internal(trial, f_trial);
          if (r_trial.norm() < (1.0 - 1e-4 * lambda) * r0) break;
          lambda *= 0.5;
        }
        un += lambda * step;
      }
      h.newton_iterations += it;
    }
    const Eigen::VectorXd an = a1 * un - pa;
    const Eigen::VectorXd vn = a2 * un - pv;
    if (!un.allFinite() || !vn.allFinite() || !an.allFinite())
      throw NumericError("newmark: non-finite response at step " + std::to_string(k) + "; last valid t = " +
                         format_double(h.time[k - 1]) + " s");

    // trapezoidal work increments; they close exactly for average acceleration
    const Eigen::VectorXd du = un - u;
    const Eigen::VectorXd fs_now = internal(un, fs_new);
    e_in += 0.5 * (F + F0).dot(du);
    e_strain += 0.5 * (fs_now + fs_old).dot(du);
    e_damp += 0.5 * (sys.C * vn + fd_old).dot(du);
    peak_force = std::max(peak_force, fs_now.cwiseAbs().maxCoeff());

    u = un;
    v = vn;
    a = an;
    fs_theta = fs_new;
    record(k, u, a);
  }
  return h;
}

namespace {

Peak peak_of(const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  Peak p;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (std::abs(x[k]) > p.value) {
      p.value = std::abs(x[k]);
      p.time = t[k];
    }
  return p;
}

}  // namespace

PeakReport peak_report(const ResponseHistory& h, const TankSpec& spec) {
  PeakReport r;
  const Peak e0 = peak_of(h.eta0, h.time), epi = peak_of(h.eta_pi, h.time);
  r.wave_height = e0.value >= epi.value ? e0 : epi;
  const Peak w0 = peak_of(h.uplift0, h.time), wpi = peak_of(h.uplift_pi, h.time);
  r.uplift = w0.value >= wpi.value ? w0 : wpi;
  r.base_shear = peak_of(h.base_shear, h.time);
  r.moment = peak_of(h.moment, h.time);
  r.base_edge_pressure = peak_of(h.base_edge_pressure, h.time);
  r.probes = h.probes;
  for (Eigen::Index j = 0; j < h.wall_pressure.cols(); ++j) r.wall_pressure.push_back(peak_of(h.wall_pressure.col(j), h.time));
  r.freeboard = spec.geometry.freeboard();
  r.freeboard_exceeded = r.wave_height.value > r.freeboard;
  return r;
}

std::string response_csv(const ResponseHistory& h) {
  std::ostringstream os;
  os << "time_s,ground_m_s2,base_shear_N,moment_Nm,eta_0_m,eta_pi_m";
  for (double z : h.probes) os << ",p_zeta_" << format_double(z) << "_Pa";
  os << ",p_base_edge_Pa,uplift_0_m,uplift_pi_m,E_input_J,E_kinetic_J,E_strain_J,E_damped_J\n";
  for (Eigen::Index k = 0; k < h.steps(); ++k) {
    os << format_double(h.time[k]) << ',' << format_double(h.ground[k]) << ',' << format_double(h.base_shear[k]) << ','
       << format_double(h.moment[k]) << ',' << format_double(h.eta0[k]) << ',' << format_double(h.eta_pi[k]);
    for (Eigen::Index j = 0; j < h.wall_pressure.cols(); ++j) os << ',' << format_double(h.wall_pressure(k, j));
    os << ',' << format_double(h.base_edge_pressure[k]) << ',' << format_double(h.uplift0[k]) << ','
       << format_double(h.uplift_pi[k]) << ',' << format_double(h.input_energy[k]) << ','
       << format_double(h.kinetic_energy[k]) << ',' << format_double(h.strain_energy[k]) << ','
       << format_double(h.damped_energy[k]) << '\n';
  }
  return os.str();
}

}  // namespace tankseis
