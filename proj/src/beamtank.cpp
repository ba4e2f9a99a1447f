#include "tankseis/beamtank.hpp"

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
constexpr double kBetaL = 1.8751040687119611;  // first root of 1 + cos x cosh x

struct Hermite {
  double n1, n2, n3, n4;  // w1, th1, w2, th2
};

Hermite hermite(double s, double L) {
  const double s2 = s * s, s3 = s2 * s;
  return {1 - 3 * s2 + 2 * s3, L * (s - 2 * s2 + s3), 3 * s2 - 2 * s3, L * (-s2 + s3)};
}

}  // namespace

double cantilever_period(double length, double mass_per_length, double bending_stiffness) {
  const double omega = kBetaL * kBetaL * std::sqrt(bending_stiffness / (mass_per_length * std::pow(length, 4)));
  return 2.0 * kPi / omega;
}

BeamModel build_beam(const TankSpec& spec, const BeamOptions& opts) {
  const auto& g = spec.geometry;
  if (opts.stations < 3) throw std::invalid_argument("beam model needs at least 3 stations");
  if (!(g.radius > 0.0 && g.fill_height > 0.0 && g.shell_thickness > 0.0 && g.total_height >= g.fill_height))
    throw ConfigError("beam model: invalid geometry");

  BeamModel b;
  const int elements = opts.stations - 1;
  int wet = elements;
  if (g.total_height > g.fill_height * (1.0 + 1e-12)) {
    wet = static_cast<int>(std::lround(elements * g.fill_height / g.total_height));
    wet = std::clamp(wet, 1, elements - 1);
  }
  b.z.resize(opts.stations);
  for (int k = 0; k <= wet; ++k) b.z[k] = g.fill_height * k / wet;
  for (int k = wet + 1; k <= elements; ++k)
    b.z[k] = g.fill_height + (g.total_height - g.fill_height) * (k - wet) / (elements - wet);
  b.z[wet] = g.fill_height;
  b.wet_stations = wet + 1;

  const double R = g.radius, s = g.shell_thickness;
  b.bending_stiffness = spec.shell.elastic_modulus * kPi * R * R * R * s;
  b.shear_stiffness = opts.shear_coefficient * spec.shell.shear_modulus() * 2.0 * kPi * R * s;
  b.structural_mass = spec.shell.density * 2.0 * kPi * R * s;
  b.added_mass = Eigen::VectorXd::Zero(opts.stations);
  b.top_mass = spec.top_ring_mass;
  b.timoshenko = opts.timoshenko;
  return b;
}

Eigen::VectorXd added_mass_from_pressure(const PressureProfile& profile, const ModeShape& psi, const TankSpec& spec,
                                         const SeriesOptions& opts) {
  const std::size_t n = profile.zeta.size();
  std::vector<double> shape(n);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    shape[k] = psi(profile.zeta[k]);
    peak = std::max(peak, std::abs(shape[k]));
  }
  std::vector<double> small;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(shape[k]) < 1e-6 * peak) small.push_back(profile.zeta[k]);
  Eigen::VectorXd rigid;
  if (!small.empty()) rigid = rigid_impulsive_pressure_profile(spec, small, opts).pressure;

  const double R = spec.geometry.radius;
  Eigen::VectorXd ma(static_cast<Eigen::Index>(n));
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (std::abs(shape[k]) < 1e-6 * peak)
      ma[i] = kPi * R * rigid[static_cast<Eigen::Index>(j++)];
    else
      ma[i] = kPi * R * profile.pressure[i] / shape[k];
  }
  return ma;
}

BeamMode fundamental_mode(const BeamModel& beam) {
  const int nn = static_cast<int>(beam.z.size());
  const int ndof = 2 * nn;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ndof, ndof), M = Eigen::MatrixXd::Zero(ndof, ndof);
  const double EI = beam.bending_stiffness;
  // 4-point Gauss on [0, 1]
  const double gx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
  const double gw[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};

  for (int e = 0; e + 1 < nn; ++e) {
    const double L = beam.z[e + 1] - beam.z[e];
    const double phi = beam.timoshenko ? 12.0 * EI / (beam.shear_stiffness * L * L) : 0.0;
    Eigen::Matrix4d ke;
    ke << 12, 6 * L, -12, 6 * L,                                   //
        6 * L, (4 + phi) * L * L, -6 * L, (2 - phi) * L * L,       //
        -12, -6 * L, 12, -6 * L,                                   //
        6 * L, (2 - phi) * L * L, -6 * L, (4 + phi) * L * L;
    ke *= EI / (L * L * L * (1.0 + phi));

    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    for (int q = 0; q < 4; ++q) {
      const Hermite h = hermite(gx[q], L);
      const Eigen::Vector4d N(h.n1, h.n2, h.n3, h.n4);
      const double m = beam.structural_mass + (1.0 - gx[q]) * beam.added_mass[e] + gx[q] * beam.added_mass[e + 1];
      me.noalias() += (gw[q] * L * m) * (N * N.transpose());
    }
    K.block<4, 4>(2 * e, 2 * e) += ke;
    M.block<4, 4>(2 * e, 2 * e) += me;
  }
  M(ndof - 2, ndof - 2) += beam.top_mass;

  // clamp the base (first two DOFs)
  const int nf = ndof - 2;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K.bottomRightCorner(nf, nf),
                                                               M.bottomRightCorner(nf, nf));
  if (es.info() != Eigen::Success) throw NumericError("beam eigenproblem failed");
  const double w2 = es.eigenvalues()[0];
  if (!(w2 > 0.0)) throw NumericError("beam eigenproblem: non-positive fundamental eigenvalue");

  BeamMode mode;
  mode.period = 2.0 * kPi / std::sqrt(w2);
  mode.deflection = Eigen::VectorXd::Zero(nn);
  mode.rotation = Eigen::VectorXd::Zero(nn);
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  for (int k = 1; k < nn; ++k) {
    mode.deflection[k] = v[2 * k - 2];
    mode.rotation[k] = v[2 * k - 1];
  }
  const double ref = mode.deflection[beam.wet_stations - 1];
  if (ref == 0.0) throw NumericError("beam mode has no deflection at the fill height");
  mode.deflection /= ref;
  mode.rotation /= ref;
  return mode;
}

ModeShape wetted_shape(const BeamModel& beam, const BeamMode& mode, double fill_height) {
  const int wet = beam.wet_stations;
  std::vector<double> z(beam.z.data(), beam.z.data() + wet);
  std::vector<double> w(mode.deflection.data(), mode.deflection.data() + wet);
  std::vector<double> t(mode.rotation.data(), mode.rotation.data() + wet);
  return [z, w, t, fill_height](double zeta) {
    const double x = std::clamp(zeta, 0.0, 1.0) * fill_height;
    auto it = std::upper_bound(z.begin(), z.end(), x);
    std::size_t e = (it == z.begin()) ? 0 : static_cast<std::size_t>(it - z.begin()) - 1;
    e = std::min(e, z.size() - 2);
    const double L = z[e + 1] - z[e];
    const Hermite h = hermite((x - z[e]) / L, L);
    return h.n1 * w[e] + h.n2 * t[e] + h.n3 * w[e + 1] + h.n4 * t[e + 1];
  };
}

ModeShape cantilever_shape(double length, double fill_height) {
  const double b = kBetaL / length;
  const double sigma = (std::cosh(kBetaL) + std::cos(kBetaL)) / (std::sinh(kBetaL) + std::sin(kBetaL));
  auto phi = [b, sigma](double x) {
    return std::cosh(b * x) - std::cos(b * x) - sigma * (std::sinh(b * x) - std::sin(b * x));
  };
  const double ref = phi(fill_height);
  return [phi, ref, fill_height](double zeta) { return phi(zeta * fill_height) / ref; };
}

ImpulsiveMode impulsive_mode(const TankSpec& spec, const BeamOptions& opts) {
  if (opts.max_iter < 1) throw std::invalid_argument("impulsive_mode: max_iter must be >= 1");
  ImpulsiveMode out;
  out.beam = build_beam(spec, opts);
  BeamModel& beam = out.beam;
  const double H = spec.geometry.fill_height;

  if (spec.liquid.density == 0.0) {
    out.mode = fundamental_mode(beam);
    out.period = out.mode.period;
    out.iterations = 1;
    out.trajectory = {out.period};
    out.shape = wetted_shape(beam, out.mode, H);
    return out;
  }

  std::vector<double> grid(static_cast<std::size_t>(beam.wet_stations));
  for (int k = 0; k < beam.wet_stations; ++k) grid[static_cast<std::size_t>(k)] = std::min(1.0, beam.z[k] / H);

  ModeShape psi = cantilever_shape(spec.geometry.total_height, H);
  double previous = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const PressureProfile p = flexible_impulsive_pressure_profile(spec, psi, grid, opts.series);
    const Eigen::VectorXd ma = added_mass_from_pressure(p, psi, spec, opts.series);
    beam.added_mass.setZero();
    beam.added_mass.head(beam.wet_stations) = ma.cwiseMax(0.0);
    out.mode = fundamental_mode(beam);
    out.trajectory.push_back(out.mode.period);
    psi = wetted_shape(beam, out.mode, H);
    if (it > 1 && std::abs(out.mode.period - previous) < opts.tolerance * out.mode.period) {
      out.period = out.mode.period;
      out.iterations = it;
      out.shape = psi;
      return out;
    }
    previous = out.mode.period;
  }
  std::ostringstream msg;
  msg << "impulsive_mode: no convergence in " << opts.max_iter << " iterations; periods:";
  for (double t : out.trajectory) msg << ' ' << format_double(t);
  throw BeamIterationError(msg.str(), out.trajectory);
}

std::string mode_shape_csv(const ImpulsiveMode& mode, int points) {
  std::ostringstream os;
  os << "zeta,psi\n";
  for (int k = 0; k < points; ++k) {
    const double zeta = points > 1 ? static_cast<double>(k) / (points - 1) : 0.0;
    os << format_double(zeta) << ',' << format_double(mode.shape(zeta)) << '\n';
  }
  return os.str();
}

}  // namespace tankseis
