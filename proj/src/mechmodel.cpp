#include "tankseis/mechmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tankseis/bessel.hpp"

namespace tankseis {

namespace {

constexpr double kPi = std::numbers::pi;

double nu(int n) { return (2 * n + 1) * kPi / 2.0; }

// cos(nu_n zeta) written as (-1)^n sin(nu_n (1 - zeta)) so that it is exactly
// zero at the free surface.
double cos_nu(int n, double zeta) {
  const double s = std::sin(nu(n) * (1.0 - zeta));
  return (n % 2 == 0) ? s : -s;
}

double sign(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// Series terms stop once `run` consecutive contributions fall below tol.
struct TailCounter {
  double tol;
  int run = 0;
  bool done(double contribution, double total) {
    run = (std::abs(contribution) < tol * std::abs(total)) ? run + 1 : 0;
    return run >= 3;
  }
};

void check_grid(const std::vector<double>& grid) {
  for (double z : grid)
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("pressure grid must lie in [0, 1]");
}

// Moments of t^k against cos/sin on [-h, h] expressed through x = nu h:
//   int cos(nu t) = 2h S0, int t sin(nu t) = 2h^2 S1, int t^2 cos(nu t) = 2h^3 S2.
void filon_moments(double x, double& s0, double& s1, double& s2) {
  if (std::abs(x) < 0.2) {
    const double x2 = x * x;
    s0 = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0 + x2 * x2 * x2 * x2 / 362880.0;
    s1 = x * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0);
    s2 = 1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0 + x2 * x2 * x2 * x2 / 443520.0;
    return;
  }
  const double s = std::sin(x), c = std::cos(x);
  s0 = s / x;
  s1 = (s - x * c) / (x * x);
  s2 = (x * x * s + 2.0 * x * c - 2.0 * s) / (x * x * x);
}

}  // namespace

std::vector<double> bessel_j1prime_roots(int count) { return bessel::j_prime_roots(1, count); }

std::vector<ConvectiveMode> convective_params(const TankSpec& spec, int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("convective_params: n_modes must be >= 1");
  const double R = spec.geometry.radius;
  const double H = spec.geometry.fill_height;
  const double gamma = H / R;
  const double g = spec.gravity;
  const double mL = liquid_mass(spec);
  const auto roots = bessel_j1prime_roots(n_modes);
  std::vector<ConvectiveMode> modes;
  modes.reserve(roots.size());
  for (int n = 0; n < n_modes; ++n) {
    const double lam = roots[static_cast<std::size_t>(n)];
    const double x = lam * gamma;
    ConvectiveMode m;
    m.index = n + 1;
    m.lambda = lam;
    m.omega = std::sqrt(g * lam / R * std::tanh(x));
    m.period = 2.0 * kPi / m.omega;
    m.mass = mL * 2.0 * std::tanh(x) / (gamma * lam * (lam * lam - 1.0));
    // (cosh x - 1)/sinh x = tanh(x/2)
    m.height = H * (1.0 - std::tanh(0.5 * x) / x);
    m.height_with_base = H * (1.0 + (1.0 / std::sinh(x) - std::tanh(0.5 * x)) / x);
    modes.push_back(m);
  }
  return modes;
}

// EN 1998-4:2006 Annex A, Table A.2 (after Malhotra, Wenk & Wieland, 2000,
// "Simple procedure for seismic analysis of liquid-storage tanks",
// Structural Engineering International 10(3)): C_i versus H/R.
double impulsive_period_coefficient(double slenderness) {
  static constexpr double kRatio[] = {0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 2.5, 3.0};
  static constexpr double kCi[] = {9.28, 7.74, 6.97, 6.36, 6.06, 6.21, 6.56, 7.03};
  constexpr int n = 8;
  int k = 0;
  if (slenderness >= kRatio[n - 1])
    k = n - 2;
  else if (slenderness > kRatio[0])
    while (kRatio[k + 1] < slenderness) ++k;
  const double t = (slenderness - kRatio[k]) / (kRatio[k + 1] - kRatio[k]);
  return kCi[k] + t * (kCi[k + 1] - kCi[k]);
}

ImpulsiveComponent impulsive_params(const TankSpec& spec, const SeriesOptions& opts) {
  const auto& geo = spec.geometry;
  const double R = geo.radius, H = geo.fill_height, gamma = H / R;
  const double mL = liquid_mass(spec);

  ImpulsiveComponent out;
  double conv = 0.0;
  for (const auto& m : convective_params(spec, kMassClosureModes)) conv += m.mass;
  out.mass = mL - conv;

  // Rigid-wall pressure resultant: force ~ sum r_n/nu^3, wall moment and
  // base-plate moment series as in the impulsive pressure solution.
  double force = 0.0, alt = 0.0, base = 0.0;
  TailCounter tail{opts.tail_tolerance};
  for (int n = 0; n < opts.max_terms; ++n) {
    const double v = nu(n);
    const double a = v / gamma;
    const double r = bessel::i1_over_i1_prime(a);
    const double term = r / (v * v * v);
    force += term;
    alt += sign(n) * r / (v * v * v * v);
    base += sign(n) * bessel::i2_over_i1_prime(a) / (v * v * v);
    if (tail.done(term, force)) break;
  }
  out.series_mass = mL * 2.0 * gamma * force;
  out.height = H * (1.0 - alt / force);
  out.height_with_base = H * (1.0 - alt / force + base / (gamma * force));

  const double s = geo.shell_thickness;
  out.period_coefficient = impulsive_period_coefficient(gamma);
  out.period = out.period_coefficient * H * std::sqrt(spec.liquid.density) /
               (std::sqrt(s / R) * std::sqrt(spec.shell.elastic_modulus));
  return out;
}

std::vector<double> uniform_grid(int points) {
  if (points < 2) throw std::invalid_argument("uniform_grid: need at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = static_cast<double>(k) / (points - 1);
  g.back() = 1.0;
  return g;
}

PressureProfile rigid_impulsive_pressure_profile(const TankSpec& spec, const std::vector<double>& grid,
                                                 const SeriesOptions& opts) {
  check_grid(grid);
  const double gamma = spec.geometry.slenderness();
  const double scale = spec.liquid.density * spec.geometry.fill_height;
  PressureProfile p;
  p.kind = ProfileKind::rigid_impulsive;
  p.zeta = grid;
  p.pressure = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  double total = 0.0;
  TailCounter tail{opts.tail_tolerance};
  int n = 0;
  for (; n < opts.max_terms; ++n) {
    const double v = nu(n);
    const double r = bessel::i1_over_i1_prime(v / gamma);
    const double c = 2.0 * sign(n) * r / (v * v);
    for (std::size_t k = 0; k < grid.size(); ++k)
      p.pressure[static_cast<Eigen::Index>(k)] += c * cos_nu(n, grid[k]);
    const double contribution = 2.0 * r / (v * v * v);  // c_n * int cos = c_n (-1)^n / nu
    total += contribution;
    if (tail.done(contribution, total)) break;
  }
  p.terms = n + 1;
  p.pressure *= scale;
  return p;
}

PressureProfile convective_pressure_profile(const ConvectiveMode& mode, const TankSpec& spec,
                                            const std::vector<double>& grid) {
  check_grid(grid);
  const double R = spec.geometry.radius;
  const double x = mode.lambda * spec.geometry.slenderness();
  const double amp = spec.liquid.density * 2.0 * R / (mode.lambda * mode.lambda - 1.0);
  PressureProfile p;
  p.kind = ProfileKind::convective;
  p.mode = mode.index;
  p.zeta = grid;
  p.pressure.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double z = grid[k];
    // cosh(x z)/cosh(x) without overflow
    const double ratio = std::exp(x * (z - 1.0)) * (1.0 + std::exp(-2.0 * x * z)) / (1.0 + std::exp(-2.0 * x));
    p.pressure[static_cast<Eigen::Index>(k)] = amp * ratio;
  }
  return p;
}

Eigen::VectorXd participation_integrals(const ModeShape& psi, int count, int intervals) {
  if (intervals < 2 || intervals % 2) throw std::invalid_argument("participation_integrals: intervals must be even");
  const double h = 1.0 / intervals;
  std::vector<double> f(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) f[static_cast<std::size_t>(k)] = psi(k == intervals ? 1.0 : k * h);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(count);
  for (int n = 0; n < count; ++n) {
    const double v = nu(n);
    double s0, s1, s2;
    filon_moments(v * h, s0, s1, s2);
    double sum = 0.0;
    for (int k = 0; k + 2 <= intervals; k += 2) {
      const double fm = f[static_cast<std::size_t>(k)];
      const double f0 = f[static_cast<std::size_t>(k) + 1];
      const double fp = f[static_cast<std::size_t>(k) + 2];
      const double c = (k + 1) * h;
      const double alpha = f0;
      const double beta = (fp - fm) / (2.0 * h);
      const double delta = (fp - 2.0 * f0 + fm) / (2.0 * h * h);
      sum += std::cos(v * c) * (alpha * 2.0 * h * s0 + delta * 2.0 * h * h * h * s2) -
             std::sin(v * c) * (beta * 2.0 * h * h * s1);
    }
    b[n] = sum;
  }
  return b;
}

PressureProfile flexible_impulsive_pressure_profile(const TankSpec& spec, const ModeShape& psi,
                                                    const std::vector<double>& grid,
                                                    const SeriesOptions& opts, bool require_fixed_base) {
  check_grid(grid);
  if (require_fixed_base && std::abs(psi(0.0)) > 1e-6)
    throw std::invalid_argument("flexible impulsive profile: mode shape must vanish at the base");
  const int intervals = std::max(200, opts.quadrature_intervals + opts.quadrature_intervals % 2);
  const double gamma = spec.geometry.slenderness();
  const double scale = spec.liquid.density * spec.geometry.fill_height;

  PressureProfile p;
  p.kind = ProfileKind::flexible_impulsive;
  p.zeta = grid;
  p.pressure = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));

  // Participation integrals are evaluated in blocks as the series grows.
  const int block = 64;
  Eigen::VectorXd b;
  double total = 0.0;
  TailCounter tail{opts.tail_tolerance};
  int n = 0;
  for (; n < opts.max_terms; ++n) {
    if (n >= b.size()) {
      const Eigen::VectorXd more = participation_integrals(
          [&psi](double z) { return psi(z); }, static_cast<int>(b.size()) + block, intervals);
      b = more;
    }
    const double v = nu(n);
    const double r = bessel::i1_over_i1_prime(v / gamma);
    const double c = 2.0 * r * b[n] / v;
    for (std::size_t k = 0; k < grid.size(); ++k)
      p.pressure[static_cast<Eigen::Index>(k)] += c * cos_nu(n, grid[k]);
    const double contribution = c * sign(n) / v;
    total += contribution;
    if (tail.done(contribution, total)) break;
  }
  p.terms = n + 1;
  p.pressure *= scale;
  return p;
}

double convective_surface_pressure(const ConvectiveMode& mode, const TankSpec& spec, double accel) {
  return spec.liquid.density * 2.0 * spec.geometry.radius / (mode.lambda * mode.lambda - 1.0) * accel;
}

double wave_height_profile(const std::vector<double>& modal_surface_pressures, const TankSpec& spec) {
  double sum = 0.0;
  for (double p : modal_surface_pressures) sum += p;
  return sum / (spec.liquid.density * spec.gravity);
}

namespace {

PressureProfile combine(const std::vector<PressureProfile>& parts, const std::vector<double>& accels, bool srss) {
  if (parts.empty() || parts.size() != accels.size())
    throw std::invalid_argument("combine: need one acceleration per profile");
  PressureProfile out;
  out.kind = ProfileKind::combined;
  out.zeta = parts.front().zeta;
  out.pressure = Eigen::VectorXd::Zero(parts.front().pressure.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].pressure.size() != out.pressure.size())
      throw std::invalid_argument("combine: profiles on different grids");
    const Eigen::ArrayXd term = (parts[k].pressure * accels[k]).array().abs();
    if (srss)
      out.pressure.array() += term.square();
    else
      out.pressure.array() += term;
  }
  if (srss) out.pressure = out.pressure.cwiseSqrt();
  return out;
}

}  // namespace

PressureProfile combine_srss(const std::vector<PressureProfile>& parts, const std::vector<double>& accels) {
  return combine(parts, accels, true);
}

PressureProfile combine_absolute(const std::vector<PressureProfile>& parts, const std::vector<double>& accels) {
  return combine(parts, accels, false);
}

double wall_resultant(const PressureProfile& profile, const TankSpec& spec) {
  const auto& z = profile.zeta;
  const auto& p = profile.pressure;
  const std::size_t n = z.size();
  double integral = 0.0;
  bool uniform = n >= 3 && n % 2 == 1;
  const double h = n > 1 ? (z.back() - z.front()) / static_cast<double>(n - 1) : 0.0;
  for (std::size_t k = 1; uniform && k < n; ++k)
    if (std::abs(z[k] - z[k - 1] - h) > 1e-12) uniform = false;
  if (uniform) {
    for (std::size_t k = 0; k + 2 < n; k += 2)
      integral += h / 3.0 * (p[static_cast<Eigen::Index>(k)] + 4.0 * p[static_cast<Eigen::Index>(k + 1)] +
                             p[static_cast<Eigen::Index>(k + 2)]);
  } else {
    for (std::size_t k = 1; k < n; ++k)
      integral += 0.5 * (z[k] - z[k - 1]) * (p[static_cast<Eigen::Index>(k)] + p[static_cast<Eigen::Index>(k - 1)]);
  }
  return kPi * spec.geometry.radius * spec.geometry.fill_height * integral;
}

}  // namespace tankseis
