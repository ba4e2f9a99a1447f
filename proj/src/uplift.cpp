#include "tankseis/uplift.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <limits>
#include <stdexcept>

#include "tankseis/config.hpp"
#include "tankseis/parallel.hpp"

namespace tankseis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGapTol = 1e-12;  // m

double plate_rigidity(const TankSpec& spec) {
  const double t = spec.geometry.bottom_thickness, nu = spec.shell.poisson_ratio;
  return spec.shell.elastic_modulus * t * t * t / (12.0 * (1.0 - nu * nu));
}

}  // namespace

EndRestraint parse_end_restraint(const std::string& s) {
  if (s == "pinned") return EndRestraint::pinned;
  if (s == "rotation_spring" || s == "spring") return EndRestraint::rotation_spring;
  if (s == "fixed") return EndRestraint::fixed;
  throw ConfigError("unknown end restraint '" + s + "' (pinned, rotation_spring, fixed)");
}

std::string to_string(EndRestraint e) {
  switch (e) {
    case EndRestraint::pinned: return "pinned";
    case EndRestraint::rotation_spring: return "rotation_spring";
    case EndRestraint::fixed: return "fixed";
  }
  return "?";
}

StripModel tank_strip(const TankSpec& spec, double max_uplift, int nodes, EndRestraint end) {
  StripModel s;
  s.rigidity = plate_rigidity(spec);
  s.load = spec.liquid.density * spec.gravity * spec.geometry.fill_height;
  s.nodes = nodes;
  s.end = end;
  const double ts = spec.geometry.shell_thickness, nu = spec.shell.poisson_ratio;
  s.spring = spec.shell.elastic_modulus * ts * ts * ts / (12.0 * (1.0 - nu * nu)) /
             std::sqrt(spec.geometry.radius * ts);
  // a fixed edge lifts about 3^(1/4) times the pinned length; 4x covers it
  const double pinned = std::pow(24.0 * s.rigidity * std::max(max_uplift, 1e-6) / s.load, 0.25);
  s.length = 4.0 * pinned;
  return s;
}

StripSolution solve_strip(const StripModel& strip, double uplift) {
  if (!(uplift >= 0.0)) throw std::invalid_argument("solve_strip: uplift must be >= 0");
  if (!(strip.rigidity > 0.0 && strip.load > 0.0 && strip.length > 0.0))
    throw std::invalid_argument("solve_strip: rigidity, load and length must be positive");
  if (strip.nodes < 3) throw std::invalid_argument("solve_strip: need at least 3 nodes");

  const int nn = strip.nodes, ndof = 2 * nn;
  const double h = strip.length / (nn - 1), D = strip.rigidity, q = strip.load;

  std::vector<Eigen::Triplet<double>> kt;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
  Eigen::Matrix4d ke;
  ke << 12, 6 * h, -12, 6 * h,          //
      6 * h, 4 * h * h, -6 * h, 2 * h * h,  //
      -12, -6 * h, 12, -6 * h,          //
      6 * h, 2 * h * h, -6 * h, 4 * h * h;
  ke *= D / (h * h * h);
  const Eigen::Vector4d fe(-q * h / 2, -q * h * h / 12, -q * h / 2, q * h * h / 12);
  for (int e = 0; e + 1 < nn; ++e) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) kt.emplace_back(2 * e + a, 2 * e + b, ke(a, b));
    f.segment<4>(2 * e) += fe;
  }
  if (strip.end == EndRestraint::rotation_spring) kt.emplace_back(1, 1, strip.spring);
  Eigen::SparseMatrix<double> K(ndof, ndof);
  K.setFromTriplets(kt.begin(), kt.end());

  // constrained DOFs: w_0 (imposed), theta_0 (fixed end), contact nodes (w = 0)
  std::vector<char> contact(static_cast<std::size_t>(nn), 1);
  contact[0] = 0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  Eigen::VectorXd residual;
  int iter = 0;
  const int max_iter = 2 * nn + 10;
  // start from a generous uplifted zone so the first solve mostly adds
  // penetrating nodes in one pass instead of releasing one node per pass
  const double guess = 1.5 * std::pow(24.0 * D * uplift / q, 0.25);
  for (int node = 1; node < nn; ++node) contact[static_cast<std::size_t>(node)] = node * h > guess;
  for (;; ++iter) {
    if (iter >= max_iter) throw NumericError("solve_strip: contact set did not settle");
    std::vector<int> map(static_cast<std::size_t>(ndof), -1);
    std::vector<int> free;
    for (int d = 0; d < ndof; ++d) {
      const int node = d / 2;
      const bool is_w = (d % 2 == 0);
      bool fixed = false;
      if (d == 0) fixed = true;
      if (d == 1 && strip.end == EndRestraint::fixed) fixed = true;
      if (is_w && node > 0 && contact[static_cast<std::size_t>(node)]) fixed = true;
      if (!fixed) {
        map[static_cast<std::size_t>(d)] = static_cast<int>(free.size());
        free.push_back(d);
      }
    }
    Eigen::VectorXd uc = Eigen::VectorXd::Zero(ndof);
    uc[0] = uplift;
    const Eigen::VectorXd rhs_full = f - K * uc;
    std::vector<Eigen::Triplet<double>> rt;
    for (int k = 0; k < K.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
        const int r = map[static_cast<std::size_t>(it.row())], c = map[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) rt.emplace_back(r, c, it.value());
      }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::SparseMatrix<double> Kf(nf, nf);
    Kf.setFromTriplets(rt.begin(), rt.end());
    Eigen::VectorXd rf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) rf[i] = rhs_full[free[static_cast<std::size_t>(i)]];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kf);
    if (ldlt.info() != Eigen::Success) throw NumericError("solve_strip: singular strip system");
    const Eigen::VectorXd uf = ldlt.solve(rf);
    u = uc;
    for (Eigen::Index i = 0; i < nf; ++i) u[free[static_cast<std::size_t>(i)]] = uf[i];
    residual = K * u - f;  // nodal forces the constraints must supply

    // penetrations are added first; tensile reactions are released only once
    // the gaps are admissible
    bool changed = false;
    for (int node = 1; node < nn; ++node)
      if (!contact[static_cast<std::size_t>(node)] && u[2 * node] < -kGapTol) {
        contact[static_cast<std::size_t>(node)] = 1;
        changed = true;
      }
    if (!changed) {
      const double rtol = 1e-10 * q * h;
      for (int node = 1; node < nn; ++node)
        if (contact[static_cast<std::size_t>(node)] && residual[2 * node] < -rtol) {
          contact[static_cast<std::size_t>(node)] = 0;
          changed = true;
        }
    }
    if (!changed) break;
  }
  if (u[2 * (nn - 1)] > kGapTol) throw NumericError("solve_strip: far end lifts; strip too short");

  StripSolution s;
  s.iterations = iter + 1;
  // at zero uplift the edge rests on the foundation and carries no lifting force
  s.force = uplift > kGapTol ? residual[0] : 0.0;
  s.x.resize(nn);
  s.deflection.resize(nn);
  s.rotation.resize(nn);
  s.reaction = Eigen::VectorXd::Zero(nn);
  double comp = 0.0;
  for (int node = 0; node < nn; ++node) {
    s.x[node] = node * h;
    s.deflection[node] = u[2 * node];
    s.rotation[node] = u[2 * node + 1];
    if (node > 0 && contact[static_cast<std::size_t>(node)]) s.reaction[node] = std::max(residual[2 * node], 0.0);
    if (node > 0) comp = std::max(comp, std::abs(s.deflection[node] * residual[2 * node]));
  }
  s.complementarity = comp;

  // uplifted length. Nodal contact pins the liftoff point to the mesh, so it
  // is located between the last gapped node and the first contact node by
  // fitting the exact segment field w = a s^3 - q s^4 / (24 D), s = l - x,
  // to the gapped tail of the contiguous uplifted zone.
  int last_gap = 0;
  while (last_gap + 1 < nn && !contact[static_cast<std::size_t>(last_gap + 1)] &&
         u[2 * (last_gap + 1)] > kGapTol)
    ++last_gap;
  if (uplift > kGapTol) {
    const double c4 = q / (24.0 * D);
    const int first = last_gap / 2;
    auto misfit = [&](double l) {
      double s3w = 0.0, s6 = 0.0;
      for (int k = first; k <= last_gap; ++k) {
        const double sk = l - k * h;
        s3w += sk * sk * sk * (u[2 * k] + c4 * std::pow(sk, 4));
        s6 += std::pow(sk, 6);
      }
      const double a = s3w / s6;
      double r = 0.0;
      for (int k = first; k <= last_gap; ++k) {
        const double sk = l - k * h;
        const double e = a * sk * sk * sk - c4 * std::pow(sk, 4) - u[2 * k];
        r += e * e;
      }
      return r;
    };
    double lo = last_gap * h, hi = std::min(last_gap + 2, nn - 1) * h;
    if (last_gap - first >= 2) {
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = misfit(x1), f2 = misfit(x2);
      for (int k = 0; k < 100 && hi - lo > 1e-12 * h; ++k) {
        if (f1 < f2) {
          hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = misfit(x1);
        } else {
          lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = misfit(x2);
        }
      }
    }
    s.uplift_length = 0.5 * (lo + hi);
  }

  // plate moment at the junction: end force of the first element, which is
  // exact at the nodes for Hermite elements with consistent loads
  s.junction_moment = std::abs((ke * u.head<4>() - fe)[1]);
  s.strain_energy = 0.5 * u.dot(K * u);
  s.load_work = -f.dot(u);
  return s;
}

UpliftCurve uplift_curve(const StripModel& strip, double max_uplift, int count, int jobs) {
  if (!(max_uplift > 0.0) || count < 2) throw std::invalid_argument("uplift_curve: need max_uplift > 0 and count >= 2");
  UpliftCurve c;
  c.samples.resize(static_cast<std::size_t>(count) + 1);
  parallel_for(c.samples.size(), jobs, [&](std::size_t i) {
    const double w = max_uplift * static_cast<double>(i) / count;
    UpliftSample& s = c.samples[i];
    s.uplift = w;
    if (i == 0) return;
    const StripSolution sol = solve_strip(strip, w);
    s.force = sol.force;
    s.length = sol.uplift_length;
    s.junction_moment = sol.junction_moment;
  });
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    if (c.samples[i].force < c.samples[i - 1].force || c.samples[i].length < c.samples[i - 1].length)
      throw NumericError("uplift_curve: resistance curve is not monotone");
  }
  std::vector<double> x, y;
  for (const auto& s : c.samples) {
    x.push_back(s.uplift);
    y.push_back(s.force);
  }
  c.force_of_uplift = Pchip(std::move(x), std::move(y));
  return c;
}

PlasticLimit plastic_limit_check(const StripModel& strip, double plate_thickness, double yield_stress) {
  PlasticLimit out;
  out.hinge_moment = plate_thickness * plate_thickness * yield_stress / 4.0;
  if (!std::isfinite(out.hinge_moment)) return out;
  // largest uplift the strip can carry without its far end lifting
  const double capacity = std::pow(strip.length / 4.0, 4) * strip.load / (24.0 * strip.rigidity);
  auto moment = [&](double w) { return solve_strip(strip, w).junction_moment; };
  if (moment(capacity) < out.hinge_moment) return out;
  double lo = 0.0, hi = capacity;
  for (int k = 0; k < 60 && hi - lo > 1e-9 * capacity; ++k) {
    const double mid = 0.5 * (lo + hi);
    (moment(mid) < out.hinge_moment ? lo : hi) = mid;
  }
  out.first_yield_uplift = hi;
  return out;
}

void annotate(UpliftCurve& curve, const PlasticLimit& limit) {
  for (auto& s : curve.samples)
    s.beyond_yield = limit.first_yield_uplift && s.uplift > *limit.first_yield_uplift;
}

namespace {

struct BaseForces {
  double compression = 0.0;  // N
  double holddown = 0.0;     // N
  double moment = 0.0;       // N m about the tank axis
};

// Base plane rotated by theta about the chord x = e (x = R cos phi): the
// lifting side (x > e) is held down by the strips, the other side bears on
// the foundation through the wall edge.
BaseForces base_forces(const UpliftCurve& curve, double R, double theta, double e, double kb, int sectors) {
  BaseForces b;
  const double dphi = 2.0 * kPi / sectors;
  for (int k = 0; k < sectors; ++k) {
    const double phi = (k + 0.5) * dphi;
    const double x = R * std::cos(phi);
    const double ds = R * dphi;
    if (x > e) {
      const double P = curve.force(theta * (x - e)) * ds;
      b.holddown += P;
      b.moment += P * x;
    } else {
      const double c = kb * theta * (e - x) * ds;
      b.compression += c;
      b.moment -= c * x;
    }
  }
  return b;
}

}  // namespace

MomentRotationSample base_state(const TankSpec& spec, const UpliftCurve& curve, double rotation,
                                double bearing_stiffness, int sectors) {
  const double R = spec.geometry.radius;
  const double plate = spec.shell.density * kPi * R * R * spec.geometry.bottom_thickness;
  // the plate and liquid rest on the foundation; the wall edge carries the rest
  const double wall_weight = std::max(spec.empty_mass + spec.top_ring_mass - plate, 0.0) * spec.gravity;
  const double total_weight = total_mass(spec) * spec.gravity;

  MomentRotationSample s;
  s.rotation = rotation;
  if (rotation == 0.0) {
    s.offset = std::numeric_limits<double>::infinity();
    return s;
  }
  auto imbalance = [&](double e) {
    const BaseForces b = base_forces(curve, R, rotation, e, bearing_stiffness, sectors);
    return b.compression - wall_weight - b.holddown;
  };
  // imbalance grows with e; beyond e = R nothing lifts and compression is linear in e
  double lo = -R, hi = std::max(R, wall_weight / (2.0 * kPi * R * bearing_stiffness * rotation)) * 1.01 + R * 1e-9;
  std::vector<double> trail;
  while (imbalance(hi) < 0.0) {
    hi = 2.0 * hi + R;
    if (hi > 1e12 * R) throw EquilibriumError("base_state: cannot bracket the neutral axis", trail);
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double r = imbalance(mid);
    trail.push_back(r / total_weight);
    (r < 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-13 * R) break;
  }
  const double e = 0.5 * (lo + hi);
  const BaseForces b = base_forces(curve, R, rotation, e, bearing_stiffness, sectors);
  s.offset = e;
  s.moment = b.moment;
  s.max_uplift = std::max(rotation * (R - e), 0.0);
  s.residual = std::abs(b.compression - wall_weight - b.holddown) / total_weight;
  if (!(s.residual < 5e-3)) throw EquilibriumError("base_state: vertical equilibrium not reached", trail);
  return s;
}

MomentRotationCurve moment_rotation(const TankSpec& spec, const std::vector<double>& rotations,
                                    const MomentRotationOptions& opts) {
  if (spec.geometry.anchorage != Anchorage::unanchored)
    throw ConfigError("moment_rotation: tank is anchored; the base cannot uplift");
  if (opts.sectors < 72) throw ConfigError("moment_rotation: at least 72 sectors are required");
  for (std::size_t i = 0; i < rotations.size(); ++i)
    if (!(rotations[i] >= 0.0) || (i > 0 && rotations[i] < rotations[i - 1]))
      throw std::invalid_argument("moment_rotation: rotations must be >= 0 and ascending");

  MomentRotationCurve out;
  const double R = spec.geometry.radius, s = spec.geometry.shell_thickness;
  out.bearing_stiffness =
      opts.bearing_stiffness > 0.0 ? opts.bearing_stiffness : spec.shell.elastic_modulus * s / std::sqrt(R * s);
  const double theta_max = rotations.empty() ? 0.0 : rotations.back();
  const double w_max = std::max(2.0 * R * theta_max, 1e-6);
  out.strip = tank_strip(spec, w_max, opts.nodes, opts.end);
  out.strip_curve = uplift_curve(out.strip, w_max, opts.curve_samples, opts.jobs);
  out.plastic = plastic_limit_check(out.strip, spec.geometry.bottom_thickness, spec.shell.yield_stress);
  annotate(out.strip_curve, out.plastic);

  out.samples.resize(rotations.size());
  parallel_for(rotations.size(), opts.jobs, [&](std::size_t i) {
    out.samples[i] = base_state(spec, out.strip_curve, rotations[i], out.bearing_stiffness, opts.sectors);
  });
  for (std::size_t i = 1; i < out.samples.size(); ++i)
    if (out.samples[i].moment < out.samples[i - 1].moment)
      throw NumericError("moment_rotation: resisting moment is not monotone");
  return out;
}

std::string uplift_curve_csv(const UpliftCurve& curve) {
  std::ostringstream os;
  os << "uplift_m,force_N_per_m,length_m,junction_moment_Nm_per_m,beyond_yield\n";
  for (const auto& s : curve.samples)
    os << format_double(s.uplift) << ',' << format_double(s.force) << ',' << format_double(s.length) << ','
       << format_double(s.junction_moment) << ',' << (s.beyond_yield ? 1 : 0) << '\n';
  return os.str();
}

std::string moment_rotation_csv(const MomentRotationCurve& curve) {
  std::ostringstream os;
  os << "rotation_rad,moment_Nm,offset_m,max_uplift_m,residual\n";
  for (const auto& s : curve.samples)
    os << format_double(s.rotation) << ',' << format_double(s.moment) << ','
       << (std::isfinite(s.offset) ? format_double(s.offset) : std::string("inf")) << ','
       << format_double(s.max_uplift) << ',' << format_double(s.residual) << '\n';
  return os.str();
}

}  // namespace tankseis
