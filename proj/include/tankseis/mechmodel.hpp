#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "tankseis/model.hpp"

namespace tankseis {

struct ConvectiveMode {
  int index = 1;             // n >= 1
  double lambda = 0.0;       // n-th positive root of J1'
  double mass = 0.0;         // kg
  double height = 0.0;       // m, wall pressure resultant height
  double height_with_base = 0.0;
  double period = 0.0;       // s
  double omega = 0.0;        // rad/s
};

struct ImpulsiveComponent {
  double mass = 0.0;              // m_L - sum of convective masses
  double series_mass = 0.0;       // from the rigid-wall pressure resultant
  double height = 0.0;            // m, wall pressure only
  double height_with_base = 0.0;  // m, including base-plate pressure moment
  double period = 0.0;            // s, code coefficient formula
  double period_coefficient = 0.0;
};

enum class ProfileKind { rigid_impulsive, convective, flexible_impulsive, combined };

/// Wall pressure at theta = 0 per unit acceleration, Pa/(m/s^2), sampled on
/// normalized heights zeta = z/H.
struct PressureProfile {
  ProfileKind kind = ProfileKind::rigid_impulsive;
  int mode = 0;  // convective mode index, 0 otherwise
  std::vector<double> zeta;
  Eigen::VectorXd pressure;
  int terms = 0;  // series terms used (impulsive kinds)
};

struct SeriesOptions {
  double tail_tolerance = 1e-6;
  int max_terms = 20000;
  int quadrature_intervals = 400;  // flexible profile, even and >= 200
};

/// Positive roots of J1'(lambda) = 0.
std::vector<double> bessel_j1prime_roots(int count);

std::vector<ConvectiveMode> convective_params(const TankSpec& spec, int n_modes);

/// Number of convective modes summed when closing the impulsive mass.
inline constexpr int kMassClosureModes = 200;

ImpulsiveComponent impulsive_params(const TankSpec& spec, const SeriesOptions& opts = {});

/// Impulsive period coefficient C_i as a function of H/R (linear
/// interpolation, end segments extrapolated).
double impulsive_period_coefficient(double slenderness);

std::vector<double> uniform_grid(int points);

PressureProfile rigid_impulsive_pressure_profile(const TankSpec& spec, const std::vector<double>& grid,
                                                 const SeriesOptions& opts = {});

PressureProfile convective_pressure_profile(const ConvectiveMode& mode, const TankSpec& spec,
                                            const std::vector<double>& grid);

/// Wall mode shape over the wetted height, psi(0) = 0 and psi(1) = 1.
using ModeShape = std::function<double(double)>;

/// Integrals of psi(zeta) cos(nu_n zeta) over [0, 1] for nu_n = (2n+1) pi/2,
/// by piecewise-quadratic (Simpson panel) interpolation integrated exactly
/// against the cosine.
Eigen::VectorXd participation_integrals(const ModeShape& psi, int count, int intervals);

/// Throws std::invalid_argument when psi(0) != 0 within 1e-6 unless
/// `require_fixed_base` is false.
PressureProfile flexible_impulsive_pressure_profile(const TankSpec& spec, const ModeShape& psi,
                                                    const std::vector<double>& grid,
                                                    const SeriesOptions& opts = {},
                                                    bool require_fixed_base = true);

/// Wall surface pressure at theta = 0 of convective mode n for modal
/// pseudo-acceleration `accel`.
double convective_surface_pressure(const ConvectiveMode& mode, const TankSpec& spec, double accel);

/// Free-surface elevation at the wall from per-mode surface dynamic pressures.
double wave_height_profile(const std::vector<double>& modal_surface_pressures, const TankSpec& spec);

/// Demand-weighted combinations of same-grid profiles.
PressureProfile combine_srss(const std::vector<PressureProfile>& parts, const std::vector<double>& accels);
PressureProfile combine_absolute(const std::vector<PressureProfile>& parts, const std::vector<double>& accels);

/// Wall resultant force per unit acceleration: pi R H integral p dzeta (Simpson/trapezoid on the grid).
double wall_resultant(const PressureProfile& profile, const TankSpec& spec);

}  // namespace tankseis
