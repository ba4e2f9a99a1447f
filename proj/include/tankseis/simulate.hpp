#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tankseis/gmproc.hpp"
#include "tankseis/interp.hpp"
#include "tankseis/mechmodel.hpp"
#include "tankseis/model.hpp"
#include "tankseis/uplift.hpp"

namespace tankseis {

struct SystemOptions {
  int convective_modes = 3;
  double structural_damping = 0.02;   // mass-proportional, calibrated at the impulsive frequency
  double convective_damping = 0.005;
  double impulsive_period = 0.0;      // s; 0 selects the code-formula period
  std::vector<double> probes{0.0, 0.25, 0.5, 0.75};  // wall pressure heights, zeta
  SeriesOptions series{};
};

/// Impulsive and convective oscillators on a common base, optionally rocking
/// about the base through a nonlinear elastic uplift spring. Coordinates are
/// relative to the ground: u_i, q_1..q_N, then theta when rocking.
struct ReducedSystem {
  TankSpec spec;
  ImpulsiveComponent impulsive;
  std::vector<ConvectiveMode> modes;  // one DOF each, zero-mass modes dropped
  double impulsive_period = 0.0;
  double omega_ref = 0.0;

  Eigen::MatrixXd M, C, K;
  Eigen::VectorXd load;  // effective force = -load * a_g
  std::vector<std::string> dof_names;

  std::vector<double> masses;   // per translational DOF
  std::vector<double> heights;  // wall-pressure resultant heights
  double shell_mass = 0.0;
  double shell_height = 0.0;

  bool rocking = false;
  int theta = -1;
  Pchip moment_of_rotation;  // M(|theta|) from the moment-rotation curve
  Pchip uplift_of_rotation;  // max edge uplift w(|theta|)

  std::vector<double> probes;
  Eigen::VectorXd rigid_probe;     // Pa per m/s^2 at each probe, plus base edge last
  Eigen::MatrixXd convective_probe;  // rows as rigid_probe, one column per mode

  int size() const { return static_cast<int>(M.rows()); }
  int convective_count() const { return static_cast<int>(modes.size()); }
};

/// Throws ConfigError when an uplift curve is given for an anchored tank.
ReducedSystem assemble_system(const TankSpec& spec, const SystemOptions& opts = {},
                              const MomentRotationCurve* uplift = nullptr);

/// Same, from explicit component parameters.
ReducedSystem assemble_system(const TankSpec& spec, const ImpulsiveComponent& impulsive,
                              const std::vector<ConvectiveMode>& modes, const SystemOptions& opts,
                              const MomentRotationCurve* uplift = nullptr);

/// Undamped natural periods, longest first; a rocking spring enters with its
/// initial tangent.
std::vector<double> natural_periods(const ReducedSystem& sys);

struct NewmarkParams {
  double beta = 0.25;
  double gamma = 0.5;
  double dt_sub = 0.0;  // 0 selects min(record dt, T_i / 20)
  Eigen::VectorXd initial_displacement;  // optional
  double newton_tolerance = 1e-8;
  int newton_max_iter = 30;
};

struct ResponseHistory {
  Eigen::VectorXd time, ground;
  Eigen::MatrixXd displacement;  // steps x DOFs
  Eigen::VectorXd base_shear, moment;
  Eigen::VectorXd eta0, eta_pi;
  Eigen::MatrixXd wall_pressure;  // steps x probes
  Eigen::VectorXd base_edge_pressure;
  Eigen::VectorXd uplift0, uplift_pi;
  Eigen::VectorXd input_energy, kinetic_energy, strain_energy, damped_energy;
  std::vector<double> probes;
  double dt = 0.0;
  int newton_iterations = 0;  // total

  Eigen::Index steps() const { return time.size(); }
  /// max |input - kinetic - strain - damped| over max |input|.
  double energy_residual() const;
};

/// Average-acceleration Newmark on the record, linearly interpolated to the
/// sub-step. Throws NumericError on Newton failure or non-finite state.
ResponseHistory newmark(const ReducedSystem& sys, const GroundMotion& gm, const NewmarkParams& params = {});

struct Peak {
  double value = 0.0;  // absolute
  double time = 0.0;
};

struct PeakReport {
  Peak wave_height, uplift, base_shear, moment, base_edge_pressure;
  std::vector<double> probes;
  std::vector<Peak> wall_pressure;
  double freeboard = 0.0;
  bool freeboard_exceeded = false;
};

PeakReport peak_report(const ResponseHistory& h, const TankSpec& spec);

std::string response_csv(const ResponseHistory& h);

}  // namespace tankseis
