#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tankseis/mechmodel.hpp"
#include "tankseis/model.hpp"

namespace tankseis {

/// Shell idealized as a base-fixed cantilever, stations at heights z on
/// [0, total_height] with a station exactly at the fill height.
struct BeamModel {
  Eigen::VectorXd z;                 // m
  double bending_stiffness = 0.0;    // EI, N m^2 (thin ring)
  double shear_stiffness = 0.0;      // kappa G A, N
  double structural_mass = 0.0;      // kg/m
  Eigen::VectorXd added_mass;        // kg/m per station, zero above the liquid
  double top_mass = 0.0;             // kg, lumped at the top station
  bool timoshenko = true;
  int wet_stations = 0;              // stations with z <= H (the first ones)
};

struct BeamOptions {
  int stations = 100;
  bool timoshenko = true;
  double shear_coefficient = 0.5;  // thin circular tube
  double tolerance = 1e-3;
  int max_iter = 20;
  SeriesOptions series{};
};

/// Structural part of the beam, no added mass yet.
BeamModel build_beam(const TankSpec& spec, const BeamOptions& opts = {});

/// m_a = pi R p / psi at each profile height; where psi < 1e-6 max psi the
/// rigid-wall pressure is used instead so the ratio stays bounded.
Eigen::VectorXd added_mass_from_pressure(const PressureProfile& profile, const ModeShape& psi, const TankSpec& spec,
                                         const SeriesOptions& opts = {});

struct BeamMode {
  double period = 0.0;          // s
  Eigen::VectorXd deflection;   // lateral displacement per station, top of liquid = 1
  Eigen::VectorXd rotation;     // slope per station, same normalization
};

/// Fundamental mode of the discretized beam (Hermite elements, consistent mass).
BeamMode fundamental_mode(const BeamModel& beam);

/// Shape over the wetted height, psi(zeta), Hermite-interpolated from a mode.
ModeShape wetted_shape(const BeamModel& beam, const BeamMode& mode, double fill_height);

/// Analytic first cantilever mode on [0, L], evaluated at zeta H and scaled to 1 at zeta = 1.
ModeShape cantilever_shape(double length, double fill_height);

struct ImpulsiveMode {
  double period = 0.0;
  int iterations = 0;
  std::vector<double> trajectory;  // period after each iteration
  BeamModel beam;
  BeamMode mode;
  ModeShape shape;  // psi(zeta) on the wetted height
};

class BeamIterationError : public NumericError {
 public:
  BeamIterationError(const std::string& what, std::vector<double> trajectory)
      : NumericError(what), trajectory_(std::move(trajectory)) {}
  const std::vector<double>& trajectory() const { return trajectory_; }

 private:
  std::vector<double> trajectory_;
};

/// Fixed-point iteration between the beam eigenproblem and the flexible-wall
/// added mass. Throws BeamIterationError if |dT|/T stays above tolerance.
ImpulsiveMode impulsive_mode(const TankSpec& spec, const BeamOptions& opts = {});

/// Closed-form first period of a uniform Euler-Bernoulli cantilever.
double cantilever_period(double length, double mass_per_length, double bending_stiffness);

std::string mode_shape_csv(const ImpulsiveMode& mode, int points);

}  // namespace tankseis
