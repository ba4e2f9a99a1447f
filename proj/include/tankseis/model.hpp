#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tankseis {

/// Raised for malformed configuration or input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure fails (factorization, non-convergence).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Anchorage { anchored, unanchored };

struct TankGeometry {
  double radius = 0.0;            // m
  double fill_height = 0.0;       // m
  double total_height = 0.0;      // m
  double shell_thickness = 0.0;   // m
  double bottom_thickness = 0.0;  // m
  Anchorage anchorage = Anchorage::anchored;

  double slenderness() const { return fill_height / radius; }
  double freeboard() const { return total_height - fill_height; }
};

struct ShellMaterial {
  std::string grade;
  double density = 0.0;          // kg/m^3
  double elastic_modulus = 0.0;  // Pa
  double poisson_ratio = 0.0;
  double yield_stress = 0.0;     // Pa

  double shear_modulus() const { return elastic_modulus / (2.0 * (1.0 + poisson_ratio)); }
};

struct Liquid {
  double density = 0.0;       // kg/m^3
  double bulk_modulus = 0.0;  // Pa

  double sound_speed() const { return std::sqrt(bulk_modulus / density); }
};

/// Froude similitude with unchanged gravity: time ~ sqrt(length).
struct ScaleModel {
  double length_ratio = 1.0;  // model / prototype

  double time_ratio() const { return std::sqrt(length_ratio); }
  double acceleration_ratio() const { return 1.0; }
  double displacement_ratio() const { return length_ratio; }
};

struct TankSpec {
  std::string name;
  TankGeometry geometry;
  ShellMaterial shell;
  Liquid liquid;
  ScaleModel scale;
  double empty_mass = 0.0;     // kg
  double top_ring_mass = 0.0;  // kg, lumped stiffener mass at the top of the shell
  double gravity = 9.81;       // m/s^2
};

struct Violation {
  std::string field;
  std::string message;
};

std::vector<Violation> validate(const TankSpec& spec);

/// Throws ConfigError listing every violation when the tank description is invalid.
void require_valid(const TankSpec& spec);

double liquid_mass(const TankSpec& spec);
double total_mass(const TankSpec& spec);

/// Geometrically scaled copy (all lengths times `lambda`, materials unchanged).
TankSpec scaled_geometry(const TankSpec& spec, double lambda);

// Bundled case studies: 1/4-scale slender tank and 1/18-scale broad tank.
TankSpec slender_tank();
TankSpec broad_tank();

// Key-value config (TOML subset) with sections [tank], [geometry], [shell],
// [liquid], [scale].
TankSpec parse_spec(const std::string& text);
TankSpec load_spec(const std::string& path);
std::string format_spec(const TankSpec& spec);

const char* to_string(Anchorage a);

}  // namespace tankseis
