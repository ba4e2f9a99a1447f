#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tankseis/interp.hpp"
#include "tankseis/model.hpp"

namespace tankseis {

enum class EndRestraint { pinned, rotation_spring, fixed };

EndRestraint parse_end_restraint(const std::string& s);
std::string to_string(EndRestraint e);

/// Unit-width bottom-plate strip on a rigid foundation. x = 0 is the
/// shell junction, where the uplift is imposed.
struct StripModel {
  double rigidity = 0.0;  // D = E t^3 / (12 (1 - nu^2)), N m
  double load = 0.0;      // q = rho g H, N/m^2
  double length = 0.0;    // m
  int nodes = 200;
  EndRestraint end = EndRestraint::rotation_spring;
  double spring = 0.0;    // N m/rad per unit width, rotation_spring only
};

/// Strip for the tank's bottom plate, long enough for uplifts up to
/// `max_uplift`. The default junction spring is the shell's local bending
/// stiffness per width over the decay length sqrt(R s).
StripModel tank_strip(const TankSpec& spec, double max_uplift, int nodes = 200,
                      EndRestraint end = EndRestraint::rotation_spring);

struct StripSolution {
  double force = 0.0;            // P, N/m, holds the edge at the imposed uplift
  double uplift_length = 0.0;    // l, m
  double junction_moment = 0.0;  // N m/m, plate moment at x = 0
  Eigen::VectorXd x, deflection, rotation;
  Eigen::VectorXd reaction;      // foundation reaction per node, N/m, >= 0
  double complementarity = 0.0;  // max |gap * reaction| over nodes
  double strain_energy = 0.0;    // J/m
  double load_work = 0.0;        // q * integral of w, J/m
  int iterations = 0;
};

/// Active-set solve of the one-sided contact problem. Throws
/// std::invalid_argument for w < 0 and NumericError when the far end lifts
/// or the contact set does not settle.
StripSolution solve_strip(const StripModel& strip, double uplift);

struct UpliftSample {
  double uplift = 0.0;
  double force = 0.0;
  double length = 0.0;
  double junction_moment = 0.0;
  bool beyond_yield = false;
};

struct UpliftCurve {
  std::vector<UpliftSample> samples;
  Pchip force_of_uplift;

  double force(double w) const { return w <= 0.0 ? 0.0 : force_of_uplift(w); }
};

/// `count` + 1 equally spaced uplifts on [0, max_uplift]; samples are solved
/// independently so the result does not depend on `jobs`.
UpliftCurve uplift_curve(const StripModel& strip, double max_uplift, int count, int jobs = 1);

struct PlasticLimit {
  double hinge_moment = 0.0;                 // t^2 sigma_y / 4, N m/m
  std::optional<double> first_yield_uplift;  // m; empty if not reached on the strip
};

/// Plastic hinge moment of the plate and the edge uplift at which the
/// junction moment first reaches it.
PlasticLimit plastic_limit_check(const StripModel& strip, double plate_thickness, double yield_stress);

/// Flags samples past first yield; the curve itself is unchanged.
void annotate(UpliftCurve& curve, const PlasticLimit& limit);

struct MomentRotationSample {
  double rotation = 0.0;    // rad
  double moment = 0.0;      // N m
  double offset = 0.0;      // neutral-axis offset e, m
  double max_uplift = 0.0;  // m
  double residual = 0.0;    // vertical equilibrium residual / total weight
};

struct MomentRotationOptions {
  int sectors = 72;
  int nodes = 200;
  int curve_samples = 60;
  EndRestraint end = EndRestraint::rotation_spring;
  double bearing_stiffness = 0.0;  // N/m per m of circumference; 0 selects E s / sqrt(R s)
  int jobs = 1;
};

struct MomentRotationCurve {
  std::vector<MomentRotationSample> samples;
  UpliftCurve strip_curve;
  StripModel strip;
  PlasticLimit plastic;
  double bearing_stiffness = 0.0;
};

class EquilibriumError : public NumericError {
 public:
  EquilibriumError(const std::string& what, std::vector<double> residuals)
      : NumericError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Resisting moment of an unanchored base for each rotation in `rotations`
/// (ascending, >= 0). Throws ConfigError for anchored tanks.
MomentRotationCurve moment_rotation(const TankSpec& spec, const std::vector<double>& rotations,
                                    const MomentRotationOptions& opts = {});

/// Equilibrium state of the base at one rotation, using a precomputed strip curve.
MomentRotationSample base_state(const TankSpec& spec, const UpliftCurve& curve, double rotation,
                                double bearing_stiffness, int sectors);

std::string uplift_curve_csv(const UpliftCurve& curve);
std::string moment_rotation_csv(const MomentRotationCurve& curve);

}  // namespace tankseis
