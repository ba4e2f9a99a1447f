#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tankseis/model.hpp"

namespace tankseis {

enum class RecordFormat { two_column_csv, single_column_with_dt_header, peer_fixed_width };
enum class AccelUnits { g, m_per_s2 };

/// Gravity used to convert records given in units of g.
inline constexpr double kRecordGravity = 9.81;

/// Uniformly sampled horizontal ground acceleration (m/s^2).
struct GroundMotion {
  double dt = 0.0;
  Eigen::VectorXd accel;
  std::string name;
  // Provenance, used to write a record back in the form it was read.
  RecordFormat format = RecordFormat::two_column_csv;
  AccelUnits units = AccelUnits::m_per_s2;

  Eigen::Index size() const { return accel.size(); }
  double duration() const { return dt * static_cast<double>(accel.size() - 1); }
};

struct PeakValues {
  double pga = 0.0;  // m/s^2
  double pgv = 0.0;  // m/s
  double pgd = 0.0;  // m
};

enum class Baseline { none, linear_velocity_detrend };

struct Kinematics {
  Eigen::VectorXd velocity;
  Eigen::VectorXd displacement;
};

RecordFormat parse_format(const std::string& name);
const char* to_string(RecordFormat f);
/// Guess from the file extension: .csv, .at2, anything else single column.
RecordFormat format_from_path(const std::string& path);

/// Throws ConfigError for malformed input (with the 1-based line number),
/// inconsistent sampling, or an empty record.
GroundMotion parse_record(const std::string& text, RecordFormat format);
GroundMotion load_record(const std::string& path, RecordFormat format);
std::string format_record(const GroundMotion& gm);

/// Uniform time step scaled by sqrt(length_ratio); amplitudes unchanged.
GroundMotion froude_scale(const GroundMotion& gm, const ScaleModel& scale);

/// Trapezoidal integration. With linear_velocity_detrend, the least-squares
/// straight line is removed from the velocity before integrating again.
Kinematics integrate(const GroundMotion& gm, Baseline baseline = Baseline::linear_velocity_detrend);

PeakValues peaks(const GroundMotion& gm, Baseline baseline = Baseline::linear_velocity_detrend);

/// Pseudo-acceleration spectrum omega^2 |u|max of a linear SDOF integrated
/// with average-acceleration Newmark; the record is linearly interpolated to
/// dt <= min(gm.dt, T/20). Output follows the order of `periods`.
std::vector<double> response_spectrum(const GroundMotion& gm, double damping,
                                      const std::vector<double>& periods, int jobs = 1);

/// Linear interpolation of the record at time t (zero outside the record).
double sample_at(const GroundMotion& gm, double t);

}  // namespace tankseis
