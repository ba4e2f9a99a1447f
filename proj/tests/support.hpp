#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tankseis/gmproc.hpp"

namespace tankseis::test {

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline GroundMotion sine_record(double amplitude, double period, double dt, double duration) {
  GroundMotion gm;
  gm.dt = dt;
  const auto n = static_cast<Eigen::Index>(std::llround(duration / dt)) + 1;
  gm.accel.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) gm.accel[k] = amplitude * std::sin(2.0 * M_PI * dt * k / period);
  gm.name = "sine";
  return gm;
}

inline GroundMotion zero_record(double dt, Eigen::Index n) {
  GroundMotion gm;
  gm.dt = dt;
  gm.accel = Eigen::VectorXd::Zero(n);
  gm.name = "zero";
  return gm;
}

inline std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(TANKSEIS_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
}

}  // namespace tankseis::test

#include <unsupported/Eigen/MatrixFunctions>

namespace tankseis::test {

/// Exact response of u'' + 2 xi w u' + w^2 u = -a(t) from rest, with a(t)
/// piecewise linear between record samples (augmented matrix exponential).
inline Eigen::VectorXd exact_sdof(const GroundMotion& gm, double omega, double xi) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A(0, 1) = 1.0;
  A(1, 0) = -omega * omega;
  A(1, 1) = -2.0 * xi * omega;
  A(1, 2) = -1.0;
  A(2, 3) = 1.0;
  const Eigen::Matrix4d E = (A * gm.dt).exp();
  Eigen::VectorXd u(gm.size());
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  u[0] = 0.0;
  for (Eigen::Index k = 0; k + 1 < gm.size(); ++k) {
    const double f = gm.accel[k], g = (gm.accel[k + 1] - gm.accel[k]) / gm.dt;
    x = E.topLeftCorner<2, 2>() * x + E.block<2, 1>(0, 2) * f + E.block<2, 1>(0, 3) * g;
    u[k + 1] = x[0];
  }
  return u;
}

}  // namespace tankseis::test
