#pragma once

#include <vector>

namespace tankseis::bessel {

/// Argument at which the ascending series hands over to recurrence schemes.
inline constexpr double kSeriesLimit = 12.0;

/// Bessel function of the first kind J_m(x), m >= 0, x >= 0.
/// Ascending series below kSeriesLimit, Miller's normalized downward
/// recurrence above it.
double j(int m, double x);
double j0(double x);
double j1(double x);
/// d/dx J_m(x)
double j_prime(int m, double x);

/// Modified Bessel function I_m(x) by ascending series (overflows for x > ~700).
double i(int m, double x);

/// I_{m+1}(x) / I_m(x) for x > 0 (series below kSeriesLimit, backward
/// continued-fraction recurrence above). Never overflows.
double i_ratio(int m, double x);

/// I1(x) / I1'(x), with I1' = I0 - I1/x. Finite for every x >= 0; tends to x
/// as x -> 0 and to 1 as x -> infinity.
double i1_over_i1_prime(double x);

/// I2(x) / I1'(x).
double i2_over_i1_prime(double x);

/// First `count` positive roots of J_m'(x) = 0, strictly increasing, each to
/// about 1e-13 absolute.
std::vector<double> j_prime_roots(int m, int count);

}  // namespace tankseis::bessel
