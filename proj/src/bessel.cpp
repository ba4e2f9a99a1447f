#include "tankseis/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace tankseis::bessel {

namespace {

double j_series(int m, double x) {
  const double h = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= m; ++k) term *= h / k;
  double sum = term;
  const double h2 = h * h;
  for (int k = 1; k < 200; ++k) {
    term *= -h2 / (static_cast<double>(k) * (k + m));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 4) break;
  }
  return sum;
}

// Miller's algorithm: downward recurrence from a high order, normalized by
// J0 + 2 * sum J_{2k} = 1.
double j_miller(int m, double x) {
  int top = static_cast<int>(x) + m + 60;
  if (top % 2) ++top;
  double jp1 = 0.0;
  double jk = 1e-30;
  double norm = 0.0;
  double result = 0.0;
  for (int k = top; k > 0; --k) {
    const double jm1 = (2.0 * k / x) * jk - jp1;
    jp1 = jk;
    jk = jm1;  // now holds J_{k-1}
    if (k - 1 == m) result = jk;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jk;
    if (std::abs(jk) > 1e250) {
      jk *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
  }
  norm += jk;  // J0
  return result / norm;
}

double i_series(int m, double x) {
  const double h = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= m; ++k) term *= h / k;
  double sum = term;
  const double h2 = h * h;
  for (int k = 1; k < 500; ++k) {
    term *= h2 / (static_cast<double>(k) * (k + m));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double j(int m, double x) {
  if (m < 0) throw std::invalid_argument("bessel::j: negative order");
  if (x < 0.0) throw std::invalid_argument("bessel::j: negative argument");
  if (x == 0.0) return m == 0 ? 1.0 : 0.0;
  return x < kSeriesLimit ? j_series(m, x) : j_miller(m, x);
}

double j0(double x) { return j(0, x); }
double j1(double x) { return j(1, x); }

double j_prime(int m, double x) {
  if (m == 0) return -j(1, x);
  if (x == 0.0) return m == 1 ? 0.5 : 0.0;
  return j(m - 1, x) - m * j(m, x) / x;
}

double i(int m, double x) {
  if (m < 0) throw std::invalid_argument("bessel::i: negative order");
  if (x == 0.0) return m == 0 ? 1.0 : 0.0;
  return i_series(m, std::abs(x)) * ((m % 2 && x < 0.0) ? -1.0 : 1.0);
}

double i_ratio(int m, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("bessel::i_ratio: x must be positive");
  if (x < kSeriesLimit) return i_series(m + 1, x) / i_series(m, x);
  // r_k = I_{k+1}/I_k satisfies r_{k-1} = 1 / (2k/x + r_k); start far above
  // the turning point k ~ x where the map is strongly contracting.
  const int top = static_cast<int>(x) + m + 60;
  double r = 0.0;
  for (int k = top; k > m; --k) r = 1.0 / (2.0 * k / x + r);
  return r;
}

double i1_over_i1_prime(double x) {
  if (x == 0.0) return 0.0;
  if (x < 1e-4) return x * (1.0 - x * x / 8.0);  // I1/I1' = x (1 - x^2/8 + ...)
  const double r10 = i_ratio(0, x);                // I1/I0
  return 1.0 / (1.0 / r10 - 1.0 / x);
}

double i2_over_i1_prime(double x) {
  if (x == 0.0) return 0.0;
  return i_ratio(1, x) * i1_over_i1_prime(x);
}

std::vector<double> j_prime_roots(int m, int count) {
  if (count < 1) throw std::invalid_argument("j_prime_roots: count must be >= 1");
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(count));
  auto f = [m](double x) { return j_prime(m, x); };
  // Consecutive roots are at least ~2.9 apart, so a 0.25 scan never skips one.
  const double step = 0.25;
  double a = (m == 0) ? 0.5 : 0.25 + m;
  double fa = f(a);
  while (static_cast<int>(roots.size()) < count) {
    const double b = a + step;
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

}  // namespace tankseis::bessel
