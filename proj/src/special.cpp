#include "qstiefel/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qstiefel/core.hpp"

namespace qstiefel {

namespace {

constexpr double kDirectLimit = 600.0;

// log of the Hankel asymptotic series sum_k (-1)^k a_k(nu) / x^k.
double log_hankel_series(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::log(sum);
}

}  // namespace

double log_bessel_i(double nu, double x) {
  require(x >= 0.0 && nu >= 0.0, "log_bessel_i: need nu >= 0 and x >= 0");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x <= kDirectLimit) return std::log(std::cyl_bessel_i(nu, x));
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + log_hankel_series(nu, x);
}

double bessel_ratio(double nu, double x) {
  require(x >= 0.0 && nu >= 0.0, "bessel_ratio: need nu >= 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < 1e-8) return x / (2.0 * (nu + 1.0));
  if (x <= kDirectLimit) return std::cyl_bessel_i(nu + 1.0, x) / std::cyl_bessel_i(nu, x);
  return std::exp(log_hankel_series(nu + 1.0, x) - log_hankel_series(nu, x));
}

}  // namespace qstiefel
