#pragma once

namespace qstiefel {

// log I_nu(x) for x >= 0, stable for large x.
double log_bessel_i(double nu, double x);

// I_{nu+1}(x) / I_nu(x).
double bessel_ratio(double nu, double x);

}  // namespace qstiefel
