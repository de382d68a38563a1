#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qstiefel {

using Complex = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;

inline constexpr const char* kVersion = "0.3.0";

// Default validity tolerance for Hermiticity, PSD, trace and TP checks.
inline constexpr double kDefaultTol = 1e-9;

// Choi eigenvalues below kRankTolPerDim * N count as zero.
inline constexpr double kRankTolPerDim = 1e-10;

enum class Field { real, complex };

template <typename Scalar>
inline constexpr Field field_of = Field::real;
template <>
inline constexpr Field field_of<Complex> = Field::complex;

// Invalid input: shape, range or validity violation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative numerical procedure failed to converge.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Target is an extreme point of the CPTP set, so no nontrivial random
// channel averages to it.
class ExtremePointTarget : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Outcome of a validity check. `worst` is the largest violation seen.
struct Validation {
  bool ok = true;
  double worst = 0.0;
  std::string what;

  void record(double violation, double tol, const std::string& label) {
    if (violation > worst) worst = violation;
    if (violation > tol) {
      if (ok) what = label;
      ok = false;
    }
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace qstiefel
