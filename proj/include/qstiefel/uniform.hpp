#pragma once

// Haar/uniform sampling of Ginibre matrices, Stiefel manifolds, unitary
// groups, density operators and CPTP maps. Every sampler takes its RngStream
// explicitly.

#include <algorithm>
#include <vector>

#include "qstiefel/core.hpp"
#include "qstiefel/linalg.hpp"
#include "qstiefel/repr.hpp"
#include "qstiefel/rng.hpp"

namespace qstiefel {

// Orthonormal k-frame in Scalar^n.
template <typename Scalar>
struct StiefelPoint {
  Mat<Scalar> X;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index k() const { return X.cols(); }
};

template <typename Scalar>
Scalar standard_normal(RngStream& rng) {
  if constexpr (field_of<Scalar> == Field::complex)
    return Scalar(rng.normal(), rng.normal());
  else
    return rng.normal();
}

// i.i.d. standard normal entries; in the complex case the real and imaginary
// parts are independent standard normals.
template <typename Scalar>
Mat<Scalar> sample_ginibre(RngStream& rng, Eigen::Index m, Eigen::Index n) {
  require(m >= 1 && n >= 1, "sample_ginibre: dimensions must be positive");
  Mat<Scalar> g(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = standard_normal<Scalar>(rng);
  return g;
}

// Thin Q factor of a QR decomposition. With `phase_fix` each column of Q is
// multiplied by the phase of the matching diagonal entry of R, which makes Q
// Haar distributed when g is Ginibre. Without it the result is biased.
template <typename Scalar>
Mat<Scalar> qr_frame(const Mat<Scalar>& g, bool phase_fix = true) {
  const Eigen::Index n = g.rows();
  const Eigen::Index k = g.cols();
  Eigen::HouseholderQR<Mat<Scalar>> qr(g);
  Mat<Scalar> q = qr.householderQ() * Mat<Scalar>::Identity(n, k);
  if (phase_fix) {
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < k; ++j) {
      Scalar d = r(j, j);
      double mag = std::abs(d);
      if (mag > 0.0) q.col(j) *= d / mag;
    }
  }
  return q;
}

template <typename Scalar>
StiefelPoint<Scalar> sample_stiefel_uniform(RngStream& rng, Eigen::Index n, Eigen::Index k) {
  require(k >= 1 && k <= n, "sample_stiefel_uniform: need 1 <= k <= n");
  return {qr_frame<Scalar>(sample_ginibre<Scalar>(rng, n, k))};
}

inline MatrixXcd sample_haar_unitary(RngStream& rng, Eigen::Index n) {
  return sample_stiefel_uniform<Complex>(rng, n, n).X;
}

// Uniform on the (d-1)-simplex: gaps between d-1 sorted uniforms and the
// endpoints 0 and 1.
VectorXd sample_simplex_uniform(RngStream& rng, int d);

// rho = K D K^dagger with Haar K and a uniform simplex spectrum on `rank`
// eigenvalues (the rest zero).
DensityOperator sample_density_uniform(RngStream& rng, int dim, int rank);

// Haar point of V_N(C^{kN}) read as a stacked Kraus set.
StiefelForm sample_cptp_uniform(RngStream& rng, int dim, int kraus_rank);

}  // namespace qstiefel
