#pragma once

#include <cmath>

#include "qstiefel/core.hpp"

namespace qstiefel {

template <typename Scalar>
double real_part(const Scalar& z) {
  return std::real(z);
}

// Orthonormal basis of the orthogonal complement of span(cols) in Scalar^n.
// `cols` must have orthonormal columns (or be empty).
template <typename Scalar>
Mat<Scalar> complement_basis(const Mat<Scalar>& cols, Eigen::Index n) {
  const Eigen::Index r = cols.cols();
  if (r == 0) return Mat<Scalar>::Identity(n, n);
  Eigen::HouseholderQR<Mat<Scalar>> qr(cols);
  Mat<Scalar> q = qr.householderQ() * Mat<Scalar>::Identity(n, n);
  return q.rightCols(n - r);
}

// Orthonormal basis of {x in span(allowed) : x orthogonal to cols}. `allowed`
// has orthonormal columns spanning the admissible subspace.
template <typename Scalar>
Mat<Scalar> restricted_complement(const Mat<Scalar>& allowed, const Mat<Scalar>& cols) {
  const Eigen::Index m = allowed.cols();
  if (cols.cols() == 0) return allowed;
  // Coordinates of cols' constraints within the allowed subspace.
  Mat<Scalar> c = allowed.adjoint() * cols;
  Eigen::JacobiSVD<Mat<Scalar>> svd(c, Eigen::ComputeFullU);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-12) ++rank;
  return allowed * svd.matrixU().rightCols(m - rank);
}

// Symmetric (Hermitian) inverse square root of a positive-definite matrix.
template <typename Scalar>
Mat<Scalar> inverse_sqrt_pd(const Mat<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

// Polar factor X (X^dagger X)^{-1/2} of a full-column-rank matrix.
template <typename Scalar>
Mat<Scalar> polar_factor(const Mat<Scalar>& w) {
  Eigen::JacobiSVD<Mat<Scalar>> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Hermitian part.
template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.adjoint())).eval();
}

// Real embedding of a complex vector: [Re z; Im z].
inline VectorXd realify(const VectorXcd& z) {
  VectorXd y(2 * z.size());
  y << z.real(), z.imag();
  return y;
}

inline VectorXcd complexify(const VectorXd& y) {
  const Eigen::Index n = y.size() / 2;
  return y.head(n).cast<Complex>() + Complex(0.0, 1.0) * y.tail(n).cast<Complex>();
}

// Real symmetric embedding of a Hermitian matrix: [[Re A, -Im A], [Im A, Re A]],
// so that z^dagger A z = y^T A_R y for y = realify(z).
inline MatrixXd realify(const MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  MatrixXd r(2 * n, 2 * a.cols());
  r << a.real(), -a.imag(), a.imag(), a.real();
  return r;
}

inline double orthonormality_defect(const auto& x) {
  using M = std::decay_t<decltype(x)>;
  using Scalar = typename M::Scalar;
  return (x.adjoint() * x - Mat<Scalar>::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

}  // namespace qstiefel
