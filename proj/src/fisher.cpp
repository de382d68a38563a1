#include <cmath>

#include "qstiefel/expfam.hpp"

namespace qstiefel {

namespace {

// Angle theta with density proportional to exp(kappa cos(theta - theta0)).
double von_mises_angle(RngStream& rng, double kappa, double theta0) {
  const double w = std::clamp(vmf_sample_cosine(rng, 2, kappa), -1.0, 1.0);
  const double a = std::acos(w);
  return theta0 + (rng.uniform() < 0.5 ? a : -a);
}

// Left multiplication by a Givens rotation in the (i, j) plane of rows.
template <typename Scalar>
void rotate_rows(Mat<Scalar>& x, Eigen::Index i, Eigen::Index j, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Vec<Scalar> ri = x.row(i).transpose();
  Vec<Scalar> rj = x.row(j).transpose();
  x.row(i) = (c * ri - s * rj).transpose();
  x.row(j) = (s * ri + c * rj).transpose();
}

}  // namespace

template <typename Scalar>
MatrixFisherParams<Scalar>::MatrixFisherParams(Mat<Scalar> f, FisherManifold manifold)
    : f_(std::move(f)), manifold_(manifold) {
  require(f_.rows() >= 1 && f_.cols() >= 1 && f_.cols() <= f_.rows(),
          "MatrixFisherParams: F must be n x k with 1 <= k <= n");
  require(f_.allFinite(), "MatrixFisherParams: F must be finite");
  if (manifold_ == FisherManifold::rotation_group) {
    require(field_of<Scalar> == Field::real, "MatrixFisherParams: rotation group needs real F");
    require(f_.rows() == f_.cols() && f_.rows() >= 2,
            "MatrixFisherParams: rotation-group parameter must be full n x n, n >= 2");
  }
}

template <typename Scalar>
double matrix_fisher_log_density(const Mat<Scalar>& x, const MatrixFisherParams<Scalar>& p) {
  require(x.rows() == p.f().rows() && x.cols() == p.f().cols(),
          "matrix_fisher_log_density: shape mismatch");
  return std::real((p.f().adjoint() * x).trace());
}

SignedSvd sign_preserving_svd(const MatrixXd& f) {
  require(f.rows() == f.cols(), "sign_preserving_svd: matrix must be square");
  Eigen::JacobiSVD<MatrixXd> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SignedSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  const Eigen::Index last = f.rows() - 1;
  if (out.U.determinant() < 0.0) {
    out.U.col(last) *= -1.0;
    out.s(last) *= -1.0;
  }
  if (out.V.determinant() < 0.0) {
    out.V.col(last) *= -1.0;
    out.s(last) *= -1.0;
  }
  return out;
}

MatrixXd rotation_from_quaternion(const Eigen::Vector4d& q) {
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  MatrixXd r(3, 3);
  r << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  return r;
}

bool in_rotation_hull_interior(const MatrixXd& m, double margin) {
  require(m.rows() == m.cols(), "in_rotation_hull_interior: matrix must be square");
  if (m.rows() == 2) {
    const double a = 0.5 * (m(0, 0) + m(1, 1));
    const double b = 0.5 * (m(1, 0) - m(0, 1));
    MatrixXd form(2, 2);
    form << a, -b, b, a;
    if ((m - form).cwiseAbs().maxCoeff() > 1e-12) return false;
    return std::hypot(a, b) < 1.0 - margin;
  }
  require(m.rows() == 3, "in_rotation_hull_interior: only n = 2 and n = 3 are supported");
  const VectorXd d = sign_preserving_svd(m).s;
  const double bound = -1.0 + margin;
  return d(0) + d(1) + d(2) > bound && d(0) - d(1) - d(2) > bound &&
         -d(0) + d(1) - d(2) > bound && -d(0) - d(1) + d(2) > bound;
}

template <typename Scalar>
MatrixFisherSampler<Scalar>::MatrixFisherSampler(MatrixFisherParams<Scalar> p, ChainConfig chain)
    : p_(std::move(p)), chain_(chain) {
  chain_.validate();
  const Eigen::Index n = p_.f().rows();
  const Eigen::Index k = p_.f().cols();
  const bool rotation = p_.manifold() == FisherManifold::rotation_group;
  if (p_.f().cwiseAbs().maxCoeff() == 0.0) {
    diag_.method = "haar";
  } else if (rotation && n == 2) {
    diag_.method = "exact-von-mises";
  } else if (rotation && n == 3) {
    diag_.method = "exact-quaternion-bingham";
    if constexpr (field_of<Scalar> == Field::real) {
      svd_ = sign_preserving_svd(p_.f());
      const VectorXd& s = svd_.s;
      Eigen::Vector4d bdiag(s(0) + s(1) + s(2), s(0) - s(1) - s(2), -s(0) + s(1) - s(2),
                            -s(0) - s(1) + s(2));
      MatrixXd a = (-bdiag).asDiagonal();
      quaternion_ = std::make_unique<SphereBinghamSampler>(a);
    }
  } else {
    require(!(field_of<Scalar> == Field::complex && k == n),
            "MatrixFisherSampler: nonzero F on the full unitary group is not supported");
    diag_.method = "gibbs";
    diag_.burn_in = chain_.burn_in;
    diag_.thinning = chain_.thinning;
  }
}

template <typename Scalar>
void MatrixFisherSampler<Scalar>::sweep(RngStream& rng) {
  const Mat<Scalar>& f = p_.f();
  const Eigen::Index n = f.rows();
  const Eigen::Index k = f.cols();
  if (k == n) {
    if constexpr (field_of<Scalar> == Field::real) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double alpha = f.row(i).dot(state_.row(i)) + f.row(j).dot(state_.row(j));
          const double beta = f.row(j).dot(state_.row(i)) - f.row(i).dot(state_.row(j));
          rotate_rows<Scalar>(state_, i, j,
                              von_mises_angle(rng, std::hypot(alpha, beta), std::atan2(beta, alpha)));
        }
      if (p_.manifold() == FisherManifold::stiefel) {
        // Column sign flips connect the two components of O(n).
        for (Eigen::Index j = 0; j < k; ++j) {
          const double u = f.col(j).dot(state_.col(j));
          const double p_keep = 1.0 / (1.0 + std::exp(-2.0 * u));
          if (rng.uniform() >= p_keep) state_.col(j) *= -1.0;
        }
      }
    }
  } else {
    for (Eigen::Index j = 0; j < k; ++j) {
      Mat<Scalar> others(n, k - 1);
      for (Eigen::Index i = 0, c = 0; i < k; ++i)
        if (i != j) others.col(c++) = state_.col(i);
      Mat<Scalar> q = complement_basis<Scalar>(others, n);
      Vec<Scalar> g = q.adjoint() * f.col(j);
      if constexpr (field_of<Scalar> == Field::complex) {
        VectorXd gr = realify(g);
        const double kappa = gr.norm();
        VectorXd mu = VectorXd::Zero(gr.size());
        mu(0) = 1.0;
        if (kappa > 0.0) mu = gr / kappa;
        state_.col(j) = q * complexify(vmf_sample(rng, VmfParams(mu, kappa)));
      } else {
        const double kappa = g.norm();
        VectorXd mu = VectorXd::Zero(g.size());
        mu(0) = 1.0;
        if (kappa > 0.0) mu = g / kappa;
        state_.col(j) = q * vmf_sample(rng, VmfParams(mu, kappa));
      }
    }
  }
  ++diag_.sweeps;
  const double defect = orthonormality_defect(state_);
  diag_.max_orthonormality_defect = std::max(diag_.max_orthonormality_defect, defect);
  if (defect > 1e-13) {
    state_ = polar_factor<Scalar>(state_);
  }
}

template <typename Scalar>
Mat<Scalar> MatrixFisherSampler<Scalar>::operator()(RngStream& rng) {
  ++diag_.draws;
  const Eigen::Index n = p_.f().rows();
  const Eigen::Index k = p_.f().cols();
  const bool rotation = p_.manifold() == FisherManifold::rotation_group;
  if (diag_.method == "haar") {
    Mat<Scalar> x = sample_stiefel_uniform<Scalar>(rng, n, k).X;
    if constexpr (field_of<Scalar> == Field::real) {
      if (rotation && x.determinant() < 0.0) x.col(0) *= -1.0;
    }
    return x;
  }
  if constexpr (field_of<Scalar> == Field::real) {
    if (rotation && n == 2) {
      const MatrixXd& f = p_.f();
      const double a = f(0, 0) + f(1, 1), b = f(1, 0) - f(0, 1);
      const double th = von_mises_angle(rng, std::hypot(a, b), std::atan2(b, a));
      MatrixXd r(2, 2);
      r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      return r;
    }
    if (rotation && n == 3) {
      Eigen::Vector4d q = (*quaternion_)(rng);
      diag_.proposals = quaternion_->proposals();
      diag_.accepted = quaternion_->accepted();
      return svd_.U * rotation_from_quaternion(q) * svd_.V.transpose();
    }
  }
  if (!started_) {
    started_ = true;
    if constexpr (field_of<Scalar> == Field::real) {
      if (rotation) {
        SignedSvd s = sign_preserving_svd(p_.f());
        state_ = s.U * s.V.transpose();
      } else {
        state_ = polar_factor<Scalar>(p_.f());
      }
    } else {
      state_ = polar_factor<Scalar>(p_.f());
    }
    for (int i = 0; i < chain_.burn_in; ++i) sweep(rng);
  }
  for (int i = 0; i < chain_.thinning; ++i) sweep(rng);
  return state_;
}

template <typename Scalar>
Mat<Scalar> matrix_fisher_sample(RngStream& rng, const MatrixFisherParams<Scalar>& p) {
  MatrixFisherSampler<Scalar> s(p);
  return s(rng);
}

template class MatrixFisherParams<double>;
template class MatrixFisherParams<Complex>;
template double matrix_fisher_log_density<double>(const MatrixXd&, const MatrixFisherParams<double>&);
template double matrix_fisher_log_density<Complex>(const MatrixXcd&,
                                                   const MatrixFisherParams<Complex>&);
template class MatrixFisherSampler<double>;
template class MatrixFisherSampler<Complex>;
template MatrixXd matrix_fisher_sample<double>(RngStream&, const MatrixFisherParams<double>&);
template MatrixXcd matrix_fisher_sample<Complex>(RngStream&, const MatrixFisherParams<Complex>&);

}  // namespace qstiefel
