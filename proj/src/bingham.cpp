#include <cmath>
#include <limits>

#include "qstiefel/expfam.hpp"

namespace qstiefel {

namespace {

// Root b in [1, q] of sum_i mult / (b + 2 lambda_i) = 1 for lambda_i >= 0
// with min lambda = 0.
double acg_root(const VectorXd& lambda, double mult, double q) {
  auto f = [&](double b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) s += mult / (b + 2.0 * lambda(i));
    return s - 1.0;
  };
  double lo = 1.0, hi = q;
  if (f(hi) >= 0.0) return hi;
  if (f(lo) <= 0.0) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename Scalar>
void require_hermitian(const Mat<Scalar>& a, double tol, const char* who) {
  require(a.rows() == a.cols(), std::string(who) + ": matrix must be square");
  require((a - a.adjoint()).cwiseAbs().maxCoeff() <= tol,
          std::string(who) + ": matrix must be Hermitian");
}

template <typename Scalar>
double log_det_pd(const Mat<Scalar>& m) {
  Eigen::LLT<Mat<Scalar>> llt(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(std::real(llt.matrixL()(i, i)));
  return 2.0 * s;
}

// Draw from exp(-x^dagger H x) on the unit sphere of Scalar^m.
template <typename Scalar>
Vec<Scalar> sphere_bingham_draw(RngStream& rng, const Mat<Scalar>& h, long long* proposals,
                                long long* accepted) {
  if constexpr (field_of<Scalar> == Field::complex) {
    SphereBinghamSampler s(realify(hermitian_part(h)));
    VectorXcd z = complexify(s(rng));
    *proposals += s.proposals();
    *accepted += s.accepted();
    return z;
  } else {
    SphereBinghamSampler s(hermitian_part(h));
    VectorXd y = s(rng);
    *proposals += s.proposals();
    *accepted += s.accepted();
    return y;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

SphereBinghamSampler::SphereBinghamSampler(const MatrixXd& a) {
  require(a.rows() == a.cols() && a.rows() >= 1, "SphereBinghamSampler: need a square matrix");
  const double q = static_cast<double>(a.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hermitian_part(a));
  v_ = es.eigenvectors();
  lambda_ = es.eigenvalues().array() - es.eigenvalues()(0);
  b_ = acg_root(lambda_, 1.0, q);
  scale_ = (1.0 + 2.0 * lambda_.array() / b_).rsqrt();
  log_bound_ = -0.5 * (q - b_) + 0.5 * q * std::log(q / b_);
}

VectorXd SphereBinghamSampler::operator()(RngStream& rng) {
  const Eigen::Index q = lambda_.size();
  const double half_q = 0.5 * static_cast<double>(q);
  VectorXd w(q);
  for (;;) {
    ++proposals_;
    for (Eigen::Index i = 0; i < q; ++i) w(i) = rng.normal() * scale_(i);
    const double nrm = w.norm();
    if (nrm == 0.0) continue;
    w /= nrm;
    const double quad = (lambda_.array() * w.array().square()).sum();
    const double omega = 1.0 + 2.0 * quad / b_;
    const double log_ratio = -quad + half_q * std::log(omega) - log_bound_;
    if (std::log(rng.uniform_open()) < log_ratio) {
      ++accepted_;
      return v_ * w;
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

// Shift t for the bound 2u <= u^2/t + t: the value of c^T y at the mode of
// y^T M y + 2 c^T y on the sphere, found from the secular equation.
double bmf_shift(const MatrixXd& m, const VectorXd& c) {
  const double cn = c.norm();
  if (cn == 0.0) return std::numeric_limits<double>::min();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hermitian_part(m));
  const VectorXd& d = es.eigenvalues();
  const VectorXd beta = es.eigenvectors().transpose() * c;
  const double dmax = d(d.size() - 1);
  auto g = [&](double gam) { return (beta.array() / (gam - d.array())).square().sum(); };
  double lo = dmax + 1e-12 * std::max(1.0, std::abs(dmax)) + 1e-300;
  double hi = dmax + cn;
  double gam = lo;
  if (g(lo) > 1.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 1.0 ? lo : hi) = mid;
    }
    gam = 0.5 * (lo + hi);
  }
  VectorXd y = es.eigenvectors() * (beta.array() / (gam - d.array())).matrix();
  const double yn = y.norm();
  double t = yn > 0.0 ? c.dot(y) / yn : 0.0;
  // Guard against a degenerate mode; any t > 0 gives a valid envelope.
  return std::max(t, 0.05 * cn);
}

MatrixXd bmf_envelope(const MatrixXd& m, const VectorXd& c, double t) {
  return -hermitian_part(m) - c * c.transpose() / t;
}

}  // namespace

SphereBmfSampler::SphereBmfSampler(const MatrixXd& m, const VectorXd& c)
    : c_(c), t_(bmf_shift(m, c)), envelope_(bmf_envelope(m, c, t_)) {
  require(m.rows() == m.cols() && m.rows() == c.size(), "SphereBmfSampler: shape mismatch");
}

double SphereBmfSampler::log_weight(const VectorXd& y) const {
  const double u = c_.dot(y);
  return -(u - t_) * (u - t_) / t_;
}

VectorXd SphereBmfSampler::operator()(RngStream& rng, long long max_proposals) {
  for (long long i = 0; i < max_proposals; ++i) {
    ++proposals_;
    VectorXd y = envelope_(rng);
    if (std::log(rng.uniform_open()) < log_weight(y)) {
      ++accepted_;
      return y;
    }
  }
  throw NonConvergence("SphereBmfSampler: rejection sampler exhausted its proposal budget",
                       static_cast<double>(max_proposals));
}

VectorXd SphereBmfSampler::update(RngStream& rng, const VectorXd& current, int max_proposals,
                                  bool* used_mh, bool* mh_accepted) {
  *used_mh = false;
  *mh_accepted = false;
  for (int i = 0; i + 1 < max_proposals; ++i) {
    ++proposals_;
    VectorXd y = envelope_(rng);
    if (std::log(rng.uniform_open()) < log_weight(y)) {
      ++accepted_;
      return y;
    }
  }
  *used_mh = true;
  VectorXd y = envelope_(rng);
  if (std::log(rng.uniform_open()) < log_weight(y) - log_weight(current)) {
    *mh_accepted = true;
    return y;
  }
  return current;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
MacgParams<Scalar>::MacgParams(Mat<Scalar> sigma, Eigen::Index k, double tol)
    : sigma_(std::move(sigma)), k_(k) {
  require_hermitian(sigma_, tol, "MacgParams");
  require(k_ >= 1 && k_ <= sigma_.rows(), "MacgParams: need 1 <= k <= n");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(sigma_);
  require(es.eigenvalues()(0) > tol, "MacgParams: Sigma must be positive definite");
}

template <typename Scalar>
StiefelPoint<Scalar> macg_sample(RngStream& rng, const MacgParams<Scalar>& p) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(p.sigma());
  Mat<Scalar> root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                     es.eigenvectors().adjoint();
  Mat<Scalar> w = root * sample_ginibre<Scalar>(rng, p.n(), p.k());
  return {polar_factor<Scalar>(w)};
}

template <typename Scalar>
double macg_log_density(const Mat<Scalar>& x, const MacgParams<Scalar>& p) {
  require(x.rows() == p.n() && x.cols() == p.k(), "macg_log_density: shape mismatch");
  const double n = static_cast<double>(p.n());
  const double k = static_cast<double>(p.k());
  const double e = field_of<Scalar> == Field::complex ? 1.0 : 0.5;
  Mat<Scalar> inv = p.sigma().inverse();
  Mat<Scalar> s = x.adjoint() * inv * x;
  return -e * k * log_det_pd<Scalar>(p.sigma()) - e * n * log_det_pd<Scalar>(hermitian_part(s));
}

// ---------------------------------------------------------------------------

template <typename Scalar>
MatrixBinghamParams<Scalar>::MatrixBinghamParams(Mat<Scalar> a, Eigen::Index k, double tol)
    : a_(std::move(a)), k_(k) {
  require_hermitian(a_, tol, "MatrixBinghamParams");
  require(k_ >= 1 && k_ <= a_.rows(), "MatrixBinghamParams: need 1 <= k <= n");
}

template <typename Scalar>
double bingham_log_density(const Mat<Scalar>& x, const MatrixBinghamParams<Scalar>& p) {
  require(x.rows() == p.n() && x.cols() == p.k(), "bingham_log_density: shape mismatch");
  return -std::real((x.adjoint() * p.a() * x).trace());
}

template <typename Scalar>
VectorXd hermitian_stat_coords(const Mat<Scalar>& h) {
  const Eigen::Index n = h.rows();
  constexpr bool cplx = field_of<Scalar> == Field::complex;
  const Eigen::Index pairs = n * (n - 1) / 2;
  VectorXd t(n + (cplx ? 2 : 1) * pairs);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) t(idx++) = std::real(h(i, i));
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      t(idx++) = std::real(h(i, j));
      if constexpr (cplx) t(idx++) = std::imag(h(i, j));
    }
  return t;
}

template <typename Scalar>
VectorXd hermitian_natural_coords(const Mat<Scalar>& h) {
  VectorXd t = hermitian_stat_coords<Scalar>(h);
  t.tail(t.size() - h.rows()) *= 2.0;
  return t;
}

template <typename Scalar>
Mat<Scalar> hermitian_from_natural_coords(const VectorXd& theta, Eigen::Index n) {
  constexpr bool cplx = field_of<Scalar> == Field::complex;
  require(theta.size() == n + (cplx ? 2 : 1) * n * (n - 1) / 2,
          "hermitian_from_natural_coords: wrong coordinate count");
  Mat<Scalar> h = Mat<Scalar>::Zero(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = theta(idx++);
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      Scalar v = 0.5 * theta(idx++);
      if constexpr (cplx) v += Complex(0.0, 0.5 * theta(idx++));
      h(i, j) = v;
      if constexpr (cplx)
        h(j, i) = std::conj(v);
      else
        h(j, i) = v;
    }
  return h;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
MatrixBinghamSampler<Scalar>::MatrixBinghamSampler(MatrixBinghamParams<Scalar> p,
                                                   BinghamConfig cfg)
    : p_(std::move(p)), cfg_(cfg) {
  cfg_.chain.validate();
  const Eigen::Index n = p_.n();
  const Eigen::Index k = p_.k();
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(hermitian_part(p_.a()));
  shifted_ = hermitian_part(p_.a()) - es.eigenvalues()(0) * Mat<Scalar>::Identity(n, n);
  if (k == n) {
    diag_.method = "haar";
    return;
  }
  if (k == 1) {
    diag_.method = "rejection-acg";
    if constexpr (field_of<Scalar> == Field::complex)
      vector_ = std::make_unique<SphereBinghamSampler>(realify(shifted_));
    else
      vector_ = std::make_unique<SphereBinghamSampler>(shifted_);
    return;
  }
  diag_.method = "rejection-macg";
  constexpr bool cplx = field_of<Scalar> == Field::complex;
  const VectorXd lambda = es.eigenvalues().array() - es.eigenvalues()(0);
  const double q = (cplx ? 2.0 : 1.0) * static_cast<double>(n);
  const double b = acg_root(lambda, cplx ? 2.0 : 1.0, q);
  c_ = 2.0 / b;
  m_ = cplx ? static_cast<double>(n) : 0.5 * static_cast<double>(n);
  const VectorXd omega = 1.0 + c_ * lambda.array();
  omega_sqrt_inv_ = es.eigenvectors() * omega.cwiseSqrt().cwiseInverse().asDiagonal() *
                    es.eigenvectors().adjoint();
  const double mc = m_ * c_;
  const double log_h = mc >= 1.0 ? 1.0 / c_ - m_ + m_ * std::log(mc) : 0.0;
  log_bound_ = static_cast<double>(k) * log_h;
}

template <typename Scalar>
bool MatrixBinghamSampler<Scalar>::try_rejection(RngStream& rng, Mat<Scalar>& out) {
  const Eigen::Index n = p_.n();
  const Eigen::Index k = p_.k();
  ++diag_.proposals;
  Mat<Scalar> x = polar_factor<Scalar>(omega_sqrt_inv_ * sample_ginibre<Scalar>(rng, n, k));
  Mat<Scalar> s = x.adjoint() * (Mat<Scalar>::Identity(n, n) + c_ * shifted_) * x;
  s = hermitian_part(s);
  const double tr = std::real(s.trace()) - static_cast<double>(k);
  const double log_ratio = -tr / c_ + m_ * log_det_pd<Scalar>(s) - log_bound_;
  if (std::log(rng.uniform_open()) < log_ratio) {
    ++diag_.accepted;
    out = std::move(x);
    return true;
  }
  return false;
}

template <typename Scalar>
void MatrixBinghamSampler<Scalar>::start_gibbs(RngStream& rng) {
  gibbs_ = true;
  diag_.method = "gibbs";
  diag_.burn_in = cfg_.chain.burn_in;
  diag_.thinning = cfg_.chain.thinning;
  if (have_last_) {
    state_ = last_;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(shifted_);
    state_ = es.eigenvectors().leftCols(p_.k());
  }
  for (int i = 0; i < cfg_.chain.burn_in; ++i) gibbs_sweep(rng);
}

template <typename Scalar>
void MatrixBinghamSampler<Scalar>::gibbs_sweep(RngStream& rng) {
  const Eigen::Index n = p_.n();
  const Eigen::Index k = p_.k();
  for (Eigen::Index j = 0; j < k; ++j) {
    Mat<Scalar> others(n, k - 1);
    for (Eigen::Index i = 0, c = 0; i < k; ++i)
      if (i != j) others.col(c++) = state_.col(i);
    Mat<Scalar> q = complement_basis<Scalar>(others, n);
    Mat<Scalar> h = q.adjoint() * shifted_ * q;
    state_.col(j) = q * sphere_bingham_draw<Scalar>(rng, h, &diag_.proposals, &diag_.accepted);
  }
  ++diag_.sweeps;
  const double defect = orthonormality_defect(state_);
  diag_.max_orthonormality_defect = std::max(diag_.max_orthonormality_defect, defect);
  if (defect > 1e-13) state_ = polar_factor<Scalar>(state_);
}

template <typename Scalar>
StiefelPoint<Scalar> MatrixBinghamSampler<Scalar>::operator()(RngStream& rng) {
  ++diag_.draws;
  const Eigen::Index n = p_.n();
  const Eigen::Index k = p_.k();
  if (k == n) return sample_stiefel_uniform<Scalar>(rng, n, k);
  if (k == 1) {
    VectorXd y = (*vector_)(rng);
    diag_.proposals = vector_->proposals();
    diag_.accepted = vector_->accepted();
    Mat<Scalar> x(n, 1);
    if constexpr (field_of<Scalar> == Field::complex)
      x.col(0) = complexify(y);
    else
      x.col(0) = y;
    return {x};
  }
  if (!gibbs_) {
    Mat<Scalar> out;
    for (;;) {
      if (try_rejection(rng, out)) {
        last_ = out;
        have_last_ = true;
        return {out};
      }
      if (diag_.proposals >= cfg_.min_proposals &&
          diag_.acceptance_rate() < cfg_.switch_acceptance)
        break;
    }
    start_gibbs(rng);
  }
  for (int i = 0; i < cfg_.chain.thinning; ++i) gibbs_sweep(rng);
  return {state_};
}

template <typename Scalar>
StiefelPoint<Scalar> bingham_sample(RngStream& rng, const MatrixBinghamParams<Scalar>& p) {
  MatrixBinghamSampler<Scalar> s(p);
  return s(rng);
}

template <typename Scalar>
double bmf_log_density(const Mat<Scalar>& x, const Mat<Scalar>& a, const Mat<Scalar>& b,
                       const Mat<Scalar>& c) {
  require(a.rows() == x.rows() && a.cols() == x.rows(), "bmf_log_density: A must be n x n");
  require(b.rows() == x.cols() && b.cols() == x.cols(), "bmf_log_density: B must be k x k");
  require(c.rows() == x.rows() && c.cols() == x.cols(), "bmf_log_density: C must be n x k");
  return std::real((c.adjoint() * x).trace() + (b * x.adjoint() * a * x).trace());
}

#define QSTIEFEL_INSTANTIATE(S)                                                            \
  template class MacgParams<S>;                                                            \
  template StiefelPoint<S> macg_sample<S>(RngStream&, const MacgParams<S>&);               \
  template double macg_log_density<S>(const Mat<S>&, const MacgParams<S>&);                \
  template class MatrixBinghamParams<S>;                                                   \
  template double bingham_log_density<S>(const Mat<S>&, const MatrixBinghamParams<S>&);    \
  template VectorXd hermitian_stat_coords<S>(const Mat<S>&);                               \
  template VectorXd hermitian_natural_coords<S>(const Mat<S>&);                            \
  template Mat<S> hermitian_from_natural_coords<S>(const VectorXd&, Eigen::Index);         \
  template class MatrixBinghamSampler<S>;                                                  \
  template StiefelPoint<S> bingham_sample<S>(RngStream&, const MatrixBinghamParams<S>&);   \
  template double bmf_log_density<S>(const Mat<S>&, const Mat<S>&, const Mat<S>&,          \
                                     const Mat<S>&);

QSTIEFEL_INSTANTIATE(double)
QSTIEFEL_INSTANTIATE(Complex)

#undef QSTIEFEL_INSTANTIATE

}  // namespace qstiefel
