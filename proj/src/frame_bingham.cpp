#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "qstiefel/expfam.hpp"

namespace qstiefel {

FrameBinghamParams::FrameBinghamParams(int dim, MatrixXcd theta, std::vector<int> pinned,
                                       double tol)
    : dim_(dim), theta_(std::move(theta)), pinned_(std::move(pinned)) {
  require(dim_ >= 1, "FrameBinghamParams: dim must be positive");
  const int n2 = dim_ * dim_;
  require(theta_.rows() == n2 && theta_.cols() == n2, "FrameBinghamParams: Theta must be N^2 x N^2");
  require(theta_.allFinite(), "FrameBinghamParams: Theta must be finite");
  require((theta_ - theta_.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, theta_.cwiseAbs().maxCoeff()),
          "FrameBinghamParams: Theta must be Hermitian");
  theta_ = hermitian_part(theta_);
  std::sort(pinned_.begin(), pinned_.end());
  pinned_.erase(std::unique(pinned_.begin(), pinned_.end()), pinned_.end());
  for (int p : pinned_) require(p >= 0 && p < n2, "FrameBinghamParams: pinned block out of range");
  for (int c = 0; c < dim_; ++c) {
    int free_blocks = 0;
    for (int a = 0; a < dim_; ++a)
      if (!std::binary_search(pinned_.begin(), pinned_.end(), a + dim_ * c)) ++free_blocks;
    require(free_blocks > 0, "FrameBinghamParams: every column needs an unpinned block");
  }
}

MatrixXcd project_frame_gauge(const MatrixXcd& theta, int dim) {
  const int n = dim;
  require(theta.rows() == n * n && theta.cols() == n * n, "project_frame_gauge: shape mismatch");
  MatrixXcd b = MatrixXcd::Zero(n, n);
  for (int c = 0; c < n; ++c)
    for (int cp = 0; cp < n; ++cp)
      for (int a = 0; a < n; ++a) b(c, cp) += theta(a + n * c, a + n * cp);
  return theta - Eigen::kroneckerProduct(b, MatrixXcd::Identity(n, n)).eval() / static_cast<double>(n);
}

double frame_bingham_log_density(const FrameForm& xi, const FrameBinghamParams& p) {
  require(xi.dim() == p.dim(), "frame_bingham_log_density: dimension mismatch");
  return std::real((p.theta() * frame_to_choi(xi).mat()).trace());
}

FrameBinghamSampler::FrameBinghamSampler(FrameBinghamParams p, FrameBinghamConfig cfg)
    : p_(std::move(p)), cfg_(cfg) {
  cfg_.chain.validate();
  require(cfg_.max_proposals >= 1, "FrameBinghamSampler: max_proposals must be positive");
  const int n = p_.dim();
  const int n2 = n * n;
  const int n3 = n2 * n;
  diag_.method = "gibbs";
  diag_.burn_in = cfg_.chain.burn_in;
  diag_.thinning = cfg_.chain.thinning;
  for (int c = 0; c < n; ++c) {
    std::vector<int> free_a;
    for (int a = 0; a < n; ++a)
      if (!std::binary_search(p_.pinned().begin(), p_.pinned().end(), a + n * c)) free_a.push_back(a);
    MatrixXcd basis = MatrixXcd::Zero(n3, static_cast<Eigen::Index>(free_a.size()) * n2);
    for (std::size_t i = 0; i < free_a.size(); ++i)
      basis.block(free_a[i] * n2, static_cast<Eigen::Index>(i) * n2, n2, n2).setIdentity();
    allowed_.push_back(std::move(basis));
  }
}

void FrameBinghamSampler::set_theta(const MatrixXcd& theta) {
  p_ = FrameBinghamParams(p_.dim(), theta, p_.pinned());
}

void FrameBinghamSampler::initialize(RngStream& rng) {
  const int n = p_.dim();
  const int n3 = n * n * n;
  xi_ = MatrixXcd::Zero(n3, n);
  for (int c = 0; c < n; ++c) {
    MatrixXcd q = restricted_complement<Complex>(allowed_[static_cast<std::size_t>(c)], xi_.leftCols(c));
    VectorXcd g = q * sample_ginibre<Complex>(rng, q.cols(), 1);
    xi_.col(c) = g / g.norm();
  }
  started_ = true;
  for (int i = 0; i < cfg_.chain.burn_in; ++i) sweep(rng);
}

void FrameBinghamSampler::sweep(RngStream& rng) {
  const int n = p_.dim();
  const int n2 = n * n;
  const MatrixXcd id2 = MatrixXcd::Identity(n2, n2);
  const MatrixXcd& theta = p_.theta();
  for (int c = 0; c < n; ++c) {
    MatrixXcd others(xi_.rows(), n - 1);
    VectorXcd b = VectorXcd::Zero(xi_.rows());
    for (int cp = 0, j = 0; cp < n; ++cp) {
      if (cp == c) continue;
      others.col(j++) = xi_.col(cp);
      b += Eigen::kroneckerProduct(theta.block(n * c, n * cp, n, n), id2).eval() * xi_.col(cp);
    }
    MatrixXcd q = restricted_complement<Complex>(allowed_[static_cast<std::size_t>(c)], others);
    MatrixXcd m = q.adjoint() * Eigen::kroneckerProduct(theta.block(n * c, n * c, n, n), id2).eval() * q;
    SphereBmfSampler s(realify(hermitian_part(m)), realify(VectorXcd(q.adjoint() * b)));
    VectorXd current = realify(VectorXcd(q.adjoint() * xi_.col(c)));
    current /= current.norm();
    bool used_mh = false, mh_ok = false;
    VectorXd y = s.update(rng, current, cfg_.max_proposals, &used_mh, &mh_ok);
    diag_.proposals += s.proposals();
    diag_.accepted += s.accepted();
    if (used_mh) {
      ++diag_.mh_steps;
      if (mh_ok) ++diag_.mh_accepted;
    }
    xi_.col(c) = q * complexify(y);
  }
  ++diag_.sweeps;
  const double defect = orthonormality_defect(xi_);
  diag_.max_orthonormality_defect = std::max(diag_.max_orthonormality_defect, defect);
  if (defect > cfg_.reorthonormalize_above) {
    for (int c = 0; c < n; ++c) {
      MatrixXcd q = restricted_complement<Complex>(allowed_[static_cast<std::size_t>(c)], xi_.leftCols(c));
      VectorXcd v = q * (q.adjoint() * xi_.col(c));
      xi_.col(c) = v / v.norm();
    }
  }
}

FrameForm FrameBinghamSampler::operator()(RngStream& rng) {
  if (!started_) initialize(rng);
  for (int i = 0; i < cfg_.chain.thinning; ++i) sweep(rng);
  ++diag_.draws;
  return FrameForm(xi_, p_.dim());
}

FrameForm frame_bingham_sample(RngStream& rng, const FrameBinghamParams& p, FrameBinghamConfig cfg) {
  FrameBinghamSampler s(p, cfg);
  return s(rng);
}

}  // namespace qstiefel
