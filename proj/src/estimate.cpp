#include "qstiefel/estimate.hpp"

#include <cmath>

namespace qstiefel {

void SaConfig::validate() const {
  require(a0 > 0.0 && tau > 0.0, "SaConfig: a0 and tau must be positive");
  require(batch >= 2 && max_iter >= 1 && consecutive >= 1, "SaConfig: invalid iteration sizes");
  require(se_factor > 0.0 && final_batch >= 0 && sub_batches >= 2,
          "SaConfig: invalid tolerance settings");
}

BatchSummary summarize_batch(const MatrixXd& t, int sub_batches) {
  const Eigen::Index n = t.rows();
  require(n >= 2, "summarize_batch: need at least two draws");
  BatchSummary s;
  s.mean = t.colwise().mean().transpose();
  MatrixXd centered = t.rowwise() - s.mean.transpose();
  s.cov = centered.transpose() * centered / static_cast<double>(n - 1);
  if (n < 2 * sub_batches) {
    s.se = (s.cov.diagonal() / static_cast<double>(n)).cwiseSqrt();
    return s;
  }
  const Eigen::Index len = n / sub_batches;
  MatrixXd means(sub_batches, t.cols());
  for (int b = 0; b < sub_batches; ++b) {
    const Eigen::Index start = b * len;
    const Eigen::Index count = (b + 1 == sub_batches) ? n - start : len;
    means.row(b) = t.middleRows(start, count).colwise().mean();
  }
  MatrixXd mc = means.rowwise() - means.colwise().mean();
  s.se = (mc.colwise().squaredNorm().transpose() / static_cast<double>(sub_batches - 1) /
          static_cast<double>(sub_batches))
             .cwiseSqrt();
  return s;
}

namespace {

VectorXd pinv_apply(const MatrixXd& cov, const VectorXd& r, double cutoff) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  const VectorXd& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  VectorXd coeff = es.eigenvectors().transpose() * r;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    coeff(i) = ev(i) > cutoff * top && ev(i) > 0.0 ? coeff(i) / ev(i) : 0.0;
  return es.eigenvectors() * coeff;
}

VectorXd clip_step(VectorXd step, double max_step) {
  if (max_step > 0.0) {
    const double big = step.cwiseAbs().maxCoeff();
    if (big > max_step) step *= max_step / big;
  }
  return step;
}

}  // namespace

SaResult stochastic_approximation(const VectorXd& theta0, const VectorXd& target,
                                  const StatisticsBatch& stats, const SaConfig& cfg) {
  cfg.validate();
  require(theta0.size() == target.size(), "stochastic_approximation: size mismatch");
  SaResult out;
  VectorXd theta = theta0;
  std::vector<VectorXd> streak;
  BatchSummary last;
  double res = 0.0;
  for (int t = 0; t < cfg.max_iter; ++t) {
    MatrixXd batch = stats(theta, cfg.batch);
    out.diag.samples += batch.rows();
    last = summarize_batch(batch, cfg.sub_batches);
    const VectorXd r = target - last.mean;
    res = r.norm();
    const double se = last.se.norm();
    out.diag.history.push_back(res);
    out.diag.iterations = t + 1;
    if (res < cfg.se_factor * se)
      streak.push_back(theta);
    else
      streak.clear();
    if (static_cast<int>(streak.size()) >= cfg.consecutive) {
      out.diag.converged = true;
      break;
    }
    VectorXd step = cfg.precondition ? pinv_apply(last.cov, r, cfg.pinv_cutoff) : r;
    theta += clip_step(cfg.a0 / (1.0 + t / cfg.tau) * step, cfg.max_step);
  }
  if (!out.diag.converged)
    throw NonConvergence("stochastic_approximation: no convergence within max_iter", res);

  VectorXd avg = VectorXd::Zero(theta.size());
  for (const auto& v : streak) avg += v;
  avg /= static_cast<double>(streak.size());
  out.theta = avg;
  if (cfg.final_batch <= 0) {
    out.diag.residual_vector = target - last.mean;
    out.diag.se_vector = last.se;
  } else {
    MatrixXd b1 = stats(avg, cfg.final_batch);
    BatchSummary s1 = summarize_batch(b1, cfg.sub_batches);
    VectorXd polished =
        avg + clip_step(pinv_apply(s1.cov, target - s1.mean, cfg.pinv_cutoff), cfg.max_step);
    MatrixXd b2 = stats(polished, cfg.final_batch);
    BatchSummary s2 = summarize_batch(b2, cfg.sub_batches);
    out.diag.samples += b1.rows() + b2.rows();
    const double z1 = (target - s1.mean).norm() / std::max(s1.se.norm(), 1e-300);
    const double z2 = (target - s2.mean).norm() / std::max(s2.se.norm(), 1e-300);
    const BatchSummary& keep = z2 <= z1 ? s2 : s1;
    out.theta = z2 <= z1 ? polished : avg;
    out.diag.residual_vector = target - keep.mean;
    out.diag.se_vector = keep.se;
  }
  out.diag.residual = out.diag.residual_vector.norm();
  out.diag.standard_error = out.diag.se_vector.norm();
  return out;
}

// ---------------------------------------------------------------------------

Estimate<VmfParams> estimate_vmf_params(RngStream& rng, const VectorXd& target_mean,
                                        const SaConfig& cfg) {
  const Eigen::Index d = target_mean.size();
  require(d >= 2, "estimate_vmf_params: dimension must be at least 2");
  require(target_mean.norm() < 1.0,
          "estimate_vmf_params: target mean must have norm < 1 (unit norm is the boundary)");
  auto params_of = [d](const VectorXd& theta) {
    const double kappa = theta.norm();
    VectorXd mu = VectorXd::Zero(d);
    mu(0) = 1.0;
    if (kappa > 0.0) mu = theta / kappa;
    return VmfParams(mu, kappa);
  };
  StatisticsBatch stats = [&](const VectorXd& theta, int batch) {
    VmfParams p = params_of(theta);
    MatrixXd t(batch, d);
    for (int i = 0; i < batch; ++i) t.row(i) = vmf_sample(rng, p).transpose();
    return t;
  };
  SaResult r = stochastic_approximation(VectorXd::Zero(d), target_mean, stats, cfg);
  r.diag.family = "vmf";
  return {params_of(r.theta), r.diag};
}

Estimate<MatrixFisherParams<double>> estimate_rotation_fisher_params(RngStream& rng,
                                                                     const MatrixXd& target,
                                                                     const SaConfig& cfg) {
  require(target.rows() == target.cols() && (target.rows() == 2 || target.rows() == 3),
          "estimate_rotation_fisher_params: only SO(2) and SO(3) are supported");
  require(in_rotation_hull_interior(target),
          "estimate_rotation_fisher_params: target must lie in the interior of conv SO(n); "
          "boundary targets (e.g. a fixed rotation) have no finite parameter");
  if (target.rows() == 2) {
    const double a = 0.5 * (target(0, 0) + target(1, 1));
    const double b = 0.5 * (target(1, 0) - target(0, 1));
    const double kappa = vmf_kappa_from_resultant(2, std::hypot(a, b));
    const double th = std::atan2(b, a);
    MatrixXd f(2, 2);
    f << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    EstimateDiagnostics d;
    d.family = "matrix-fisher-so2";
    d.converged = true;
    return {MatrixFisherParams<double>(0.5 * kappa * f, FisherManifold::rotation_group), d};
  }
  const SignedSvd svd = sign_preserving_svd(target);
  StatisticsBatch stats = [&](const VectorXd& theta, int batch) {
    MatrixFisherSampler<double> s(
        MatrixFisherParams<double>(MatrixXd(theta.asDiagonal()), FisherManifold::rotation_group));
    MatrixXd t(batch, 3);
    for (int i = 0; i < batch; ++i) t.row(i) = s(rng).diagonal().transpose();
    return t;
  };
  SaResult r = stochastic_approximation(VectorXd::Zero(3), svd.s, stats, cfg);
  r.diag.family = "matrix-fisher-so3";
  MatrixXd f = svd.U * r.theta.asDiagonal() * svd.V.transpose();
  return {MatrixFisherParams<double>(f, FisherManifold::rotation_group), r.diag};
}

template <typename Scalar>
Estimate<MatrixBinghamParams<Scalar>> estimate_bingham_params(RngStream& rng,
                                                              const Mat<Scalar>& target,
                                                              Eigen::Index k,
                                                              const SaConfig& cfg) {
  const Eigen::Index n = target.rows();
  require(target.cols() == n && k >= 1 && k <= n, "estimate_bingham_params: bad shapes");
  require((target - target.adjoint()).cwiseAbs().maxCoeff() <= 1e-10,
          "estimate_bingham_params: target must be Hermitian");
  require(std::abs(std::real(target.trace()) - static_cast<double>(k)) <= 1e-9,
          "estimate_bingham_params: target trace must equal k");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(hermitian_part(target));
  if (k == n) {
    require((target - Mat<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9,
            "estimate_bingham_params: for k = n the only attainable target is the identity");
    EstimateDiagnostics d;
    d.family = "matrix-bingham";
    d.converged = true;
    return {MatrixBinghamParams<Scalar>(Mat<Scalar>::Zero(n, n), k), d};
  }
  require(es.eigenvalues()(0) > 0.0 && es.eigenvalues()(n - 1) < 1.0,
          "estimate_bingham_params: target spectrum must lie strictly inside (0, 1)");
  StatisticsBatch stats = [&](const VectorXd& theta, int batch) {
    MatrixBinghamSampler<Scalar> s(
        MatrixBinghamParams<Scalar>(Mat<Scalar>((-theta).template cast<Scalar>().asDiagonal()), k));
    MatrixXd t(batch, n);
    for (int i = 0; i < batch; ++i) t.row(i) = s(rng).X.rowwise().squaredNorm().transpose();
    return t;
  };
  SaResult r = stochastic_approximation(VectorXd::Zero(n), es.eigenvalues(), stats, cfg);
  r.diag.family = "matrix-bingham";
  VectorXd lambda = -r.theta;
  lambda.array() -= lambda.minCoeff();
  Mat<Scalar> a = es.eigenvectors() * lambda.template cast<Scalar>().asDiagonal() *
                  es.eigenvectors().adjoint();
  return {MatrixBinghamParams<Scalar>(hermitian_part(a), k), r.diag};
}

Estimate<FrameBinghamParams> estimate_frame_bingham_params(RngStream& rng,
                                                           const ChoiMatrix& target,
                                                           const SaConfig& cfg,
                                                           FrameBinghamConfig chain) {
  const int n = target.dim();
  const int n2 = n * n;
  const MatrixXcd& lam = target.mat();
  std::vector<int> pinned, free;
  for (int p = 0; p < n2; ++p) (std::real(lam(p, p)) <= 1e-12 ? pinned : free).push_back(p);
  MatrixXcd sub(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j) sub(i, j) = lam(free[i], free[j]);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sub);
  require(es.eigenvalues()(0) > 1e-9,
          "estimate_frame_bingham_params: target Choi matrix is singular on its support, so it "
          "lies on the boundary of the channel set and no finite parameter matches it");
  // Start from the Wishart-like guess Theta = -N^2 Lambda^{-1} on the support.
  MatrixXcd inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                  es.eigenvectors().adjoint();
  MatrixXcd theta0 = MatrixXcd::Zero(n2, n2);
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j)
      theta0(free[i], free[j]) = -static_cast<double>(n2) * inv(i, j);
  theta0 = hermitian_part(project_frame_gauge(theta0, n));

  FrameBinghamSampler sampler(FrameBinghamParams(n, theta0, pinned), chain);
  StatisticsBatch stats = [&](const VectorXd& theta, int batch) {
    sampler.set_theta(hermitian_from_natural_coords<Complex>(theta, n2));
    MatrixXd t(batch, theta.size());
    for (int i = 0; i < batch; ++i)
      t.row(i) = hermitian_stat_coords<Complex>(frame_to_choi(sampler(rng)).mat()).transpose();
    return t;
  };
  SaResult r = stochastic_approximation(hermitian_natural_coords<Complex>(theta0),
                                        hermitian_stat_coords<Complex>(lam), stats, cfg);
  r.diag.family = "frame-bingham";
  MatrixXcd theta =
      hermitian_part(project_frame_gauge(hermitian_from_natural_coords<Complex>(r.theta, n2), n));
  for (int p : pinned) {
    theta.row(p).setZero();
    theta.col(p).setZero();
  }
  return {FrameBinghamParams(n, theta, pinned), r.diag};
}

double frame_theta_spread(const MatrixXcd& theta, int dim) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(project_frame_gauge(theta, dim)));
  return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

Estimate<FrameBinghamParams> frame_bingham_params_from_choi(RngStream& rng,
                                                            const ChoiMatrix& target,
                                                            double concentration,
                                                            const SaConfig& cfg,
                                                            FrameBinghamConfig chain) {
  require(concentration > 0.0, "frame_bingham_params_from_choi: concentration must be positive");
  Estimate<FrameBinghamParams> est = estimate_frame_bingham_params(rng, target, cfg, chain);
  const double spread = frame_theta_spread(est.params.theta(), target.dim());
  if (spread > concentration) {
    est.diag.scale = concentration / spread;
    est.params = FrameBinghamParams(target.dim(), est.params.theta() * est.diag.scale,
                                    est.params.pinned());
  }
  return est;
}

Estimate<double> estimate_stiefel_fisher_scale(RngStream& rng, const MatrixXcd& s, double m,
                                               const SaConfig& cfg, ChainConfig chain) {
  require(orthonormality_defect(s) <= 1e-10, "estimate_stiefel_fisher_scale: S must be a frame");
  require(m > 0.0 && m < 1.0, "estimate_stiefel_fisher_scale: m must lie in (0, 1)");
  const double k = static_cast<double>(s.cols());
  StatisticsBatch stats = [&](const VectorXd& theta, int batch) {
    MatrixFisherSampler<Complex> sampler(MatrixFisherParams<Complex>(theta(0) * s), chain);
    MatrixXd t(batch, 1);
    for (int i = 0; i < batch; ++i) t(i, 0) = std::real((s.adjoint() * sampler(rng)).trace());
    return t;
  };
  VectorXd target(1);
  target(0) = m * k;
  SaResult r = stochastic_approximation(VectorXd::Zero(1), target, stats, cfg);
  r.diag.family = "stiefel-fisher-scale";
  return {std::max(0.0, r.theta(0)), r.diag};
}

template Estimate<MatrixBinghamParams<double>> estimate_bingham_params<double>(
    RngStream&, const MatrixXd&, Eigen::Index, const SaConfig&);
template Estimate<MatrixBinghamParams<Complex>> estimate_bingham_params<Complex>(
    RngStream&, const MatrixXcd&, Eigen::Index, const SaConfig&);

}  // namespace qstiefel
