#include <cmath>
#include <limits>
#include <numbers>

#include "qstiefel/expfam.hpp"
#include "qstiefel/special.hpp"

namespace qstiefel {

void ChainConfig::validate() const {
  require(burn_in >= 1, "ChainConfig: burn_in must be positive");
  require(thinning >= 1, "ChainConfig: thinning must be positive");
}

VmfParams::VmfParams(VectorXd mu, double kappa) : mu_(std::move(mu)), kappa_(kappa) {
  require(mu_.size() >= 2, "VmfParams: dimension must be at least 2");
  require(std::abs(mu_.norm() - 1.0) <= 1e-12, "VmfParams: mu must be a unit vector");
  require(kappa_ >= 0.0 && std::isfinite(kappa_), "VmfParams: kappa must be finite and >= 0");
}

double vmf_log_normalizer(int d, double kappa) {
  require(d >= 2, "vmf_log_normalizer: d must be at least 2");
  require(kappa >= 0.0, "vmf_log_normalizer: kappa must be >= 0");
  const double nu = 0.5 * d - 1.0;
  if (kappa < 1e-6) return kappa * kappa / (2.0 * d);
  return std::lgamma(0.5 * d) + nu * std::log(2.0 / kappa) + log_bessel_i(nu, kappa);
}

double vmf_mean_resultant(int d, double kappa) {
  require(d >= 2, "vmf_mean_resultant: d must be at least 2");
  return bessel_ratio(0.5 * d - 1.0, kappa);
}

double vmf_log_density(const VectorXd& x, const VmfParams& p) {
  require(x.size() == p.dim(), "vmf_log_density: dimension mismatch");
  require(std::abs(x.norm() - 1.0) <= 1e-10, "vmf_log_density: x must be a unit vector");
  return p.kappa() * p.mu().dot(x) - vmf_log_normalizer(p.dim(), p.kappa());
}

double vmf_sample_cosine(RngStream& rng, int d, double kappa) {
  require(d >= 2, "vmf_sample_cosine: d must be at least 2");
  const double dm1 = d - 1.0;
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  for (;;) {
    const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform_open();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

VectorXd vmf_sample(RngStream& rng, const VmfParams& p) {
  const int d = p.dim();
  const double w = vmf_sample_cosine(rng, d, p.kappa());
  VectorXd v(d);
  double vn = 0.0;
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    v -= p.mu().dot(v) * p.mu();
    vn = v.norm();
  } while (vn < 1e-12);
  return w * p.mu() + std::sqrt(std::max(0.0, 1.0 - w * w)) * (v / vn);
}

double vmf_kappa_from_resultant(int d, double rbar) {
  require(d >= 2, "vmf_kappa_from_resultant: d must be at least 2");
  require(rbar >= 0.0 && rbar < 1.0,
          "vmf_kappa_from_resultant: mean resultant must lie in [0, 1); a unit mean has no "
          "finite concentration");
  if (rbar < 1e-14) return 0.0;
  double kappa = rbar * (d - rbar * rbar) / (1.0 - rbar * rbar);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double a = vmf_mean_resultant(d, kappa);
    const double f = a - rbar;
    if (f > 0.0)
      hi = std::min(hi, kappa);
    else
      lo = std::max(lo, kappa);
    const double deriv = 1.0 - a * a - (d - 1.0) * a / kappa;
    double next = kappa - f / deriv;
    if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * kappa;
    const double step = std::abs(next - kappa);
    kappa = next;
    if (step <= 1e-12 * std::max(1.0, kappa)) break;
  }
  return kappa;
}

VmfParams vmf_estimate(const VectorXd& mean_vector) {
  const int d = static_cast<int>(mean_vector.size());
  require(d >= 2, "vmf_estimate: dimension must be at least 2");
  const double r = mean_vector.norm();
  require(r < 1.0, "vmf_estimate: mean vector must have norm < 1");
  VectorXd mu = VectorXd::Zero(d);
  if (r > 0.0)
    mu = mean_vector / r;
  else
    mu(0) = 1.0;
  return VmfParams(mu, vmf_kappa_from_resultant(d, r));
}

MatrixXd complex_to_real_embed(const MatrixXcd& a, double tol) {
  require(a.rows() == a.cols(), "complex_to_real_embed: matrix must be square");
  require((a - a.adjoint()).cwiseAbs().maxCoeff() <= tol,
          "complex_to_real_embed: matrix must be Hermitian");
  return realify(a);
}

MatrixXcd lift_real_frame(const MatrixXd& y, double tol) {
  require(y.rows() % 2 == 0, "lift_real_frame: row count must be even");
  const Eigen::Index n = y.rows() / 2;
  MatrixXcd z = y.topRows(n).cast<Complex>() + Complex(0.0, 1.0) * y.bottomRows(n).cast<Complex>();
  require(orthonormality_defect(z) <= tol,
          "lift_real_frame: real frame does not come from a complex frame");
  return z;
}

}  // namespace qstiefel
