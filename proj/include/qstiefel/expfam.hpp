#pragma once

// Exponential families on spheres, Stiefel manifolds and rotation groups.
//
// Sign convention: matrix-Bingham parameters enter as exp(-Tr X^dagger A X)
// relative to Haar measure, so a strongly concentrated A favours the frames
// spanned by its least eigenvectors. Internally every sampler works with the
// positive form exp(+Tr X^dagger M X), M = -A, which is also the form used by
// the frame-Bingham family and by bmf_log_density.
//
// Matrix-family densities are unnormalized; only the vMF normalizer is
// evaluated.

#include <memory>
#include <string>
#include <vector>

#include "qstiefel/core.hpp"
#include "qstiefel/linalg.hpp"
#include "qstiefel/repr.hpp"
#include "qstiefel/rng.hpp"
#include "qstiefel/uniform.hpp"

namespace qstiefel {

// ---------------------------------------------------------------------------
// Sampler bookkeeping

struct ChainConfig {
  int burn_in = 100;
  int thinning = 10;

  void validate() const;
};

struct SamplerDiagnostics {
  std::string method;
  long long draws = 0;
  long long proposals = 0;
  long long accepted = 0;
  long long sweeps = 0;
  long long mh_steps = 0;
  long long mh_accepted = 0;
  int burn_in = 0;
  int thinning = 0;
  double max_orthonormality_defect = 0.0;

  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 1.0;
  }
};

// ---------------------------------------------------------------------------
// von Mises-Fisher on S^{d-1}

class VmfParams {
 public:
  VmfParams(VectorXd mu, double kappa);

  const VectorXd& mu() const { return mu_; }
  double kappa() const { return kappa_; }
  int dim() const { return static_cast<int>(mu_.size()); }

 private:
  VectorXd mu_;
  double kappa_;
};

// log E_uniform[exp(kappa mu.x)] on S^{d-1}.
double vmf_log_normalizer(int d, double kappa);
// Mean resultant length A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa).
double vmf_mean_resultant(int d, double kappa);
// Log density relative to the uniform probability measure on the sphere.
double vmf_log_density(const VectorXd& x, const VmfParams& p);
// Draw of w = <mu, x> (Wood's rejection scheme).
double vmf_sample_cosine(RngStream& rng, int d, double kappa);
VectorXd vmf_sample(RngStream& rng, const VmfParams& p);
// Solves A_d(kappa) = rbar by Newton from the Banerjee initializer.
double vmf_kappa_from_resultant(int d, double rbar);
VmfParams vmf_estimate(const VectorXd& mean_vector);

// ---------------------------------------------------------------------------
// Real embedding of complex Hermitian matrices

// A_R = [[Re A, -Im A], [Im A, Re A]]; throws on non-Hermitian input.
MatrixXd complex_to_real_embed(const MatrixXcd& a, double tol = 1e-12);
// Z = Y_top + i Y_bottom. Always orthonormal for k = 1; for k > 1 only when
// Y comes from a complex frame, which is checked.
MatrixXcd lift_real_frame(const MatrixXd& y, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Sphere samplers

// exp(-y^T A y) on S^{q-1}, rejection from an angular central Gaussian
// envelope with Omega = 1 + 2A/b.
class SphereBinghamSampler {
 public:
  explicit SphereBinghamSampler(const MatrixXd& a);

  VectorXd operator()(RngStream& rng);

  long long proposals() const { return proposals_; }
  long long accepted() const { return accepted_; }

 private:
  MatrixXd v_;
  VectorXd lambda_;
  VectorXd scale_;
  double b_ = 1.0;
  double log_bound_ = 0.0;
  long long proposals_ = 0;
  long long accepted_ = 0;
};

// exp(y^T M y + 2 c^T y) on S^{q-1}. The linear term is absorbed into a
// Bingham envelope through 2u <= u^2/t + t with u = c^T y.
class SphereBmfSampler {
 public:
  SphereBmfSampler(const MatrixXd& m, const VectorXd& c);

  // Exact draw; throws NonConvergence after `max_proposals` rejections.
  VectorXd operator()(RngStream& rng, long long max_proposals = 10'000'000);

  // Target-invariant Markov update: up to max_proposals - 1 rejection
  // attempts, then a single independence Metropolis step from `current`.
  VectorXd update(RngStream& rng, const VectorXd& current, int max_proposals, bool* used_mh,
                  bool* mh_accepted);

  long long proposals() const { return proposals_; }
  long long accepted() const { return accepted_; }
  double shift() const { return t_; }

 private:
  double log_weight(const VectorXd& y) const;

  VectorXd c_;
  double t_ = 1.0;
  SphereBinghamSampler envelope_;
  long long proposals_ = 0;
  long long accepted_ = 0;
};

// ---------------------------------------------------------------------------
// Matrix angular central Gaussian

template <typename Scalar>
class MacgParams {
 public:
  MacgParams(Mat<Scalar> sigma, Eigen::Index k, double tol = 1e-10);

  const Mat<Scalar>& sigma() const { return sigma_; }
  Eigen::Index n() const { return sigma_.rows(); }
  Eigen::Index k() const { return k_; }

 private:
  Mat<Scalar> sigma_;
  Eigen::Index k_;
};

// X = W (W^dagger W)^{-1/2}, W with i.i.d. columns of covariance Sigma.
template <typename Scalar>
StiefelPoint<Scalar> macg_sample(RngStream& rng, const MacgParams<Scalar>& p);

// Normalized log density relative to Haar measure on V_k.
template <typename Scalar>
double macg_log_density(const Mat<Scalar>& x, const MacgParams<Scalar>& p);

// ---------------------------------------------------------------------------
// Matrix Bingham: exp(-Tr X^dagger A X) on V_k(F^n)

template <typename Scalar>
class MatrixBinghamParams {
 public:
  MatrixBinghamParams(Mat<Scalar> a, Eigen::Index k, double tol = 1e-12);

  const Mat<Scalar>& a() const { return a_; }
  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index k() const { return k_; }

 private:
  Mat<Scalar> a_;
  Eigen::Index k_;
};

template <typename Scalar>
double bingham_log_density(const Mat<Scalar>& x, const MatrixBinghamParams<Scalar>& p);

// Real coordinates of Hermitian (or symmetric) matrices. With
// theta = hermitian_natural_coords(H) and t = hermitian_stat_coords(K),
// theta . t = Re Tr(H K).
template <typename Scalar>
VectorXd hermitian_stat_coords(const Mat<Scalar>& h);
template <typename Scalar>
VectorXd hermitian_natural_coords(const Mat<Scalar>& h);
template <typename Scalar>
Mat<Scalar> hermitian_from_natural_coords(const VectorXd& theta, Eigen::Index n);

struct BinghamConfig {
  // Switch from MACG rejection to Gibbs when acceptance falls below this
  // rate after `min_proposals` proposals.
  double switch_acceptance = 1e-3;
  long long min_proposals = 2000;
  ChainConfig chain{};
};

template <typename Scalar>
class MatrixBinghamSampler {
 public:
  explicit MatrixBinghamSampler(MatrixBinghamParams<Scalar> p, BinghamConfig cfg = {});

  StiefelPoint<Scalar> operator()(RngStream& rng);

  bool using_gibbs() const { return gibbs_; }
  const MatrixBinghamParams<Scalar>& params() const { return p_; }
  const SamplerDiagnostics& diagnostics() const { return diag_; }

 private:
  bool try_rejection(RngStream& rng, Mat<Scalar>& out);
  void gibbs_sweep(RngStream& rng);
  void start_gibbs(RngStream& rng);

  MatrixBinghamParams<Scalar> p_;
  BinghamConfig cfg_;
  Mat<Scalar> shifted_;  // A - lambda_min, PSD
  std::unique_ptr<SphereBinghamSampler> vector_;
  Mat<Scalar> omega_sqrt_inv_;
  double c_ = 1.0;
  double m_ = 1.0;
  double log_bound_ = 0.0;
  bool gibbs_ = false;
  Mat<Scalar> state_;
  Mat<Scalar> last_;
  bool have_last_ = false;
  SamplerDiagnostics diag_;
};

template <typename Scalar>
StiefelPoint<Scalar> bingham_sample(RngStream& rng, const MatrixBinghamParams<Scalar>& p);

// Unnormalized generalized Bingham-von Mises-Fisher exponent
// Re Tr(C^dagger X + B X^dagger A X).
template <typename Scalar>
double bmf_log_density(const Mat<Scalar>& x, const Mat<Scalar>& a, const Mat<Scalar>& b,
                       const Mat<Scalar>& c);

// ---------------------------------------------------------------------------
// Matrix Fisher: exp(Re Tr F^dagger X)

enum class FisherManifold { stiefel, rotation_group };

template <typename Scalar>
class MatrixFisherParams {
 public:
  explicit MatrixFisherParams(Mat<Scalar> f, FisherManifold manifold = FisherManifold::stiefel);

  const Mat<Scalar>& f() const { return f_; }
  FisherManifold manifold() const { return manifold_; }

 private:
  Mat<Scalar> f_;
  FisherManifold manifold_;
};

template <typename Scalar>
double matrix_fisher_log_density(const Mat<Scalar>& x, const MatrixFisherParams<Scalar>& p);

// F = U diag(s) V^T with U, V in SO(n); the last entry of s carries the sign
// of det F.
struct SignedSvd {
  MatrixXd U;
  VectorXd s;
  MatrixXd V;
};
SignedSvd sign_preserving_svd(const MatrixXd& f);

// Rotation matrix of a unit quaternion (w, x, y, z).
MatrixXd rotation_from_quaternion(const Eigen::Vector4d& q);

// Strict interior of conv SO(3) (for n = 3) or conv SO(2) (for n = 2).
bool in_rotation_hull_interior(const MatrixXd& m, double margin = 0.0);

template <typename Scalar>
class MatrixFisherSampler {
 public:
  explicit MatrixFisherSampler(MatrixFisherParams<Scalar> p, ChainConfig chain = {});

  Mat<Scalar> operator()(RngStream& rng);

  const MatrixFisherParams<Scalar>& params() const { return p_; }
  const SamplerDiagnostics& diagnostics() const { return diag_; }

 private:
  void sweep(RngStream& rng);

  MatrixFisherParams<Scalar> p_;
  ChainConfig chain_;
  SignedSvd svd_;
  std::unique_ptr<SphereBinghamSampler> quaternion_;
  Mat<Scalar> state_;
  bool started_ = false;
  SamplerDiagnostics diag_;
};

template <typename Scalar>
Mat<Scalar> matrix_fisher_sample(RngStream& rng, const MatrixFisherParams<Scalar>& p);

// ---------------------------------------------------------------------------
// Generalized frame Bingham: exp(Re Tr(Theta Lambda(xi))) on frames xi of
// V_N(C^{N^3}), where Lambda(xi)_pq = xi_q^dagger xi_p. Equivalently
// exp(vec(xi)^dagger (Theta kron 1_{N^2}) vec(xi)). Pinned blocks are held at
// zero, which restricts the family to Choi matrices with Lambda_pp = 0.

class FrameBinghamParams {
 public:
  FrameBinghamParams(int dim, MatrixXcd theta, std::vector<int> pinned = {}, double tol = 1e-10);

  int dim() const { return dim_; }
  const MatrixXcd& theta() const { return theta_; }
  const std::vector<int>& pinned() const { return pinned_; }

 private:
  int dim_;
  MatrixXcd theta_;
  std::vector<int> pinned_;
};

// Removes the B kron 1_N component of Theta (B = Tr_2(Theta) / N), which only
// shifts the log density by a constant on trace-preserving frames.
MatrixXcd project_frame_gauge(const MatrixXcd& theta, int dim);

double frame_bingham_log_density(const FrameForm& xi, const FrameBinghamParams& p);

struct FrameBinghamConfig {
  ChainConfig chain{};
  // Rejection attempts per column update before one Metropolis step.
  int max_proposals = 200;
  // Re-orthonormalize when the frame drifts beyond this defect.
  double reorthonormalize_above = 1e-13;
};

class FrameBinghamSampler {
 public:
  FrameBinghamSampler(FrameBinghamParams p, FrameBinghamConfig cfg = {});

  FrameForm operator()(RngStream& rng);
  // One Gibbs sweep over the N columns of xi.
  void sweep(RngStream& rng);
  // Swap parameters while keeping the chain state (same dim and pinning).
  void set_theta(const MatrixXcd& theta);

  const MatrixXcd& state() const { return xi_; }
  const FrameBinghamParams& params() const { return p_; }
  const SamplerDiagnostics& diagnostics() const { return diag_; }

 private:
  void initialize(RngStream& rng);

  FrameBinghamParams p_;
  FrameBinghamConfig cfg_;
  std::vector<MatrixXcd> allowed_;  // per column: orthonormal basis of unpinned rows
  MatrixXcd xi_;
  bool started_ = false;
  SamplerDiagnostics diag_;
};

FrameForm frame_bingham_sample(RngStream& rng, const FrameBinghamParams& p,
                               FrameBinghamConfig cfg = {});

}  // namespace qstiefel
