#pragma once

// Natural-parameter estimation by moment matching. The log-normalizer of an
// exponential family is convex with gradient E_theta[T] and Hessian
// Cov_theta[T], so the iteration
//
//   theta <- theta + a_t Cov^+ (target - mean),  a_t = a0 / (1 + t / tau),
//
// driven by Monte Carlo estimates of the mean and covariance converges to the
// parameter whose expectation matches the target. Convergence is declared
// when the residual norm stays below se_factor times its Monte Carlo standard
// error for `consecutive` checks; the iterates of that streak are averaged
// and polished by one Newton step on a larger batch.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qstiefel/expfam.hpp"

namespace qstiefel {

struct SaConfig {
  double a0 = 1.0;
  double tau = 10.0;
  int batch = 2000;
  int max_iter = 200;
  int consecutive = 5;
  double se_factor = 3.0;
  // Batch for the final Newton polish and for the reported residual; 0 skips.
  int final_batch = 20000;
  // Batch-means blocks used for standard errors (robust to chain correlation).
  int sub_batches = 20;
  // Largest allowed |delta theta| per coordinate; <= 0 means unbounded.
  double max_step = 0.0;
  bool precondition = true;
  // Relative eigenvalue cutoff for the covariance pseudo-inverse.
  double pinv_cutoff = 1e-10;

  void validate() const;
};

struct EstimateDiagnostics {
  std::string family;
  int iterations = 0;
  bool converged = false;
  // ||target - mean|| at the returned parameters, and its MC standard error.
  double residual = 0.0;
  double standard_error = 0.0;
  VectorXd residual_vector;
  VectorXd se_vector;
  std::vector<double> history;
  long long samples = 0;
  // Factor applied to the matched parameter afterwards (concentration cap);
  // the residual above refers to the unscaled match.
  double scale = 1.0;
};

// Sufficient statistics of `batch` draws at natural parameter theta, one row
// per draw.
using StatisticsBatch = std::function<MatrixXd(const VectorXd& theta, int batch)>;

struct SaResult {
  VectorXd theta;
  EstimateDiagnostics diag;
};

// Throws NonConvergence (carrying the last residual) when max_iter is hit.
SaResult stochastic_approximation(const VectorXd& theta0, const VectorXd& target,
                                  const StatisticsBatch& stats, const SaConfig& cfg);

// Column means and batch-means standard errors of a statistics batch.
struct BatchSummary {
  VectorXd mean;
  VectorXd se;
  MatrixXd cov;
};
BatchSummary summarize_batch(const MatrixXd& t, int sub_batches);

template <typename P>
struct Estimate {
  P params;
  EstimateDiagnostics diag;
};

// vMF on S^{d-1} with E[x] = target_mean (natural parameter kappa mu).
Estimate<VmfParams> estimate_vmf_params(RngStream& rng, const VectorXd& target_mean,
                                        const SaConfig& cfg = {});

// Matrix Fisher on SO(n), n = 2 or 3, with E[X] = target. For n = 3 the
// target is reduced by a sign-preserving SVD to three signed singular values.
Estimate<MatrixFisherParams<double>> estimate_rotation_fisher_params(RngStream& rng,
                                                                     const MatrixXd& target,
                                                                     const SaConfig& cfg = {});

// Matrix Bingham on V_k with E[X X^dagger] = target (trace k, spectrum in
// (0, 1)).
template <typename Scalar>
Estimate<MatrixBinghamParams<Scalar>> estimate_bingham_params(RngStream& rng,
                                                              const Mat<Scalar>& target,
                                                              Eigen::Index k,
                                                              const SaConfig& cfg = {});

// Frame Bingham with E[Lambda(xi)] = target. Blocks with target Lambda_pp = 0
// are pinned; the rest of the target must be positive definite.
Estimate<FrameBinghamParams> estimate_frame_bingham_params(RngStream& rng,
                                                           const ChoiMatrix& target,
                                                           const SaConfig& cfg = {},
                                                           FrameBinghamConfig chain = {});

// Frame-Bingham parameters for a target Choi matrix. The matched Theta is
// scaled down, if needed, so that its spectral spread (largest minus smallest
// eigenvalue after gauge projection) does not exceed `concentration`.
Estimate<FrameBinghamParams> frame_bingham_params_from_choi(
    RngStream& rng, const ChoiMatrix& target,
    double concentration = std::numeric_limits<double>::infinity(), const SaConfig& cfg = {},
    FrameBinghamConfig chain = {});

// Matrix Fisher on V_N(C^n) with F = kappa S and E[X] = m S; returns kappa.
Estimate<double> estimate_stiefel_fisher_scale(RngStream& rng, const MatrixXcd& s, double m,
                                               const SaConfig& cfg = {}, ChainConfig chain = {});

// Spectral spread of a gauge-projected frame parameter.
double frame_theta_spread(const MatrixXcd& theta, int dim);

}  // namespace qstiefel
