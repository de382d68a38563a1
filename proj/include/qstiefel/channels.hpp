#pragma once

// Distributions over quantum states and channels whose average is a given
// target, built on the exponential families in expfam.hpp, plus the named
// qubit channels used in the experiments.
//
// Each distribution is fitted once (the expensive step for the Monte Carlo
// matched kinds) and then sampled repeatedly. Samplers driven by a Markov
// chain keep their chain state, so operator() is non-const.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qstiefel/estimate.hpp"
#include "qstiefel/geometry.hpp"

namespace qstiefel {

enum class DistributionKind {
  dephasing_vonmises,
  unitary_fisher,
  su_bingham,
  cptp_frame_bingham,
  cptp_fisher_approx,
  mixed_state_bingham,
  pure_state_vmf,
  ad_gamma_family,
};

std::string to_string(DistributionKind k);
// False for the kinds whose average is only close to the target.
bool is_exact(DistributionKind k);

// --- named channels ------------------------------------------------------

// U = diag(alpha, conj(alpha)) with |alpha| = 1, as a PTM in terms of alpha^2.
PauliTransferMatrix dephasing_ptm(Complex alpha_sq);
// Pauli channel (1 - sum p) rho + p_x X rho X + p_y Y rho Y + p_z Z rho Z.
ChoiMatrix depolarizing_choi(double px, double py, double pz);
// The contraction diag(1 - 2(p_y + p_z), 1 - 2(p_x + p_z), 1 - 2(p_x + p_y)).
MatrixXd depolarizing_affine(double px, double py, double pz);
KrausSet amplitude_damping(double gamma);
// Amplitude damping followed by the depolarizing channel.
PauliTransferMatrix composite_nonunital(double gamma, double px, double py, double pz);

// --- records -------------------------------------------------------------

// Measured behaviour of an approximate kind.
struct ApproximationRecord {
  MatrixXcd achieved_mean_choi;
  double proxy_distance = 0.0;
  long long draws = 0;
};

// Serializable description of a fitted distribution.
struct DistributionRecord {
  DistributionKind kind = DistributionKind::pure_state_vmf;
  int dim = 2;
  std::vector<std::pair<std::string, MatrixXcd>> params;
  std::string target_repr;
  MatrixXcd target;
  std::optional<EstimateDiagnostics> fit;
  std::optional<RepresentabilityVerdict> verdict;
  std::optional<ApproximationRecord> approximation;
};

// --- states --------------------------------------------------------------

// Pure qubit states whose Bloch vectors are vMF on S^2 with the given mean.
class PureStateVmf {
 public:
  explicit PureStateVmf(const VectorXd& target_bloch);
  DensityOperator operator()(RngStream& rng) const;
  const VmfParams& params() const { return params_; }
  DistributionRecord record() const;

 private:
  VectorXd target_;
  VmfParams params_;
};

DensityOperator sample_pure_state(RngStream& rng, const VectorXd& target_mean_bloch);

// rho = X X^dagger / k with X complex Bingham on V_k(C^N), matched so that
// E[rho] = target.
class MixedStateBingham {
 public:
  static MixedStateBingham fit(RngStream& rng, const DensityOperator& target, int k,
                               const SaConfig& cfg = {});
  DensityOperator operator()(RngStream& rng);
  const MatrixBinghamParams<Complex>& params() const { return sampler_->params(); }
  DistributionRecord record() const;

 private:
  MixedStateBingham(MatrixXcd target, int k, EstimateDiagnostics diag,
                    MatrixBinghamParams<Complex> params);
  MatrixXcd target_;
  int k_;
  EstimateDiagnostics diag_;
  std::unique_ptr<MatrixBinghamSampler<Complex>> sampler_;
};

DensityOperator sample_mixed_state(RngStream& rng, const DensityOperator& target_rho, int k);

// --- unitary channels ----------------------------------------------------

// Dephasing by diag(alpha, conj(alpha)): the angle of alpha^2 is von Mises
// with E[alpha^2] = mean_alpha_sq. |mean| = 1 is the deterministic limit.
class DephasingVonMises {
 public:
  explicit DephasingVonMises(Complex mean_alpha_sq);
  // Angle of alpha^2 in (-pi, pi].
  double sample_angle(RngStream& rng) const;
  PauliTransferMatrix operator()(RngStream& rng) const;
  double kappa() const { return kappa_; }
  double mean_angle() const { return mean_angle_; }
  DistributionRecord record() const;

 private:
  Complex target_;
  double kappa_;
  double mean_angle_;
};

PauliTransferMatrix sample_dephasing(RngStream& rng, Complex mean_alpha_sq);

// Unital qubit channels phi -> R phi with R matrix Fisher on SO(3) and
// E[R] = target.
class UnitaryFisher {
 public:
  static UnitaryFisher fit(RngStream& rng, const MatrixXd& target_affine,
                           const SaConfig& cfg = {}, ChainConfig chain = {});
  MatrixXd sample_rotation(RngStream& rng) { return sampler_(rng); }
  PauliTransferMatrix operator()(RngStream& rng);
  const MatrixFisherParams<double>& params() const { return sampler_.params(); }
  DistributionRecord record() const;

 private:
  UnitaryFisher(MatrixXd target, EstimateDiagnostics diag, MatrixFisherParams<double> params,
                ChainConfig chain);
  MatrixXd target_;
  EstimateDiagnostics diag_;
  MatrixFisherSampler<double> sampler_;
};

PauliTransferMatrix sample_unitary_channel(RngStream& rng, const MatrixXd& target_affine);

// Appends the unit vector orthogonal to the N - 1 columns of x that makes
// the determinant one.
MatrixXcd complete_special_unitary(const MatrixXcd& x);

// SU(N) elements whose first N - 1 columns are complex Bingham on V_{N-1}(C^N).
class SuBingham {
 public:
  explicit SuBingham(const MatrixBinghamParams<Complex>& params, BinghamConfig cfg = {});
  MatrixXcd operator()(RngStream& rng);
  DistributionRecord record() const;

 private:
  MatrixBinghamSampler<Complex> sampler_;
};

MatrixXcd sample_su_bingham(RngStream& rng, const MatrixBinghamParams<Complex>& params);

// --- general CPTP maps ---------------------------------------------------

// Frame-Bingham distribution matched to a target Choi matrix. Extreme
// qubit targets are refused with ExtremePointTarget.
class CptpFrameBingham {
 public:
  static CptpFrameBingham fit(RngStream& rng, const ChoiMatrix& target,
                              double concentration = std::numeric_limits<double>::infinity(),
                              const SaConfig& cfg = {}, FrameBinghamConfig chain = {});
  FrameForm sample_frame(RngStream& rng) { return sampler_(rng); }
  ChoiMatrix operator()(RngStream& rng);
  const FrameBinghamParams& params() const { return sampler_.params(); }
  const EstimateDiagnostics& diagnostics() const { return diag_; }
  const SamplerDiagnostics& sampler_diagnostics() const { return sampler_.diagnostics(); }
  DistributionRecord record() const;

 private:
  CptpFrameBingham(ChoiMatrix target, EstimateDiagnostics diag,
                   std::optional<RepresentabilityVerdict> verdict, FrameBinghamParams params,
                   FrameBinghamConfig chain);
  ChoiMatrix target_;
  EstimateDiagnostics diag_;
  std::optional<RepresentabilityVerdict> verdict_;
  FrameBinghamSampler sampler_;
};

ChoiMatrix sample_cptp(RngStream& rng, const ChoiMatrix& target_choi,
                       double concentration = std::numeric_limits<double>::infinity());

// Complex matrix Fisher on the Stiefel form with E[X] = (1 - eps) S. The
// average channel is close to, but not equal to, the target; the record
// carries the measured mean and its distance to the target.
class CptpFisherApprox {
 public:
  static CptpFisherApprox fit(RngStream& rng, const StiefelForm& target, double epsilon,
                              const SaConfig& cfg = {}, ChainConfig chain = {},
                              int provenance_draws = 2000);
  StiefelForm sample_stiefel(RngStream& rng);
  ChoiMatrix operator()(RngStream& rng);
  double kappa() const { return kappa_; }
  const ApproximationRecord& approximation() const { return approx_; }
  DistributionRecord record() const;

 private:
  CptpFisherApprox(StiefelForm target, double epsilon, double kappa, EstimateDiagnostics diag,
                   ChainConfig chain);
  StiefelForm target_;
  double epsilon_;
  double kappa_;
  EstimateDiagnostics diag_;
  MatrixFisherSampler<Complex> sampler_;
  ApproximationRecord approx_;
};

ChoiMatrix sample_cptp_fisher_approx(RngStream& rng, const StiefelForm& target_stiefel,
                                     double epsilon);

// Amplitude damping with gamma ~ Beta(c g, c (1 - g)), g = target_gamma and
// c = concentration; c = infinity gives gamma = g. The average channel has
// E[sqrt(1 - gamma)] < sqrt(1 - g) in place of sqrt(1 - g), computed exactly.
class AdGamma {
 public:
  AdGamma(double target_gamma, double concentration);
  double sample_gamma(RngStream& rng) const;
  ChoiMatrix operator()(RngStream& rng) const;
  const ApproximationRecord& approximation() const { return approx_; }
  DistributionRecord record() const;

 private:
  double gamma_;
  double concentration_;
  ApproximationRecord approx_;
};

ChoiMatrix sample_ad_gamma(RngStream& rng, double target_gamma, double concentration);

}  // namespace qstiefel
