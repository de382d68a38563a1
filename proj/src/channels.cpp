#include "qstiefel/channels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qstiefel {

namespace {

MatrixXcd scalar_param(double v) { return MatrixXcd::Constant(1, 1, Complex(v, 0.0)); }

PauliTransferMatrix rotation_ptm(const MatrixXd& r) {
  MatrixXd m = MatrixXd::Identity(4, 4);
  m.bottomRightCorner(3, 3) = r;
  return PauliTransferMatrix(m);
}

}  // namespace

std::string to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::dephasing_vonmises: return "dephasing-vonmises";
    case DistributionKind::unitary_fisher: return "unitary-fisher";
    case DistributionKind::su_bingham: return "su-bingham";
    case DistributionKind::cptp_frame_bingham: return "cptp-frame-bingham";
    case DistributionKind::cptp_fisher_approx: return "cptp-fisher-approx";
    case DistributionKind::mixed_state_bingham: return "mixed-state-bingham";
    case DistributionKind::pure_state_vmf: return "pure-state-vmf";
    case DistributionKind::ad_gamma_family: return "ad-gamma-family";
  }
  return "unknown";
}

bool is_exact(DistributionKind k) {
  return k != DistributionKind::cptp_fisher_approx && k != DistributionKind::ad_gamma_family;
}

// --- named channels ------------------------------------------------------

PauliTransferMatrix dephasing_ptm(Complex alpha_sq) {
  require(std::abs(std::abs(alpha_sq) - 1.0) <= 1e-12, "dephasing_ptm: |alpha^2| must be 1");
  MatrixXd r = MatrixXd::Identity(4, 4);
  r(1, 1) = alpha_sq.real();
  r(1, 2) = alpha_sq.imag();
  r(2, 1) = -alpha_sq.imag();
  r(2, 2) = alpha_sq.real();
  return PauliTransferMatrix(r);
}

namespace {
void check_pauli_probs(double px, double py, double pz) {
  require(px >= 0.0 && py >= 0.0 && pz >= 0.0 && px <= 1.0 && py <= 1.0 && pz <= 1.0,
          "Pauli probabilities must lie in [0, 1]");
  require(px + py + pz <= 1.0 + 1e-15, "Pauli probabilities must sum to at most 1");
}
}  // namespace

ChoiMatrix depolarizing_choi(double px, double py, double pz) {
  check_pauli_probs(px, py, pz);
  const double w[4] = {std::max(0.0, 1.0 - px - py - pz), px, py, pz};
  MatrixXcd lam = MatrixXcd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    VectorXcd v = vectorize(pauli(i));
    lam += w[i] * v * v.adjoint();
  }
  return ChoiMatrix(lam);
}

MatrixXd depolarizing_affine(double px, double py, double pz) {
  check_pauli_probs(px, py, pz);
  return Eigen::Vector3d(1 - 2 * (py + pz), 1 - 2 * (px + pz), 1 - 2 * (px + py)).asDiagonal();
}

KrausSet amplitude_damping(double gamma) {
  require(gamma >= 0.0 && gamma <= 1.0, "amplitude_damping: gamma must lie in [0, 1]");
  MatrixXcd a1 = MatrixXcd::Zero(2, 2), a2 = MatrixXcd::Zero(2, 2);
  a1(0, 0) = 1.0;
  a1(1, 1) = std::sqrt(1.0 - gamma);
  a2(0, 1) = std::sqrt(gamma);
  return KrausSet({a1, a2});
}

PauliTransferMatrix composite_nonunital(double gamma, double px, double py, double pz) {
  MatrixXd depol = MatrixXd::Identity(4, 4);
  depol.bottomRightCorner(3, 3) = depolarizing_affine(px, py, pz);
  const MatrixXd ad = liouville_to_ptm(kraus_to_liouville(amplitude_damping(gamma))).mat();
  return PauliTransferMatrix(depol * ad);
}

// --- states --------------------------------------------------------------

PureStateVmf::PureStateVmf(const VectorXd& target_bloch)
    : target_(target_bloch), params_([&] {
        require(target_bloch.size() == 3,
                "PureStateVmf: only qubits are supported (Bloch vectors in R^3)");
        require(target_bloch.norm() < 1.0, "PureStateVmf: target Bloch vector must have norm < 1");
        return vmf_estimate(target_bloch);
      }()) {}

DensityOperator PureStateVmf::operator()(RngStream& rng) const {
  VectorXd b = vmf_sample(rng, params_);
  b /= b.norm();
  return bloch_to_state(BlochVector(b));
}

DistributionRecord PureStateVmf::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::pure_state_vmf;
  r.dim = 2;
  r.params = {{"mu", params_.mu().cast<Complex>()}, {"kappa", scalar_param(params_.kappa())}};
  r.target_repr = "bloch";
  r.target = target_.cast<Complex>();
  return r;
}

DensityOperator sample_pure_state(RngStream& rng, const VectorXd& target_mean_bloch) {
  return PureStateVmf(target_mean_bloch)(rng);
}

MixedStateBingham::MixedStateBingham(MatrixXcd target, int k, EstimateDiagnostics diag,
                                     MatrixBinghamParams<Complex> params)
    : target_(std::move(target)),
      k_(k),
      diag_(std::move(diag)),
      sampler_(std::make_unique<MatrixBinghamSampler<Complex>>(std::move(params))) {}

MixedStateBingham MixedStateBingham::fit(RngStream& rng, const DensityOperator& target, int k,
                                         const SaConfig& cfg) {
  const int n = target.dim();
  require(k >= 1 && k <= n, "MixedStateBingham: rank k must lie in [1, N]");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(target.mat(), Eigen::EigenvaluesOnly);
  require(k == n || es.eigenvalues()(n - 1) < 1.0 / k,
          "MixedStateBingham: target eigenvalues must be below 1/k for rank-k draws");
  auto e = estimate_bingham_params<Complex>(rng, MatrixXcd(static_cast<double>(k) * target.mat()),
                                            k, cfg);
  return MixedStateBingham(target.mat(), k, e.diag, e.params);
}

DensityOperator MixedStateBingham::operator()(RngStream& rng) {
  MatrixXcd x = (*sampler_)(rng).X;
  return DensityOperator(hermitian_part(MatrixXcd(x * x.adjoint() / static_cast<double>(k_))));
}

DistributionRecord MixedStateBingham::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::mixed_state_bingham;
  r.dim = static_cast<int>(target_.rows());
  r.params = {{"A", sampler_->params().a()}, {"k", scalar_param(k_)}};
  r.target_repr = "density";
  r.target = target_;
  r.fit = diag_;
  return r;
}

DensityOperator sample_mixed_state(RngStream& rng, const DensityOperator& target_rho, int k) {
  return MixedStateBingham::fit(rng, target_rho, k)(rng);
}

// --- unitary channels ----------------------------------------------------

DephasingVonMises::DephasingVonMises(Complex mean_alpha_sq)
    : target_(mean_alpha_sq), kappa_(0.0), mean_angle_(0.0) {
  const double r = std::abs(mean_alpha_sq);
  require(std::isfinite(r) && r <= 1.0 + 1e-15, "DephasingVonMises: |E[alpha^2]| must be at most 1");
  mean_angle_ = r > 0.0 ? std::arg(mean_alpha_sq) : 0.0;
  kappa_ = r >= 1.0 - 1e-15 ? std::numeric_limits<double>::infinity()
                            : vmf_kappa_from_resultant(2, r);
}

double DephasingVonMises::sample_angle(RngStream& rng) const {
  if (std::isinf(kappa_)) return mean_angle_;
  const VectorXd mu = Eigen::Vector2d(std::cos(mean_angle_), std::sin(mean_angle_));
  const VectorXd x = vmf_sample(rng, VmfParams(mu, kappa_));
  return std::atan2(x(1), x(0));
}

PauliTransferMatrix DephasingVonMises::operator()(RngStream& rng) const {
  return dephasing_ptm(std::polar(1.0, sample_angle(rng)));
}

DistributionRecord DephasingVonMises::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::dephasing_vonmises;
  r.dim = 2;
  r.params = {{"kappa", scalar_param(kappa_)}, {"mean_angle", scalar_param(mean_angle_)}};
  r.target_repr = "mean_alpha_sq";
  r.target = MatrixXcd::Constant(1, 1, target_);
  return r;
}

PauliTransferMatrix sample_dephasing(RngStream& rng, Complex mean_alpha_sq) {
  return DephasingVonMises(mean_alpha_sq)(rng);
}

UnitaryFisher::UnitaryFisher(MatrixXd target, EstimateDiagnostics diag,
                             MatrixFisherParams<double> params, ChainConfig chain)
    : target_(std::move(target)), diag_(std::move(diag)), sampler_(std::move(params), chain) {}

UnitaryFisher UnitaryFisher::fit(RngStream& rng, const MatrixXd& target_affine, const SaConfig& cfg,
                                 ChainConfig chain) {
  require(target_affine.rows() == 3 && target_affine.cols() == 3,
          "UnitaryFisher: target must be the 3 x 3 block of a qubit PTM");
  auto e = estimate_rotation_fisher_params(rng, target_affine, cfg);
  return UnitaryFisher(target_affine, e.diag, e.params, chain);
}

PauliTransferMatrix UnitaryFisher::operator()(RngStream& rng) {
  return rotation_ptm(sampler_(rng));
}

DistributionRecord UnitaryFisher::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::unitary_fisher;
  r.dim = 2;
  r.params = {{"F", sampler_.params().f().cast<Complex>()}};
  r.target_repr = "affine";
  r.target = target_.cast<Complex>();
  r.fit = diag_;
  return r;
}

PauliTransferMatrix sample_unitary_channel(RngStream& rng, const MatrixXd& target_affine) {
  return UnitaryFisher::fit(rng, target_affine)(rng);
}

MatrixXcd complete_special_unitary(const MatrixXcd& x) {
  const Eigen::Index n = x.rows();
  require(x.cols() == n - 1, "complete_special_unitary: expected N - 1 columns");
  require(orthonormality_defect(x) <= 1e-10, "complete_special_unitary: columns must be orthonormal");
  MatrixXcd u(n, n);
  u.leftCols(n - 1) = x;
  u.col(n - 1) = complement_basis<Complex>(x, n).col(0);
  const Complex d = u.determinant();
  u.col(n - 1) *= std::conj(d) / std::abs(d);
  return u;
}

SuBingham::SuBingham(const MatrixBinghamParams<Complex>& params, BinghamConfig cfg)
    : sampler_(params, cfg) {
  require(params.k() == params.n() - 1, "SuBingham: parameters must live on V_{N-1}(C^N)");
}

MatrixXcd SuBingham::operator()(RngStream& rng) { return complete_special_unitary(sampler_(rng).X); }

DistributionRecord SuBingham::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::su_bingham;
  r.dim = static_cast<int>(sampler_.params().n());
  r.params = {{"A", sampler_.params().a()}};
  r.target_repr = "none";
  return r;
}

MatrixXcd sample_su_bingham(RngStream& rng, const MatrixBinghamParams<Complex>& params) {
  return SuBingham(params)(rng);
}

// --- general CPTP maps ---------------------------------------------------

CptpFrameBingham::CptpFrameBingham(ChoiMatrix target, EstimateDiagnostics diag,
                                   std::optional<RepresentabilityVerdict> verdict,
                                   FrameBinghamParams params, FrameBinghamConfig chain)
    : target_(std::move(target)),
      diag_(std::move(diag)),
      verdict_(std::move(verdict)),
      sampler_(std::move(params), chain) {}

CptpFrameBingham CptpFrameBingham::fit(RngStream& rng, const ChoiMatrix& target,
                                       double concentration, const SaConfig& cfg,
                                       FrameBinghamConfig chain) {
  std::optional<RepresentabilityVerdict> verdict;
  if (target.dim() == 2) {
    verdict = classify_extreme_qubit(target);
    if (verdict->verdict == Extremality::extreme)
      throw ExtremePointTarget("target channel is an extreme point of the CPTP set (rule " +
                               to_string(verdict->reason) +
                               "), so no nontrivial random CPTP map averages to it");
  }
  auto e = frame_bingham_params_from_choi(rng, target, concentration, cfg, chain);
  return CptpFrameBingham(target, e.diag, std::move(verdict), e.params, chain);
}

ChoiMatrix CptpFrameBingham::operator()(RngStream& rng) { return frame_to_choi(sampler_(rng)); }

DistributionRecord CptpFrameBingham::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::cptp_frame_bingham;
  r.dim = target_.dim();
  const auto& pinned = sampler_.params().pinned();
  MatrixXcd pins(static_cast<Eigen::Index>(pinned.size()), 1);
  for (std::size_t i = 0; i < pinned.size(); ++i) pins(static_cast<Eigen::Index>(i), 0) = pinned[i];
  r.params = {{"Theta", sampler_.params().theta()}, {"pinned", pins}};
  r.target_repr = "choi";
  r.target = target_.mat();
  r.fit = diag_;
  r.verdict = verdict_;
  return r;
}

ChoiMatrix sample_cptp(RngStream& rng, const ChoiMatrix& target_choi, double concentration) {
  return CptpFrameBingham::fit(rng, target_choi, concentration)(rng);
}

CptpFisherApprox::CptpFisherApprox(StiefelForm target, double epsilon, double kappa,
                                   EstimateDiagnostics diag, ChainConfig chain)
    : target_(std::move(target)),
      epsilon_(epsilon),
      kappa_(kappa),
      diag_(std::move(diag)),
      sampler_(MatrixFisherParams<Complex>(kappa * target_.mat()), chain) {}

CptpFisherApprox CptpFisherApprox::fit(RngStream& rng, const StiefelForm& target, double epsilon,
                                       const SaConfig& cfg, ChainConfig chain,
                                       int provenance_draws) {
  require(epsilon > 0.0 && epsilon < 1.0, "CptpFisherApprox: epsilon must lie in (0, 1)");
  require(provenance_draws >= 1, "CptpFisherApprox: provenance_draws must be positive");
  auto e = estimate_stiefel_fisher_scale(rng, target.mat(), 1.0 - epsilon, cfg, chain);
  CptpFisherApprox out(target, epsilon, e.params, e.diag, chain);
  const ChoiMatrix target_choi = to_choi(AnyChannel{target});
  MatrixXcd mean = MatrixXcd::Zero(target_choi.mat().rows(), target_choi.mat().cols());
  for (int i = 0; i < provenance_draws; ++i) mean += out(rng).mat();
  mean /= static_cast<double>(provenance_draws);
  out.approx_.achieved_mean_choi = hermitian_part(mean);
  out.approx_.proxy_distance = channel_distance(ChoiMatrix(out.approx_.achieved_mean_choi), target_choi);
  out.approx_.draws = provenance_draws;
  return out;
}

StiefelForm CptpFisherApprox::sample_stiefel(RngStream& rng) {
  return StiefelForm(sampler_(rng), target_.dim());
}

ChoiMatrix CptpFisherApprox::operator()(RngStream& rng) {
  return to_choi(AnyChannel{sample_stiefel(rng)});
}

DistributionRecord CptpFisherApprox::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::cptp_fisher_approx;
  r.dim = target_.dim();
  r.params = {{"F", sampler_.params().f()},
              {"kappa", scalar_param(kappa_)},
              {"epsilon", scalar_param(epsilon_)}};
  r.target_repr = "stiefel";
  r.target = target_.mat();
  r.fit = diag_;
  r.approximation = approx_;
  return r;
}

ChoiMatrix sample_cptp_fisher_approx(RngStream& rng, const StiefelForm& target_stiefel,
                                     double epsilon) {
  return CptpFisherApprox::fit(rng, target_stiefel, epsilon)(rng);
}

AdGamma::AdGamma(double target_gamma, double concentration)
    : gamma_(target_gamma), concentration_(concentration) {
  require(target_gamma > 0.0 && target_gamma < 1.0, "AdGamma: target gamma must lie in (0, 1)");
  require(concentration > 0.0, "AdGamma: concentration must be positive");
  // E[sqrt(1 - gamma)] with 1 - gamma ~ Beta(b, a).
  double root = std::sqrt(1.0 - gamma_);
  if (std::isfinite(concentration_)) {
    const double a = concentration_ * gamma_, b = concentration_ * (1.0 - gamma_);
    root = std::exp(std::lgamma(b + 0.5) + std::lgamma(a + b) - std::lgamma(b) -
                    std::lgamma(a + b + 0.5));
  }
  MatrixXcd mean = MatrixXcd::Zero(4, 4);
  mean(0, 0) = 1.0;
  mean(0, 3) = mean(3, 0) = root;
  mean(2, 2) = gamma_;
  mean(3, 3) = 1.0 - gamma_;
  approx_.achieved_mean_choi = mean;
  approx_.proxy_distance = channel_distance(ChoiMatrix(mean), kraus_to_choi(amplitude_damping(gamma_)));
  approx_.draws = 0;
}

double AdGamma::sample_gamma(RngStream& rng) const {
  if (!std::isfinite(concentration_)) return gamma_;
  return rng.beta(concentration_ * gamma_, concentration_ * (1.0 - gamma_));
}

ChoiMatrix AdGamma::operator()(RngStream& rng) const {
  return kraus_to_choi(amplitude_damping(sample_gamma(rng)));
}

DistributionRecord AdGamma::record() const {
  DistributionRecord r;
  r.kind = DistributionKind::ad_gamma_family;
  r.dim = 2;
  r.params = {{"target_gamma", scalar_param(gamma_)}, {"concentration", scalar_param(concentration_)}};
  r.target_repr = "choi";
  r.target = kraus_to_choi(amplitude_damping(gamma_)).mat();
  r.approximation = approx_;
  return r;
}

ChoiMatrix sample_ad_gamma(RngStream& rng, double target_gamma, double concentration) {
  return AdGamma(target_gamma, concentration)(rng);
}

}  // namespace qstiefel
