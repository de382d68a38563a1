#include "qstiefel/geometry.hpp"

#include <Eigen/Geometry>

#include "qstiefel/expfam.hpp"

namespace qstiefel {

namespace {

constexpr double kWitnessTol = 1e-10;

bool witness_ok(const std::vector<WeightedChannel>& parts, const ChoiMatrix& target) {
  if (parts.size() < 2) return false;
  MatrixXcd sum = MatrixXcd::Zero(target.mat().rows(), target.mat().cols());
  double wsum = 0.0;
  for (const auto& p : parts) {
    if (!(p.weight > 0.0)) return false;
    sum += p.weight * p.choi.mat();
    wsum += p.weight;
  }
  if (std::abs(wsum - 1.0) > kWitnessTol) return false;
  if ((sum - target.mat()).cwiseAbs().maxCoeff() > kWitnessTol) return false;
  // Nontrivial: some component differs from the target.
  for (const auto& p : parts)
    if ((p.choi.mat() - target.mat()).norm() > 1e-8) return true;
  return false;
}

// Unital qubit channel: A = U diag(d) V^T with U, V in SO(3) and d in the
// tetrahedron spanned by the Pauli sign patterns, so the channel mixes the
// unitaries U_rot sigma_i V_rot with barycentric weights.
std::vector<WeightedChannel> pauli_mixture(const ChoiMatrix& c) {
  AffineForm aff = ptm_to_affine(liouville_to_ptm(choi_to_liouville(c)));
  SignedSvd svd = sign_preserving_svd(aff.A);
  const VectorXd& d = svd.s;
  const double w[4] = {(1 + d(0) + d(1) + d(2)) / 4, (1 + d(0) - d(1) - d(2)) / 4,
                       (1 - d(0) + d(1) - d(2)) / 4, (1 - d(0) - d(1) + d(2)) / 4};
  const MatrixXcd left = su2_from_rotation(svd.U);
  const MatrixXcd right = su2_from_rotation(svd.V.transpose());
  std::vector<WeightedChannel> parts;
  for (int i = 0; i < 4; ++i) {
    if (w[i] <= kWitnessTol) continue;
    MatrixXcd u = left * pauli(i) * right;
    parts.push_back({w[i], kraus_to_choi(KrausSet({u}))});
  }
  // Fold tiny dropped weights back so the total is exactly one.
  double total = 0.0;
  for (const auto& p : parts) total += p.weight;
  for (auto& p : parts) p.weight /= total;
  return parts;
}

// Positive definite Lambda: Lambda = t (1/N) + (1 - t) Lambda' with Lambda'
// still CPTP for t = N lambda_min / 2.
std::vector<WeightedChannel> interior_mixture(const ChoiMatrix& c) {
  const int n = c.dim();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(c.mat());
  const double t = n * es.eigenvalues()(0) / 2.0;
  const Eigen::Index nn = c.mat().rows();
  MatrixXcd mixer = MatrixXcd::Identity(nn, nn) / static_cast<double>(n);
  MatrixXcd rest = (c.mat() - t * mixer) / (1.0 - t);
  return {{t, ChoiMatrix(mixer)}, {1.0 - t, ChoiMatrix(hermitian_part(rest))}};
}

}  // namespace

std::string to_string(Extremality e) {
  switch (e) {
    case Extremality::extreme: return "extreme";
    case Extremality::not_extreme: return "not-extreme";
    case Extremality::unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(VerdictRule r) {
  switch (r) {
    case VerdictRule::rank_one: return "rank-one";
    case VerdictRule::two_kraus_non_unital: return "two-kraus-non-unital";
    case VerdictRule::unital_pauli_mixture: return "unital-pauli-mixture";
    case VerdictRule::full_rank_interior: return "full-rank-interior";
    case VerdictRule::undetermined: return "undetermined";
  }
  return "undetermined";
}

int minimal_kraus_rank(const ChoiMatrix& c) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(c.mat(), Eigen::EigenvaluesOnly);
  const double cutoff = kRankTolPerDim * c.dim();
  return static_cast<int>((es.eigenvalues().array() > cutoff).count());
}

MatrixXcd su2_from_rotation(const MatrixXd& r) {
  require(r.rows() == 3 && r.cols() == 3, "su2_from_rotation: expected a 3 x 3 matrix");
  require(orthonormality_defect(r) < 1e-8 && r.determinant() > 0.0,
          "su2_from_rotation: matrix is not a rotation");
  Eigen::Matrix3d m = r;
  Eigen::Quaterniond q(m);
  q.normalize();
  // exp(-i theta n.sigma / 2) rotates Bloch vectors by theta about n.
  const Complex i(0.0, 1.0);
  return q.w() * pauli(0) - i * (q.x() * pauli(1) + q.y() * pauli(2) + q.z() * pauli(3));
}

RepresentabilityVerdict classify_extreme_qubit(const ChoiMatrix& c) {
  require(c.dim() == 2, "classify_extreme_qubit: only single-qubit channels are classified");
  RepresentabilityVerdict v;
  v.kraus_rank = minimal_kraus_rank(c);
  v.unital = is_unital(c);
  if (v.kraus_rank == 1) {
    v.verdict = Extremality::extreme;
    v.reason = VerdictRule::rank_one;
    return v;
  }
  if (v.kraus_rank == 2 && !v.unital) {
    v.verdict = Extremality::extreme;
    v.reason = VerdictRule::two_kraus_non_unital;
    return v;
  }
  if (v.unital) {
    auto parts = pauli_mixture(c);
    if (witness_ok(parts, c)) {
      v.verdict = Extremality::not_extreme;
      v.reason = VerdictRule::unital_pauli_mixture;
      v.decomposition = std::move(parts);
      return v;
    }
  }
  if (v.kraus_rank == 4) {
    auto parts = interior_mixture(c);
    if (witness_ok(parts, c)) {
      v.verdict = Extremality::not_extreme;
      v.reason = VerdictRule::full_rank_interior;
      v.decomposition = std::move(parts);
      return v;
    }
  }
  return v;
}

std::optional<bool> is_representable_as_average(const ChoiMatrix& c) {
  const auto v = classify_extreme_qubit(c);
  if (v.verdict == Extremality::unknown) return std::nullopt;
  return v.verdict == Extremality::not_extreme;
}

}  // namespace qstiefel
