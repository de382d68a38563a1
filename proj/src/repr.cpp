#include "qstiefel/repr.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qstiefel {

namespace {

int isqrt_exact(Eigen::Index n) {
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return (static_cast<Eigen::Index>(r) * r == n) ? r : -1;
}

double hermitian_defect(const MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const MatrixXcd& m) {
  MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Tr_2: trace over the inner (row) index of the column-stacked vec.
MatrixXcd partial_trace_inner(const MatrixXcd& choi, int n) {
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (int c = 0; c < n; ++c)
    for (int cp = 0; cp < n; ++cp)
      for (int a = 0; a < n; ++a) out(c, cp) += choi(a + n * c, a + n * cp);
  return out;
}

// Tr_1: sum over the outer (column) index; equals Phi(1).
MatrixXcd partial_trace_outer(const MatrixXcd& choi, int n) {
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int ap = 0; ap < n; ++ap)
      for (int c = 0; c < n; ++c) out(a, ap) += choi(a + n * c, ap + n * c);
  return out;
}

MatrixXcd pauli_basis_change() {
  MatrixXcd t(4, 4);
  for (int i = 0; i < 4; ++i) t.col(i) = vectorize(pauli(i)) / std::sqrt(2.0);
  return t;
}

}  // namespace

// --- types ---------------------------------------------------------------

Validation DensityOperator::validate(const MatrixXcd& mat, double tol) {
  Validation v;
  if (mat.rows() != mat.cols() || mat.rows() == 0) {
    v.record(1.0, 0.0, "density operator must be square and nonempty");
    return v;
  }
  v.record(hermitian_defect(mat), tol, "not Hermitian");
  v.record(-min_eigenvalue(mat), tol, "not positive semi-definite");
  v.record(std::abs(mat.trace() - 1.0), tol, "trace is not one");
  return v;
}

DensityOperator::DensityOperator(MatrixXcd mat, double tol) : mat_(std::move(mat)) {
  Validation v = validate(mat_, tol);
  require(v.ok, "DensityOperator: " + v.what + " (violation " + std::to_string(v.worst) + ")");
}

BlochVector::BlochVector(VectorXd vec, double tol) : vec_(std::move(vec)) {
  require(vec_.norm() <= 1.0 + tol, "BlochVector: norm exceeds one");
}

Validation KrausSet::validate(const std::vector<MatrixXcd>& ops, double tol) {
  Validation v;
  if (ops.empty()) {
    v.record(1.0, 0.0, "empty Kraus set");
    return v;
  }
  const Eigen::Index n = ops.front().rows();
  MatrixXcd acc = MatrixXcd::Zero(n, n);
  for (const auto& a : ops) {
    if (a.rows() != n || a.cols() != n) {
      v.record(1.0, 0.0, "Kraus operators must share one square shape");
      return v;
    }
    acc += a.adjoint() * a;
  }
  v.record((acc - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), tol,
           "not trace preserving");
  return v;
}

KrausSet::KrausSet(std::vector<MatrixXcd> ops, double tol) : ops_(std::move(ops)) {
  Validation v = validate(ops_, tol);
  require(v.ok, "KrausSet: " + v.what + " (violation " + std::to_string(v.worst) + ")");
  dim_ = static_cast<int>(ops_.front().rows());
}

Validation ChoiMatrix::validate(const MatrixXcd& mat, double tol) {
  Validation v;
  const int n = isqrt_exact(mat.rows());
  if (mat.rows() != mat.cols() || n <= 0) {
    v.record(1.0, 0.0, "Choi matrix must be N^2 x N^2");
    return v;
  }
  v.record(hermitian_defect(mat), tol, "not Hermitian");
  v.record(-min_eigenvalue(mat), tol, "not positive semi-definite");
  v.record((partial_trace_inner(mat, n) - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), tol,
           "partial trace is not the identity");
  return v;
}

ChoiMatrix::ChoiMatrix(MatrixXcd mat, double tol) : mat_(std::move(mat)) {
  Validation v = validate(mat_, tol);
  require(v.ok, "ChoiMatrix: " + v.what + " (violation " + std::to_string(v.worst) + ")");
  dim_ = isqrt_exact(mat_.rows());
}

Liouvillian::Liouvillian(MatrixXcd mat, double tol) : mat_(std::move(mat)) {
  dim_ = isqrt_exact(mat_.rows());
  require(mat_.rows() == mat_.cols() && dim_ > 0, "Liouvillian must be N^2 x N^2");
  Validation v = ChoiMatrix::validate(reshuffle(mat_), tol);
  require(v.ok, "Liouvillian: reshuffled matrix " + v.what);
}

PauliTransferMatrix::PauliTransferMatrix(MatrixXd mat, double tol) : mat_(std::move(mat)) {
  require(mat_.rows() == 4 && mat_.cols() == 4,
          "PauliTransferMatrix: only N = 2 (4 x 4) is supported");
  VectorXd first = VectorXd::Zero(4);
  first(0) = 1.0;
  require((mat_.row(0).transpose() - first).cwiseAbs().maxCoeff() <= tol,
          "PauliTransferMatrix: first row must be (1, 0, 0, 0)");
}

StiefelForm::StiefelForm(MatrixXcd s, int dim, double tol) : dim_(dim), s_(std::move(s)) {
  require(dim_ > 0 && s_.cols() == dim_ && s_.rows() % dim_ == 0 && s_.rows() >= dim_,
          "StiefelForm: expected a kN x N matrix");
  double defect = (s_.adjoint() * s_ - MatrixXcd::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
  require(defect <= tol, "StiefelForm: columns are not orthonormal");
}

FrameForm::FrameForm(MatrixXcd xi, int dim, double tol) : dim_(dim), xi_(std::move(xi)) {
  require(dim_ > 0 && xi_.cols() == dim_ && xi_.rows() == dim_ * dim_ * dim_,
          "FrameForm: expected an N^3 x N matrix");
  double defect = (xi_.adjoint() * xi_ - MatrixXcd::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
  require(defect <= tol, "FrameForm: columns are not orthonormal");
}

VectorXcd FrameForm::block(int p) const {
  const int n2 = dim_ * dim_;
  const int a = p % dim_;
  const int c = p / dim_;
  return xi_.block(a * n2, c, n2, 1);
}

std::string to_string(ReprKind kind) {
  switch (kind) {
    case ReprKind::kraus: return "kraus";
    case ReprKind::choi: return "choi";
    case ReprKind::liouville: return "liouville";
    case ReprKind::ptm: return "ptm";
    case ReprKind::stiefel: return "stiefel";
    case ReprKind::frame: return "frame";
  }
  return "unknown";
}

ReprKind repr_kind_from_string(const std::string& name) {
  for (ReprKind k : {ReprKind::kraus, ReprKind::choi, ReprKind::liouville, ReprKind::ptm,
                     ReprKind::stiefel, ReprKind::frame})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown representation '" + name + "'");
}

ReprKind kind_of(const AnyChannel& chan) { return static_cast<ReprKind>(chan.index()); }

// --- vectorization -------------------------------------------------------

VectorXcd vectorize(const MatrixXcd& m) {
  require(m.rows() == m.cols(), "vectorize: matrix must be square");
  return m.reshaped();
}

MatrixXcd devectorize(const VectorXcd& v) {
  const int n = isqrt_exact(v.size());
  require(n > 0, "devectorize: length must be a perfect square");
  return v.reshaped(n, n);
}

MatrixXcd reshuffle(const MatrixXcd& m) {
  const int n = isqrt_exact(m.rows());
  require(m.rows() == m.cols() && n > 0, "reshuffle: dimension must be a perfect square");
  MatrixXcd out(m.rows(), m.cols());
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      for (int ap = 0; ap < n; ++ap)
        for (int cp = 0; cp < n; ++cp) out(a + n * c, ap + n * cp) = m(ap * n + a, cp * n + c);
  return out;
}

// --- conversions ---------------------------------------------------------

ChoiMatrix kraus_to_choi(const KrausSet& k) {
  const int n = k.dim();
  MatrixXcd lam = MatrixXcd::Zero(n * n, n * n);
  for (const auto& a : k.ops()) {
    VectorXcd v = vectorize(a);
    lam.noalias() += v * v.adjoint();
  }
  return ChoiMatrix(std::move(lam));
}

Liouvillian kraus_to_liouville(const KrausSet& k) {
  const int n = k.dim();
  MatrixXcd l = MatrixXcd::Zero(n * n, n * n);
  for (const auto& a : k.ops()) l += Eigen::kroneckerProduct(a.conjugate(), a).eval();
  return Liouvillian(std::move(l));
}

KrausSet choi_to_kraus(const ChoiMatrix& c) {
  const int n = c.dim();
  MatrixXcd h = 0.5 * (c.mat() + c.mat().adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  const double cutoff = kRankTolPerDim * n;
  std::vector<MatrixXcd> ops;
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
    double d = es.eigenvalues()(i);
    if (d <= cutoff) break;
    ops.push_back(devectorize(std::sqrt(d) * es.eigenvectors().col(i)));
  }
  return KrausSet(std::move(ops));
}

Liouvillian choi_to_liouville(const ChoiMatrix& c) { return Liouvillian(reshuffle(c.mat())); }

ChoiMatrix liouville_to_choi(const Liouvillian& l) { return ChoiMatrix(reshuffle(l.mat())); }

PauliTransferMatrix liouville_to_ptm(const Liouvillian& l, double tol) {
  require(l.dim() == 2, "liouville_to_ptm: only N = 2 is supported");
  static const MatrixXcd t = pauli_basis_change();
  MatrixXcd r = t.adjoint() * l.mat() * t;
  require(r.imag().cwiseAbs().maxCoeff() <= tol,
          "liouville_to_ptm: residual imaginary part above tolerance");
  return PauliTransferMatrix(r.real(), tol);
}

Liouvillian ptm_to_liouville(const PauliTransferMatrix& r) {
  static const MatrixXcd t = pauli_basis_change();
  return Liouvillian(t * r.mat().cast<Complex>() * t.adjoint());
}

AffineForm ptm_to_affine(const PauliTransferMatrix& r) {
  return AffineForm{r.mat().bottomRightCorner(3, 3), r.mat().col(0).tail(3)};
}

PauliTransferMatrix affine_to_ptm(const AffineForm& a) {
  require(a.A.rows() == 3 && a.A.cols() == 3 && a.tau.size() == 3,
          "affine_to_ptm: only N = 2 is supported");
  MatrixXd r = MatrixXd::Zero(4, 4);
  r(0, 0) = 1.0;
  r.bottomRightCorner(3, 3) = a.A;
  r.col(0).tail(3) = a.tau;
  return PauliTransferMatrix(std::move(r));
}

StiefelForm kraus_to_stiefel(const KrausSet& k, int pad_to) {
  const int n = k.dim();
  const int m = std::max(k.size(), pad_to);
  MatrixXcd s = MatrixXcd::Zero(static_cast<Eigen::Index>(m) * n, n);
  for (int i = 0; i < k.size(); ++i) s.block(i * n, 0, n, n) = k[i];
  return StiefelForm(std::move(s), n);
}

KrausSet stiefel_to_kraus(const StiefelForm& s) {
  const int n = s.dim();
  std::vector<MatrixXcd> ops;
  for (int i = 0; i < s.kraus_rank(); ++i) ops.push_back(s.mat().block(i * n, 0, n, n));
  return KrausSet(std::move(ops));
}

FrameForm stiefel_to_frame(const StiefelForm& s) {
  const int n = s.dim();
  const int n2 = n * n;
  require(s.kraus_rank() == n2, "stiefel_to_frame: Stiefel form must hold N^2 Kraus operators");
  MatrixXcd xi(static_cast<Eigen::Index>(n2) * n, n);
  for (int k = 0; k < n2; ++k)
    for (int a = 0; a < n; ++a) xi.row(a * n2 + k) = s.mat().row(k * n + a);
  return FrameForm(std::move(xi), n);
}

StiefelForm frame_to_stiefel(const FrameForm& f) {
  const int n = f.dim();
  const int n2 = n * n;
  MatrixXcd s(static_cast<Eigen::Index>(n2) * n, n);
  for (int k = 0; k < n2; ++k)
    for (int a = 0; a < n; ++a) s.row(k * n + a) = f.mat().row(a * n2 + k);
  return StiefelForm(std::move(s), n);
}

ChoiMatrix frame_to_choi(const FrameForm& f) {
  const int n2 = f.dim() * f.dim();
  MatrixXcd blocks(n2, n2);
  for (int p = 0; p < n2; ++p) blocks.col(p) = f.block(p);
  // Lambda_pq = xi_q^dagger xi_p
  MatrixXcd lam = (blocks.adjoint() * blocks).transpose();
  return ChoiMatrix(std::move(lam));
}

ChoiMatrix to_choi(const AnyChannel& chan) {
  return std::visit(
      [](const auto& c) -> ChoiMatrix {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, KrausSet>) return kraus_to_choi(c);
        else if constexpr (std::is_same_v<T, ChoiMatrix>) return c;
        else if constexpr (std::is_same_v<T, Liouvillian>) return liouville_to_choi(c);
        else if constexpr (std::is_same_v<T, PauliTransferMatrix>)
          return liouville_to_choi(ptm_to_liouville(c));
        else if constexpr (std::is_same_v<T, StiefelForm>) return kraus_to_choi(stiefel_to_kraus(c));
        else return frame_to_choi(c);
      },
      chan);
}

KrausSet to_kraus(const AnyChannel& chan) {
  if (const auto* k = std::get_if<KrausSet>(&chan)) return *k;
  if (const auto* s = std::get_if<StiefelForm>(&chan)) return stiefel_to_kraus(*s);
  return choi_to_kraus(to_choi(chan));
}

AnyChannel convert(const AnyChannel& chan, ReprKind target) {
  if (kind_of(chan) == target) return chan;
  switch (target) {
    case ReprKind::kraus: return to_kraus(chan);
    case ReprKind::choi: return to_choi(chan);
    case ReprKind::liouville: return choi_to_liouville(to_choi(chan));
    case ReprKind::ptm: return liouville_to_ptm(choi_to_liouville(to_choi(chan)));
    case ReprKind::stiefel: {
      const KrausSet k = to_kraus(chan);
      return kraus_to_stiefel(k, k.dim() * k.dim());
    }
    case ReprKind::frame: {
      const KrausSet k = to_kraus(chan);
      return stiefel_to_frame(kraus_to_stiefel(k, k.dim() * k.dim()));
    }
  }
  throw InvalidArgument("convert: unknown target representation");
}

// --- action --------------------------------------------------------------

namespace {
void require_dim(int chan_dim, const DensityOperator& rho) {
  require(chan_dim == rho.dim(), "apply_channel: dimension mismatch");
}
}  // namespace

DensityOperator apply_channel(const KrausSet& k, const DensityOperator& rho) {
  require_dim(k.dim(), rho);
  MatrixXcd out = MatrixXcd::Zero(rho.dim(), rho.dim());
  for (const auto& a : k.ops()) out.noalias() += a * rho.mat() * a.adjoint();
  return DensityOperator(std::move(out));
}

MatrixXcd choi_action(const MatrixXcd& choi, const MatrixXcd& x) {
  const auto n = x.rows();
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index ap = 0; ap < n; ++ap)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index cp = 0; cp < n; ++cp)
          out(a, ap) += choi(a + n * c, ap + n * cp) * x(c, cp);
  return out;
}

DensityOperator apply_channel(const ChoiMatrix& c, const DensityOperator& rho) {
  require_dim(c.dim(), rho);
  return DensityOperator(choi_action(c.mat(), rho.mat()));
}

DensityOperator apply_channel(const Liouvillian& l, const DensityOperator& rho) {
  require_dim(l.dim(), rho);
  return DensityOperator(devectorize(l.mat() * vectorize(rho.mat())));
}

DensityOperator apply_channel(const PauliTransferMatrix& r, const DensityOperator& rho) {
  require_dim(2, rho);
  AffineForm a = ptm_to_affine(r);
  VectorXd phi = apply_affine(a, state_to_bloch(rho).vec());
  return bloch_to_state(BlochVector(phi));
}

DensityOperator apply_channel(const StiefelForm& s, const DensityOperator& rho) {
  return apply_channel(stiefel_to_kraus(s), rho);
}

DensityOperator apply_channel(const FrameForm& f, const DensityOperator& rho) {
  return apply_channel(frame_to_stiefel(f), rho);
}

DensityOperator apply_channel(const AnyChannel& chan, const DensityOperator& rho) {
  return std::visit([&](const auto& c) { return apply_channel(c, rho); }, chan);
}

const MatrixXcd& pauli(int i) {
  static const std::vector<MatrixXcd> paulis = [] {
    const Complex I(0.0, 1.0);
    std::vector<MatrixXcd> p(4, MatrixXcd::Zero(2, 2));
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -I, I, 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  require(i >= 0 && i < 4, "pauli: index out of range");
  return paulis[static_cast<std::size_t>(i)];
}

BlochVector state_to_bloch(const DensityOperator& rho) {
  require(rho.dim() == 2, "state_to_bloch: only N = 2 is supported");
  VectorXd phi(3);
  for (int i = 0; i < 3; ++i) phi(i) = (rho.mat() * pauli(i + 1)).trace().real();
  return BlochVector(std::move(phi));
}

DensityOperator bloch_to_state(const BlochVector& phi) {
  require(phi.dim() == 3, "bloch_to_state: only N = 2 is supported");
  MatrixXcd rho = pauli(0);
  for (int i = 0; i < 3; ++i) rho += phi.vec()(i) * pauli(i + 1);
  return DensityOperator(0.5 * rho);
}

VectorXd apply_affine(const AffineForm& a, const VectorXd& phi) { return a.A * phi + a.tau; }

// --- diagnostics ---------------------------------------------------------

double channel_distance(const ChoiMatrix& a, const ChoiMatrix& b) {
  require(a.dim() == b.dim(), "channel_distance: dimension mismatch");
  MatrixXcd d = a.mat() - b.mat();
  d = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum() / a.dim();
}

double purity(const DensityOperator& rho) { return (rho.mat() * rho.mat()).trace().real(); }

bool is_unital(const KrausSet& k, double tol) {
  MatrixXcd acc = MatrixXcd::Zero(k.dim(), k.dim());
  for (const auto& a : k.ops()) acc += a * a.adjoint();
  return (acc - MatrixXcd::Identity(k.dim(), k.dim())).cwiseAbs().maxCoeff() <= tol;
}

bool is_unital(const ChoiMatrix& c, double tol) {
  const int n = c.dim();
  return (partial_trace_outer(c.mat(), n) - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <=
         tol;
}

bool is_unital(const AnyChannel& chan, double tol) { return is_unital(to_choi(chan), tol); }

bool is_cptp(const MatrixXcd& choi, double tol) { return ChoiMatrix::validate(choi, tol).ok; }

bool is_cptp(const AnyChannel& chan, double tol) {
  try {
    return is_cptp(to_choi(chan).mat(), tol);
  } catch (const InvalidArgument&) {
    return false;
  }
}

}  // namespace qstiefel
