#pragma once

// Quantum states and the interconvertible encodings of a CPTP map on N x N
// density operators. Vectorization is column stacking throughout, so
// vec(A rho B) = (B^T kron A) vec(rho) and the Liouvillian of a Kraus set is
// sum_i conj(A_i) kron A_i.

#include <string>
#include <variant>
#include <vector>

#include "qstiefel/core.hpp"

namespace qstiefel {

class DensityOperator {
 public:
  explicit DensityOperator(MatrixXcd mat, double tol = kDefaultTol);

  static Validation validate(const MatrixXcd& mat, double tol = kDefaultTol);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const MatrixXcd& mat() const { return mat_; }

 private:
  MatrixXcd mat_;
};

// Real Bloch coordinates phi_i = Tr(rho sigma_i) of a qubit state.
class BlochVector {
 public:
  explicit BlochVector(VectorXd vec, double tol = kDefaultTol);

  int dim() const { return static_cast<int>(vec_.size()); }
  const VectorXd& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

 private:
  VectorXd vec_;
};

class KrausSet {
 public:
  explicit KrausSet(std::vector<MatrixXcd> ops, double tol = kDefaultTol);

  static Validation validate(const std::vector<MatrixXcd>& ops, double tol = kDefaultTol);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(ops_.size()); }
  const std::vector<MatrixXcd>& ops() const { return ops_; }
  const MatrixXcd& operator[](int i) const { return ops_[static_cast<std::size_t>(i)]; }

 private:
  int dim_;
  std::vector<MatrixXcd> ops_;
};

// Lambda = sum_i |A_i>><<A_i|, an N^2 x N^2 PSD matrix with Tr_2(Lambda) = 1_N,
// where the traced factor is the row index of the Kraus operators.
class ChoiMatrix {
 public:
  explicit ChoiMatrix(MatrixXcd mat, double tol = kDefaultTol);

  static Validation validate(const MatrixXcd& mat, double tol = kDefaultTol);

  int dim() const { return dim_; }
  const MatrixXcd& mat() const { return mat_; }

 private:
  int dim_;
  MatrixXcd mat_;
};

class Liouvillian {
 public:
  explicit Liouvillian(MatrixXcd mat, double tol = kDefaultTol);

  int dim() const { return dim_; }
  const MatrixXcd& mat() const { return mat_; }

 private:
  int dim_;
  MatrixXcd mat_;
};

// Liouvillian in the orthonormal basis {sigma_I, sigma_X, sigma_Y, sigma_Z}/sqrt(2).
// Only N = 2 is supported; the generalized Gell-Mann basis is not implemented.
class PauliTransferMatrix {
 public:
  explicit PauliTransferMatrix(MatrixXd mat, double tol = kDefaultTol);

  int dim() const { return 2; }
  const MatrixXd& mat() const { return mat_; }

 private:
  MatrixXd mat_;
};

// phi -> A phi + tau on Bloch vectors.
struct AffineForm {
  MatrixXd A;
  VectorXd tau;
};

// Kraus operators stacked vertically: S = [A_1; ...; A_k], S^dagger S = 1_N.
class StiefelForm {
 public:
  StiefelForm(MatrixXcd s, int dim, double tol = kDefaultTol);

  int dim() const { return dim_; }
  int kraus_rank() const { return static_cast<int>(s_.rows()) / dim_; }
  const MatrixXcd& mat() const { return s_; }

 private:
  int dim_;
  MatrixXcd s_;
};

// Row-reshuffled Stiefel form with N^2 Kraus operators. xi is N^3 x N; row
// a * N^2 + k holds row a of A_k, so the block xi_p (p = a + N c, length N^2)
// collects entry (a, c) of every Kraus operator and Lambda_pq = xi_q^dagger xi_p.
class FrameForm {
 public:
  FrameForm(MatrixXcd xi, int dim, double tol = kDefaultTol);

  int dim() const { return dim_; }
  const MatrixXcd& mat() const { return xi_; }
  // Block xi_p as a length-N^2 vector.
  VectorXcd block(int p) const;

 private:
  int dim_;
  MatrixXcd xi_;
};

using AnyChannel =
    std::variant<KrausSet, ChoiMatrix, Liouvillian, PauliTransferMatrix, StiefelForm, FrameForm>;

enum class ReprKind { kraus, choi, liouville, ptm, stiefel, frame };

std::string to_string(ReprKind kind);
ReprKind repr_kind_from_string(const std::string& name);
ReprKind kind_of(const AnyChannel& chan);

// --- vectorization -------------------------------------------------------

VectorXcd vectorize(const MatrixXcd& m);
MatrixXcd devectorize(const VectorXcd& v);

// Index permutation mapping Liouvillian <-> Choi. An exact involution.
MatrixXcd reshuffle(const MatrixXcd& m);

// --- conversions ---------------------------------------------------------

ChoiMatrix kraus_to_choi(const KrausSet& k);
Liouvillian kraus_to_liouville(const KrausSet& k);
// Canonical Kraus operators sqrt(d_i) K_i in descending eigenvalue order;
// eigenvalues below kRankTolPerDim * N are dropped.
KrausSet choi_to_kraus(const ChoiMatrix& c);
Liouvillian choi_to_liouville(const ChoiMatrix& c);
ChoiMatrix liouville_to_choi(const Liouvillian& l);
PauliTransferMatrix liouville_to_ptm(const Liouvillian& l, double tol = kDefaultTol);
Liouvillian ptm_to_liouville(const PauliTransferMatrix& r);
AffineForm ptm_to_affine(const PauliTransferMatrix& r);
PauliTransferMatrix affine_to_ptm(const AffineForm& a);

// Pads with zero operators up to `pad_to` operators when pad_to > size.
StiefelForm kraus_to_stiefel(const KrausSet& k, int pad_to = 0);
KrausSet stiefel_to_kraus(const StiefelForm& s);
FrameForm stiefel_to_frame(const StiefelForm& s);
StiefelForm frame_to_stiefel(const FrameForm& f);
ChoiMatrix frame_to_choi(const FrameForm& f);

ChoiMatrix to_choi(const AnyChannel& chan);
KrausSet to_kraus(const AnyChannel& chan);
AnyChannel convert(const AnyChannel& chan, ReprKind target);

// --- action --------------------------------------------------------------

DensityOperator apply_channel(const KrausSet& k, const DensityOperator& rho);
DensityOperator apply_channel(const ChoiMatrix& c, const DensityOperator& rho);
DensityOperator apply_channel(const Liouvillian& l, const DensityOperator& rho);
DensityOperator apply_channel(const PauliTransferMatrix& r, const DensityOperator& rho);
DensityOperator apply_channel(const StiefelForm& s, const DensityOperator& rho);
DensityOperator apply_channel(const FrameForm& f, const DensityOperator& rho);
DensityOperator apply_channel(const AnyChannel& chan, const DensityOperator& rho);

// Unvalidated action of a Choi matrix on an arbitrary N x N operator.
MatrixXcd choi_action(const MatrixXcd& choi, const MatrixXcd& x);

BlochVector state_to_bloch(const DensityOperator& rho);
DensityOperator bloch_to_state(const BlochVector& phi);
VectorXd apply_affine(const AffineForm& a, const VectorXd& phi);

// Pauli matrices I, X, Y, Z.
const MatrixXcd& pauli(int i);

// --- diagnostics ---------------------------------------------------------

// (1/2) * ||a - b||_1 / N. A lower-bound proxy for the diamond distance.
double channel_distance(const ChoiMatrix& a, const ChoiMatrix& b);
double purity(const DensityOperator& rho);
bool is_unital(const KrausSet& k, double tol = kDefaultTol);
bool is_unital(const ChoiMatrix& c, double tol = kDefaultTol);
bool is_unital(const AnyChannel& chan, double tol = kDefaultTol);
bool is_cptp(const AnyChannel& chan, double tol = kDefaultTol);
bool is_cptp(const MatrixXcd& choi, double tol = kDefaultTol);

}  // namespace qstiefel
