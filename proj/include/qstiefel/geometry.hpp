#pragma once

// Which qubit channels can be the average of a nontrivial random CPTP map.
// A channel is such an average exactly when it is not an extreme point of
// the convex set of CPTP maps. Extremality is decided here only where a
// proof is available: rank-one Choi matrices are extreme, rank-two
// non-unital channels are extreme (a two-Kraus qubit channel is unital or
// extreme), and "not extreme" is only reported together with an explicit
// decomposition that has been checked numerically.

#include <optional>
#include <string>
#include <vector>

#include "qstiefel/repr.hpp"

namespace qstiefel {

enum class Extremality { extreme, not_extreme, unknown };

enum class VerdictRule {
  rank_one,              // unitary channel; a rank-one PSD point is extreme
  two_kraus_non_unital,  // exactly two Kraus operators and not unital
  unital_pauli_mixture,  // unital qubit channel written as a mixture of unitaries
  full_rank_interior,    // positive definite Choi matrix, mixed with 1/N
  undetermined,          // no rule applies
};

std::string to_string(Extremality e);
std::string to_string(VerdictRule r);

struct WeightedChannel {
  double weight;
  ChoiMatrix choi;
};

struct RepresentabilityVerdict {
  Extremality verdict = Extremality::unknown;
  VerdictRule reason = VerdictRule::undetermined;
  int kraus_rank = 0;
  bool unital = false;
  // Witness for not_extreme: at least two distinct channels whose weighted
  // average reproduces the input to 1e-10.
  std::vector<WeightedChannel> decomposition;
};

// Number of Choi eigenvalues above kRankTolPerDim * N.
int minimal_kraus_rank(const ChoiMatrix& c);

// Qubit channels only; throws InvalidArgument for N != 2.
RepresentabilityVerdict classify_extreme_qubit(const ChoiMatrix& c);

// nullopt when the verdict is unknown.
std::optional<bool> is_representable_as_average(const ChoiMatrix& c);

// SU(2) element acting on Bloch vectors as the rotation r (up to global sign).
MatrixXcd su2_from_rotation(const MatrixXd& r);

}  // namespace qstiefel
