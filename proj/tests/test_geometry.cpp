#include "doctest.h"
#include "qstiefel/channels.hpp"
#include "test_util.hpp"

using namespace qstiefel;
using testutil::max_abs;

namespace {

KrausSet conjugate(const KrausSet& k, const MatrixXcd& u, const MatrixXcd& v) {
  std::vector<MatrixXcd> ops;
  for (const auto& a : k.ops()) ops.push_back(u * a * v);
  return KrausSet(ops);
}

// Rank-three non-unital channel: the decay operator of amplitude damping is
// sometimes followed by a bit flip.
KrausSet rank_three_non_unital() {
  const auto ad = testutil::ad_kraus(0.3);
  const double p = 0.2;
  return KrausSet({ad[0], std::sqrt(1 - p) * ad[1], std::sqrt(p) * pauli(1) * ad[1]});
}

}  // namespace

TEST_CASE("minimal Kraus rank") {
  RngStream rng(31);
  CHECK(minimal_kraus_rank(kraus_to_choi(KrausSet({sample_haar_unitary(rng, 2)}))) == 1);
  CHECK(minimal_kraus_rank(kraus_to_choi(KrausSet(testutil::ad_kraus(0.01)))) == 2);
  CHECK(minimal_kraus_rank(kraus_to_choi(KrausSet(testutil::ad_kraus(0.7)))) == 2);
  // Pauli Choi eigenvalues are 2 w_i, all positive here.
  CHECK(minimal_kraus_rank(depolarizing_choi(0.001, 0.01, 0.1)) == 4);
  CHECK(minimal_kraus_rank(depolarizing_choi(0.0, 0.0, 0.1)) == 2);
  CHECK(minimal_kraus_rank(kraus_to_choi(rank_three_non_unital())) == 3);
  for (int r = 1; r <= 4; ++r)
    CHECK(minimal_kraus_rank(to_choi(AnyChannel{sample_cptp_uniform(rng, 2, r)})) == r);
  CHECK(minimal_kraus_rank(to_choi(AnyChannel{sample_cptp_uniform(rng, 3, 5)})) == 5);
}

TEST_CASE("SU(2) lift of a rotation") {
  RngStream rng(32);
  for (int i = 0; i < 50; ++i) {
    MatrixXd r = sample_stiefel_uniform<double>(rng, 3, 3).X;
    if (r.determinant() < 0) r.col(0) *= -1.0;
    MatrixXcd u = su2_from_rotation(r);
    CHECK(max_abs(u.adjoint() * u - MatrixXcd::Identity(2, 2)) < 1e-12);
    CHECK(std::abs(u.determinant() - 1.0) < 1e-12);
    MatrixXd ptm = liouville_to_ptm(kraus_to_liouville(KrausSet({u}))).mat();
    CHECK(max_abs(ptm.bottomRightCorner(3, 3) - r) < 1e-12);
  }
  CHECK_THROWS_AS(su2_from_rotation(-MatrixXd::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("classification of named qubit channels") {
  SUBCASE("amplitude damping is extreme") {
    for (double g : {0.01, 0.5, 0.99}) {
      auto v = classify_extreme_qubit(kraus_to_choi(amplitude_damping(g)));
      CHECK(v.verdict == Extremality::extreme);
      CHECK(v.reason == VerdictRule::two_kraus_non_unital);
      CHECK(v.kraus_rank == 2);
      CHECK_FALSE(v.unital);
      CHECK(is_representable_as_average(kraus_to_choi(amplitude_damping(g))) == false);
    }
  }
  SUBCASE("identity and unitaries are extreme") {
    auto v = classify_extreme_qubit(kraus_to_choi(KrausSet({MatrixXcd::Identity(2, 2)})));
    CHECK(v.verdict == Extremality::extreme);
    CHECK(v.reason == VerdictRule::rank_one);
    CHECK(v.unital);
  }
  SUBCASE("depolarizing is a mixture of Pauli unitaries") {
    ChoiMatrix c = depolarizing_choi(0.001, 0.01, 0.1);
    auto v = classify_extreme_qubit(c);
    CHECK(v.verdict == Extremality::not_extreme);
    CHECK(v.reason == VerdictRule::unital_pauli_mixture);
    CHECK(v.decomposition.size() == 4);
    MatrixXcd sum = MatrixXcd::Zero(4, 4);
    double w = 0.0;
    for (const auto& p : v.decomposition) {
      CHECK(minimal_kraus_rank(p.choi) == 1);
      sum += p.weight * p.choi.mat();
      w += p.weight;
    }
    CHECK(std::abs(w - 1.0) < 1e-12);
    CHECK(max_abs(sum - c.mat()) < 1e-10);
    CHECK(is_representable_as_average(c) == true);
    // The weights are the Pauli probabilities (up to ordering).
    std::vector<double> ws;
    for (const auto& p : v.decomposition) ws.push_back(p.weight);
    std::sort(ws.begin(), ws.end());
    CHECK(std::abs(ws[0] - 0.001) < 1e-12);
    CHECK(std::abs(ws[3] - 0.889) < 1e-12);
  }
  SUBCASE("maximally depolarizing channel") {
    ChoiMatrix c(MatrixXcd::Identity(4, 4) / 2.0);
    CHECK(is_representable_as_average(c) == true);
  }
  SUBCASE("rank-two unital channels carry a two-unitary witness") {
    ChoiMatrix c = depolarizing_choi(0.0, 0.0, 0.1);
    auto v = classify_extreme_qubit(c);
    CHECK(v.kraus_rank == 2);
    CHECK(v.verdict == Extremality::not_extreme);
    CHECK(v.decomposition.size() == 2);
  }
  SUBCASE("full-rank non-unital channels are interior points") {
    ChoiMatrix c = liouville_to_choi(ptm_to_liouville(composite_nonunital(0.01, 0.001, 0.01, 0.1)));
    auto v = classify_extreme_qubit(c);
    CHECK_FALSE(v.unital);
    CHECK(v.kraus_rank == 4);
    CHECK(v.verdict == Extremality::not_extreme);
    CHECK(v.reason == VerdictRule::full_rank_interior);
    MatrixXcd sum = MatrixXcd::Zero(4, 4);
    for (const auto& p : v.decomposition) {
      CHECK(ChoiMatrix::validate(p.choi.mat()).ok);
      sum += p.weight * p.choi.mat();
    }
    CHECK(max_abs(sum - c.mat()) < 1e-10);
  }
  SUBCASE("rank-three non-unital channels are left undecided") {
    ChoiMatrix c = kraus_to_choi(rank_three_non_unital());
    auto v = classify_extreme_qubit(c);
    CHECK(v.verdict == Extremality::unknown);
    CHECK(v.reason == VerdictRule::undetermined);
    CHECK_FALSE(is_representable_as_average(c).has_value());
  }
  CHECK_THROWS_AS(classify_extreme_qubit(ChoiMatrix(MatrixXcd::Identity(9, 9) / 3.0)), InvalidArgument);
}

TEST_CASE("classification is invariant under unitary conjugation") {
  RngStream rng(33);
  std::vector<KrausSet> cases = {KrausSet(testutil::ad_kraus(0.01)), rank_three_non_unital(),
                                 to_kraus(AnyChannel{depolarizing_choi(0.001, 0.01, 0.1)}),
                                 to_kraus(AnyChannel{depolarizing_choi(0.2, 0.0, 0.0)})};
  for (int r = 1; r <= 4; ++r) cases.push_back(stiefel_to_kraus(sample_cptp_uniform(rng, 2, r)));
  for (const auto& k : cases) {
    const auto base = classify_extreme_qubit(kraus_to_choi(k));
    for (int t = 0; t < 10; ++t) {
      const MatrixXcd u = sample_haar_unitary(rng, 2), v = sample_haar_unitary(rng, 2);
      const ChoiMatrix c = kraus_to_choi(conjugate(k, u, v));
      const auto w = classify_extreme_qubit(c);
      CHECK(w.verdict == base.verdict);
      CHECK(w.reason == base.reason);
      CHECK(w.kraus_rank == base.kraus_rank);
      CHECK(w.unital == base.unital);
      if (w.verdict == Extremality::not_extreme) {
        MatrixXcd sum = MatrixXcd::Zero(4, 4);
        for (const auto& p : w.decomposition) sum += p.weight * p.choi.mat();
        CHECK(max_abs(sum - c.mat()) < 1e-10);
      }
    }
  }
}
