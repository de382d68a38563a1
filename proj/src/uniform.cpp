#include "qstiefel/uniform.hpp"

namespace qstiefel {

VectorXd sample_simplex_uniform(RngStream& rng, int d) {
  require(d >= 1, "sample_simplex_uniform: d must be positive");
  std::vector<double> cuts(static_cast<std::size_t>(d + 1));
  cuts.front() = 0.0;
  cuts.back() = 1.0;
  for (int i = 1; i < d; ++i) cuts[static_cast<std::size_t>(i)] = rng.uniform();
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  VectorXd x(d);
  for (int i = 0; i < d; ++i)
    x(i) = cuts[static_cast<std::size_t>(i + 1)] - cuts[static_cast<std::size_t>(i)];
  return x;
}

DensityOperator sample_density_uniform(RngStream& rng, int dim, int rank) {
  require(rank >= 1 && rank <= dim, "sample_density_uniform: need 1 <= rank <= N");
  MatrixXcd k = sample_haar_unitary(rng, dim);
  VectorXd spectrum = VectorXd::Zero(dim);
  spectrum.head(rank) = sample_simplex_uniform(rng, rank);
  MatrixXcd rho = k * spectrum.cast<Complex>().asDiagonal() * k.adjoint();
  return DensityOperator(hermitian_part(rho));
}

StiefelForm sample_cptp_uniform(RngStream& rng, int dim, int kraus_rank) {
  require(kraus_rank >= 1 && kraus_rank <= dim * dim,
          "sample_cptp_uniform: need 1 <= kraus_rank <= N^2");
  auto pt = sample_stiefel_uniform<Complex>(rng, static_cast<Eigen::Index>(kraus_rank) * dim, dim);
  return StiefelForm(std::move(pt.X), dim);
}

}  // namespace qstiefel
