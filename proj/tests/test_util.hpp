#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qstiefel/repr.hpp"

namespace testutil {

using qstiefel::Complex;
using qstiefel::MatrixXcd;
using qstiefel::MatrixXd;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.eval().cwiseAbs().maxCoeff();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Asymptotic Kolmogorov survival function with the Stephens correction.
inline double kolmogorov_pvalue(double d, double n_eff) {
  const double sq = std::sqrt(n_eff);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

inline double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return kolmogorov_pvalue(d, n);
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return kolmogorov_pvalue(d, na * nb / (na + nb));
}

// Amplitude damping Kraus pair, written out by hand.
inline std::vector<MatrixXcd> ad_kraus(double gamma) {
  MatrixXcd a1(2, 2), a2(2, 2);
  a1 << 1, 0, 0, std::sqrt(1 - gamma);
  a2 << 0, std::sqrt(gamma), 0, 0;
  return {a1, a2};
}

// Brute-force Choi entries Lambda_{a+Nc, a'+Nc'} = sum_k A_k(a,c) conj(A_k(a',c')).
inline MatrixXcd choi_oracle(const std::vector<MatrixXcd>& ops) {
  const auto n = ops.front().rows();
  MatrixXcd lam = MatrixXcd::Zero(n * n, n * n);
  for (const auto& a : ops)
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index rp = 0; rp < n; ++rp)
          for (Eigen::Index cp = 0; cp < n; ++cp)
            lam(r + n * c, rp + n * cp) += a(r, c) * std::conj(a(rp, cp));
  return lam;
}

// Brute-force Kraus action on a matrix.
inline MatrixXcd kraus_action(const std::vector<MatrixXcd>& ops, const MatrixXcd& x) {
  MatrixXcd out = MatrixXcd::Zero(x.rows(), x.cols());
  for (const auto& a : ops) out += a * x * a.adjoint();
  return out;
}

}  // namespace testutil
