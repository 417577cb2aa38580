#include "wavecross/util.hpp"

#include <algorithm>
#include <cmath>

namespace wx {

QuadRule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n >= 1");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  // Newton iteration from the Chebyshev-like initial guess; symmetric rule.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

QuadRule gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: n >= 1");
  // Jacobi matrix for Hermite polynomials (weight e^{-x^2}):
  // off-diagonal b_k = sqrt(k/2).
  MatR J = MatR::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(k / 2.0);
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatR> es(J);
  require(es.info() == Eigen::Success, "gauss_hermite: eigensolver failed");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double mu0 = std::sqrt(kPi);  // integral of the weight
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v0 * v0;
  }
  return r;
}

std::vector<double> merge_times(const std::vector<double>& a,
                                const std::vector<double>& b, double tol) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all) {
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  }
  return out;
}

}  // namespace wx
