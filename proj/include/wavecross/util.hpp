// Shared numerical utilities: deterministic RNG, branch-tracked square roots,
// half-plane determinant roots, and Gauss quadrature rules.
#ifndef WAVECROSS_UTIL_HPP
#define WAVECROSS_UTIL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wx {

using cd = std::complex<double>;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// Principal square root of the determinant of a matrix whose Hermitian part
// is positive definite. All eigenvalues of such a matrix lie in the open
// right half-plane, so the per-eigenvalue principal root is the holomorphic
// branch continued from det^{1/2}(I) = 1 along (1-t) I + t M.
inline cd sqrt_det_rhp(const MatC& m) {
  if (m.rows() == 1) {
    cd v = m(0, 0);
    require(v.real() > 0.0, "sqrt_det_rhp: Hermitian part not positive");
    return std::sqrt(v);
  }
  Eigen::ComplexEigenSolver<MatC> es(m, /*computeEigenvectors=*/false);
  require(es.info() == Eigen::Success, "sqrt_det_rhp: eigensolver failed");
  cd out(1.0, 0.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    cd lam = es.eigenvalues()(i);
    require(lam.real() > -1e-12 * std::abs(lam),
            "sqrt_det_rhp: eigenvalue outside right half-plane");
    out *= std::sqrt(lam);
  }
  return out;
}

// Tracks w(t) = sqrt(delta(t)) for a continuously varying nonzero complex
// delta. Each update multiplies by the principal root of the ratio
// delta_new / delta_old and therefore stays on the continuous branch as long
// as the argument change per update is below pi/2 (enforced).
class BranchSqrt {
 public:
  void reset(cd delta0, cd sqrt0) {
    delta_ = delta0;
    value_ = sqrt0;
  }
  void update(cd delta_new) {
    cd ratio = delta_new / delta_;
    require(ratio.real() > 0.0,
            "BranchSqrt: branch ambiguity, argument moved by >= pi/2 in one "
            "step; reduce the step size");
    value_ *= std::sqrt(ratio);
    delta_ = delta_new;
  }
  cd value() const { return value_; }
  cd delta() const { return delta_; }

 private:
  cd delta_{1.0, 0.0};
  cd value_{1.0, 0.0};
};

// Deterministic RNG. std::uniform_real_distribution is implementation
// defined, so map the raw 64-bit stream to doubles explicitly; results are
// then identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  // Marsaglia polar method on the explicit uniform stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }
  int randint(int n) {  // uniform in [0, n)
    return static_cast<int>(uniform01() * n) % n;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
QuadRule gauss_legendre(int n);

// Gauss-Hermite nodes/weights for weight exp(-x^2), via the symmetric
// tridiagonal Jacobi matrix (Golub-Welsch).
QuadRule gauss_hermite(int n);

// Sorted union of two time lists with tolerance-based dedup.
std::vector<double> merge_times(const std::vector<double>& a,
                                const std::vector<double>& b, double tol);

}  // namespace wx

#endif  // WAVECROSS_UTIL_HPP
