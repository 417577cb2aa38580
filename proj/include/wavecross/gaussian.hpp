// Complex Gaussian profiles with polynomial prefactors and the exact
// operations the propagator needs on them: Weyl quantization of polynomial
// symbols, metaplectic (quadratic-flow) action, Fourier transform,
// phase-space translation, inner products, and the one-parameter crossing
// transfer operator together with its quadrature cross-check.
//
// A profile is  P(y) * norm * exp(i/2 y.Gamma y + i linear.y)  on R^d with
// Gamma complex symmetric, Im Gamma positive definite (Siegel upper half
// space), and an optional complex linear phase. Most operations require the
// linear phase to vanish; translation introduces it.
#ifndef WAVECROSS_GAUSSIAN_HPP
#define WAVECROSS_GAUSSIAN_HPP

#include <vector>

#include "json.hpp"
#include "wavecross/poly.hpp"
#include "wavecross/util.hpp"

namespace wx {

using json = nlohmann::ordered_json;

// Verifies complex symmetry and positive-definite imaginary part.
void check_siegel(const MatC& gamma, const std::string& where);

struct PolyGaussian {
  int d = 1;
  Poly poly;    // polynomial prefactor in the d profile variables
  MatC gamma;   // Siegel width matrix
  VecC linear;  // complex linear phase (zero for most operations)
  cd norm = cd(1.0, 0.0);

  static PolyGaussian pure(const MatC& gamma, cd norm = cd(1.0, 0.0));
  bool has_linear(double tol = 0.0) const;
  PolyGaussian scaled(cd s) const;
};

// L^2-normalized pure Gaussian: norm = pi^{-d/4} det(Im Gamma)^{1/4}.
PolyGaussian normalized_gaussian(const MatC& gamma);

cd evaluate(const PolyGaussian& g, const VecR& y);
VecC evaluate_points(const PolyGaussian& g, const std::vector<VecR>& pts);

// <f, g> = integral conj(f) g, via closed-form Gaussian moments.
cd inner_product(const PolyGaussian& f, const PolyGaussian& g);
double l2_norm(const PolyGaussian& g);

// Same inner product by tensorized Gauss-Hermite quadrature (slow oracle).
cd inner_product_quadrature(const PolyGaussian& f, const PolyGaussian& g,
                            int nodes_per_axis = 60);

// Combine a*f + b*g for profiles sharing the same envelope (gamma, linear).
PolyGaussian linear_combine(cd a, const PolyGaussian& f, cd b,
                            const PolyGaussian& g);

// Weyl quantization at unit scale of a polynomial phase-space symbol
// A(y, eta); the symbol lives in 2d variables, first d position then d
// momentum. Exact on this class; raises the polynomial degree by at most
// deg(A). Degrees above max_degree are rejected.
PolyGaussian weyl_apply(const Poly& symbol, const PolyGaussian& g,
                        int max_degree = 12);

// Linear symplectic map acting on (y, eta), stored as one 2d x 2d real
// matrix with blocks [[A, B], [C, D]].
struct Symplectic {
  MatR m;
  int d() const { return static_cast<int>(m.rows()) / 2; }
  MatR A() const { return m.topLeftCorner(d(), d()); }
  MatR B() const { return m.topRightCorner(d(), d()); }
  MatR C() const { return m.bottomLeftCorner(d(), d()); }
  MatR D() const { return m.bottomRightCorner(d(), d()); }
  static Symplectic identity(int d);
  Symplectic inverse() const;  // [[D^T, -B^T], [-C^T, A^T]]
  // max-norm of F^T J F - J
  double symplectic_defect() const;
};

// Metaplectic action M[F]: width Gamma' = (C + D Gamma)(A + B Gamma)^{-1},
// scalar factor det^{-1/2}(A + B Gamma) on the principal branch, and the
// polynomial prefactor pushed through as a symbol composed with F^{-1}.
// For flows, compose stepwise so each step's determinant argument moves by
// less than pi/2; the cocycle property makes the stepwise product equal the
// continuous branch. Requires zero linear phase.
PolyGaussian metaplectic_apply(const Symplectic& F, const PolyGaussian& g,
                               int max_degree = 12);

// Unitary Fourier transform (2 pi)^{-d/2} integral e^{-i y.eta} f(y) dy.
// Width maps to -Gamma^{-1}.
PolyGaussian fourier(const PolyGaussian& g);

// Unit-scale phase-space translation
// (T(q,p) f)(y) = e^{-i q.p/2} e^{i p.y} f(y - q).
PolyGaussian translate(const PolyGaussian& g, const VecR& q, const VecR& p);

struct TransferResult {
  cd prefactor;      // sqrt(2 pi / (i mu)), principal branch
  PolyGaussian out;  // prefactor * out equals the defining integral exactly
};

// One-parameter transfer operator
//   (T_{mu,alpha,beta} f)(y) = integral_R e^{i mu s^2} (T(s alpha, s beta) f)(y) ds.
// Closed form on a pure Gaussian: with
//   mu_t = mu - alpha.beta/2 + alpha.Gamma alpha/2   (Im mu_t >= 0),
//   w    = beta - Gamma alpha,
// the result is sqrt(pi / (-i mu_t)) times the Gaussian of width
//   Gamma' = Gamma - (w w^T) / (2 mu_t).
// The returned profile absorbs sqrt(pi/(-i mu_t)) / prefactor into its norm.
TransferResult transfer_gaussian(double mu, const VecR& alpha,
                                 const VecR& beta, const PolyGaussian& g);

// Polynomial case: the prefactor symbol is composed with the inverse of the
// quadratic flow exp(G/(4 mu)), G = J Hess (beta.y - alpha.eta)^2, G^2 = 0,
// and re-quantized against the transferred pure Gaussian.
TransferResult transfer_polygaussian(double mu, const VecR& alpha,
                                     const VecR& beta, const PolyGaussian& g,
                                     int max_degree = 12);

// Direct numerical evaluation of the defining integral at the given points,
// on the stationary-point-centered rotated contour (integrand becomes a
// damped Gaussian; Gauss-Legendre converges superexponentially). This is the
// independent oracle for the closed forms above.
VecC transfer_quadrature(double mu, const VecR& alpha, const VecR& beta,
                         const PolyGaussian& g, const std::vector<VecR>& pts,
                         int nodes = 400, double tail_sigmas = 9.0);

json poly_to_json(const Poly& p);
Poly poly_from_json(const json& j, int expect_nvars = -1);
json polygaussian_to_json(const PolyGaussian& g);
PolyGaussian polygaussian_from_json(const json& j);
json symplectic_to_json(const Symplectic& f);
Symplectic symplectic_from_json(const json& j);

}  // namespace wx

#endif  // WAVECROSS_GAUSSIAN_HPP
