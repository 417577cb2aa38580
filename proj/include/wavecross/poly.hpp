// Sparse multivariate polynomials with complex coefficients, used for
// wave-packet profile prefactors and phase-space (Weyl) symbols.
#ifndef WAVECROSS_POLY_HPP
#define WAVECROSS_POLY_HPP

#include <map>
#include <vector>

#include "wavecross/util.hpp"

namespace wx {

// Exponent vectors are stored in a std::map so iteration order (and hence
// serialization) is deterministic.
class Poly {
 public:
  using Terms = std::map<std::vector<int>, cd>;

  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, cd c);
  static Poly monomial(const std::vector<int>& pw, cd c);

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  int degree() const;

  cd coeff(const std::vector<int>& pw) const;
  void add_term(const std::vector<int>& pw, cd c);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(cd s) const;
  Poly conjugated() const;  // conjugate coefficients (variables stay real)
  Poly deriv(int var) const;

  cd eval(const VecC& y) const;

  // Substitute each variable with the given polynomial (over a common new
  // variable set). images.size() must equal nvars().
  Poly substitute(const std::vector<Poly>& images) const;

  // Affine-linear substitution y_i -> sum_j L(i,j) w_j + c_i where the new
  // variables w have dimension L.cols().
  Poly substitute_linear(const MatC& L, const VecC& c) const;

  // Shift y -> y + a (same variable count).
  Poly shifted(const VecC& a) const;

  bool near_equal(const Poly& o, double tol) const;

 private:
  int nvars_;
  Terms terms_;
  void prune(const std::vector<int>& pw);
};

}  // namespace wx

#endif  // WAVECROSS_POLY_HPP
