// Smooth scalar fields assembled from polynomial and sinusoidal terms, with
// analytic partial derivatives up to third order. These parameterize every
// Hamiltonian ingredient (trace part, half-gap, frame angle) so classical
// flows, Hessians, and the third-order profile correction never touch finite
// differences.
#ifndef WAVECROSS_FIELDS_HPP
#define WAVECROSS_FIELDS_HPP

#include <vector>

#include "json.hpp"
#include "wavecross/util.hpp"

namespace wx {

using json = nlohmann::ordered_json;

struct PolyFieldTerm {
  double c = 0.0;
  std::vector<int> pw;  // exponents per variable
};

struct TrigFieldTerm {
  double amp = 0.0;
  std::vector<double> k;  // wave vector per variable
  double phase = 0.0;
  bool is_sin = false;  // amp * sin(k.x + phase) instead of cos
};

class ScalarField {
 public:
  ScalarField() : nvars_(0) {}
  explicit ScalarField(int nvars) : nvars_(nvars) {}

  static ScalarField zero(int nvars) { return ScalarField(nvars); }
  static ScalarField constant(int nvars, double c);

  int nvars() const { return nvars_; }
  void add_poly(double c, const std::vector<int>& pw);
  void add_trig(double amp, const std::vector<double>& k, double phase,
                bool is_sin);

  double value(const VecR& x) const;
  double d1(int i, const VecR& x) const;
  double d2(int i, int j, const VecR& x) const;
  double d3(int i, int j, int k, const VecR& x) const;

  // Structural dependence on a variable (nonzero exponent / wave number).
  bool depends_on(int var) const;
  bool is_structurally_zero() const;

  // Remap this field into a larger variable space: variable i of this field
  // becomes variable slot[i] of the new space.
  ScalarField lifted(int new_nvars, const std::vector<int>& slot) const;

  json to_json() const;
  static ScalarField from_json(const json& j, int expect_nvars = -1);

  const std::vector<PolyFieldTerm>& poly_terms() const { return poly_; }
  const std::vector<TrigFieldTerm>& trig_terms() const { return trig_; }

 private:
  int nvars_;
  std::vector<PolyFieldTerm> poly_;
  std::vector<TrigFieldTerm> trig_;
  double deriv(const std::vector<int>& order, const VecR& x) const;
};

}  // namespace wx

#endif  // WAVECROSS_FIELDS_HPP
