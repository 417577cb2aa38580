#include "wavecross/fields.hpp"

#include <cmath>

namespace wx {

ScalarField ScalarField::constant(int nvars, double c) {
  ScalarField f(nvars);
  if (c != 0.0) f.add_poly(c, std::vector<int>(nvars, 0));
  return f;
}

void ScalarField::add_poly(double c, const std::vector<int>& pw) {
  require(static_cast<int>(pw.size()) == nvars_,
          "ScalarField: exponent size mismatch");
  if (c != 0.0) poly_.push_back({c, pw});
}

void ScalarField::add_trig(double amp, const std::vector<double>& k,
                           double phase, bool is_sin) {
  require(static_cast<int>(k.size()) == nvars_,
          "ScalarField: wave vector size mismatch");
  if (amp != 0.0) trig_.push_back({amp, k, phase, is_sin});
}

double ScalarField::deriv(const std::vector<int>& order, const VecR& x) const {
  require(x.size() == nvars_, "ScalarField: point dimension mismatch");
  double acc = 0.0;
  for (const auto& t : poly_) {
    double c = t.c;
    bool dead = false;
    std::vector<int> pw = t.pw;
    for (int i = 0; i < nvars_ && !dead; ++i) {
      for (int rep = 0; rep < order[i]; ++rep) {
        if (pw[i] == 0) {
          dead = true;
          break;
        }
        c *= pw[i];
        pw[i] -= 1;
      }
    }
    if (dead) continue;
    for (int i = 0; i < nvars_; ++i)
      for (int rep = 0; rep < pw[i]; ++rep) c *= x(i);
    acc += c;
  }
  for (const auto& t : trig_) {
    // each d/dx_i multiplies by k_i and advances the phase by pi/2
    double amp = t.amp;
    int total = 0;
    for (int i = 0; i < nvars_; ++i) {
      total += order[i];
      for (int rep = 0; rep < order[i]; ++rep) amp *= t.k[i];
    }
    if (amp == 0.0) continue;
    double u = t.phase + 0.5 * kPi * total;
    for (int i = 0; i < nvars_; ++i) u += t.k[i] * x(i);
    acc += amp * (t.is_sin ? std::sin(u) : std::cos(u));
  }
  return acc;
}

double ScalarField::value(const VecR& x) const {
  return deriv(std::vector<int>(nvars_, 0), x);
}

double ScalarField::d1(int i, const VecR& x) const {
  std::vector<int> o(nvars_, 0);
  o[i] += 1;
  return deriv(o, x);
}

double ScalarField::d2(int i, int j, const VecR& x) const {
  std::vector<int> o(nvars_, 0);
  o[i] += 1;
  o[j] += 1;
  return deriv(o, x);
}

double ScalarField::d3(int i, int j, int k, const VecR& x) const {
  std::vector<int> o(nvars_, 0);
  o[i] += 1;
  o[j] += 1;
  o[k] += 1;
  return deriv(o, x);
}

bool ScalarField::depends_on(int var) const {
  for (const auto& t : poly_)
    if (t.pw[var] != 0) return true;
  for (const auto& t : trig_)
    if (t.k[var] != 0.0) return true;
  return false;
}

bool ScalarField::is_structurally_zero() const {
  return poly_.empty() && trig_.empty();
}

ScalarField ScalarField::lifted(int new_nvars,
                                const std::vector<int>& slot) const {
  require(static_cast<int>(slot.size()) == nvars_,
          "ScalarField::lifted: slot size mismatch");
  ScalarField out(new_nvars);
  for (const auto& t : poly_) {
    std::vector<int> pw(new_nvars, 0);
    for (int i = 0; i < nvars_; ++i) pw[slot[i]] += t.pw[i];
    out.add_poly(t.c, pw);
  }
  for (const auto& t : trig_) {
    std::vector<double> k(new_nvars, 0.0);
    for (int i = 0; i < nvars_; ++i) k[slot[i]] += t.k[i];
    out.add_trig(t.amp, k, t.phase, t.is_sin);
  }
  return out;
}

json ScalarField::to_json() const {
  json j;
  j["nvars"] = nvars_;
  json poly = json::array();
  for (const auto& t : poly_) {
    json e;
    e["c"] = t.c;
    e["pow"] = t.pw;
    poly.push_back(e);
  }
  json trig = json::array();
  for (const auto& t : trig_) {
    json e;
    e["amp"] = t.amp;
    e["k"] = t.k;
    e["phase"] = t.phase;
    e["kind"] = t.is_sin ? "sin" : "cos";
    trig.push_back(e);
  }
  j["poly"] = poly;
  j["trig"] = trig;
  return j;
}

ScalarField ScalarField::from_json(const json& j, int expect_nvars) {
  int nv = j.at("nvars").get<int>();
  if (expect_nvars >= 0)
    require(nv == expect_nvars, "ScalarField: unexpected variable count");
  ScalarField f(nv);
  if (j.contains("poly")) {
    for (const auto& e : j.at("poly"))
      f.add_poly(e.at("c").get<double>(), e.at("pow").get<std::vector<int>>());
  }
  if (j.contains("trig")) {
    for (const auto& e : j.at("trig")) {
      std::string kind = e.at("kind").get<std::string>();
      require(kind == "sin" || kind == "cos",
              "ScalarField: trig kind must be sin or cos");
      f.add_trig(e.at("amp").get<double>(),
                 e.at("k").get<std::vector<double>>(),
                 e.at("phase").get<double>(), kind == "sin");
    }
  }
  return f;
}

}  // namespace wx
