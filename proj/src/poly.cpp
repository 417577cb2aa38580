#include "wavecross/poly.hpp"

#include <algorithm>
#include <cmath>

namespace wx {

Poly Poly::constant(int nvars, cd c) {
  Poly p(nvars);
  p.add_term(std::vector<int>(nvars, 0), c);
  return p;
}

Poly Poly::monomial(const std::vector<int>& pw, cd c) {
  Poly p(static_cast<int>(pw.size()));
  p.add_term(pw, c);
  return p;
}

bool Poly::is_constant() const {
  if (terms_.empty()) return true;
  return terms_.size() == 1 &&
         std::all_of(terms_.begin()->first.begin(), terms_.begin()->first.end(),
                     [](int e) { return e == 0; });
}

int Poly::degree() const {
  int deg = 0;
  for (const auto& [pw, c] : terms_) {
    int d = 0;
    for (int e : pw) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

cd Poly::coeff(const std::vector<int>& pw) const {
  auto it = terms_.find(pw);
  return it == terms_.end() ? cd(0.0) : it->second;
}

void Poly::prune(const std::vector<int>& pw) {
  auto it = terms_.find(pw);
  if (it != terms_.end() && std::abs(it->second) == 0.0) terms_.erase(it);
}

void Poly::add_term(const std::vector<int>& pw, cd c) {
  require(static_cast<int>(pw.size()) == nvars_, "Poly: exponent size mismatch");
  auto [it, inserted] = terms_.try_emplace(pw, c);
  if (!inserted) it->second += c;
  prune(pw);
}

Poly Poly::operator+(const Poly& o) const {
  require(nvars_ == o.nvars_, "Poly: variable count mismatch");
  Poly r = *this;
  for (const auto& [pw, c] : o.terms_) r.add_term(pw, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o.scaled(cd(-1.0)); }

Poly Poly::operator*(const Poly& o) const {
  require(nvars_ == o.nvars_, "Poly: variable count mismatch");
  Poly r(nvars_);
  for (const auto& [pa, ca] : terms_) {
    for (const auto& [pb, cb] : o.terms_) {
      std::vector<int> pw(nvars_);
      for (int i = 0; i < nvars_; ++i) pw[i] = pa[i] + pb[i];
      r.add_term(pw, ca * cb);
    }
  }
  return r;
}

Poly Poly::scaled(cd s) const {
  Poly r(nvars_);
  if (std::abs(s) == 0.0) return r;
  for (const auto& [pw, c] : terms_) r.terms_[pw] = c * s;
  return r;
}

Poly Poly::conjugated() const {
  Poly r(nvars_);
  for (const auto& [pw, c] : terms_) r.terms_[pw] = std::conj(c);
  return r;
}

Poly Poly::deriv(int var) const {
  Poly r(nvars_);
  for (const auto& [pw, c] : terms_) {
    if (pw[var] == 0) continue;
    std::vector<int> q = pw;
    q[var] -= 1;
    r.add_term(q, c * static_cast<double>(pw[var]));
  }
  return r;
}

cd Poly::eval(const VecC& y) const {
  require(y.size() == nvars_, "Poly::eval: point dimension mismatch");
  cd out(0.0);
  for (const auto& [pw, c] : terms_) {
    cd t = c;
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < pw[i]; ++k) t *= y(i);
    out += t;
  }
  return out;
}

Poly Poly::substitute(const std::vector<Poly>& images) const {
  require(static_cast<int>(images.size()) == nvars_,
          "Poly::substitute: wrong image count");
  int m = nvars_ == 0 ? 0 : images[0].nvars();
  for (const auto& im : images)
    require(im.nvars() == m, "Poly::substitute: inconsistent image vars");
  Poly out(m);
  for (const auto& [pw, c] : terms_) {
    Poly t = Poly::constant(m, c);
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < pw[i]; ++k) t = t * images[i];
    out = out + t;
  }
  return out;
}

Poly Poly::substitute_linear(const MatC& L, const VecC& c) const {
  require(L.rows() == nvars_ && c.size() == nvars_,
          "Poly::substitute_linear: shape mismatch");
  int m = static_cast<int>(L.cols());
  std::vector<Poly> images;
  images.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i) {
    Poly im(m);
    if (std::abs(c(i)) != 0.0) im.add_term(std::vector<int>(m, 0), c(i));
    for (int j = 0; j < m; ++j) {
      if (std::abs(L(i, j)) == 0.0) continue;
      std::vector<int> pw(m, 0);
      pw[j] = 1;
      im.add_term(pw, L(i, j));
    }
    images.push_back(im);
  }
  return substitute(images);
}

Poly Poly::shifted(const VecC& a) const {
  return substitute_linear(MatC::Identity(nvars_, nvars_), a);
}

bool Poly::near_equal(const Poly& o, double tol) const {
  Poly d = *this - o;
  double m = 0.0;
  for (const auto& [pw, c] : d.terms()) m = std::max(m, std::abs(c));
  return m <= tol;
}

}  // namespace wx
