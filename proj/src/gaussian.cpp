#include "wavecross/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace wx {

namespace {

const cd kI(0.0, 1.0);

double mat_scale(const MatC& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

// Enumerate multi-indices of total degree == level over nvars variables,
// in deterministic (lexicographic) order.
void enumerate_level(int nvars, int level, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(nvars, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == nvars - 1) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[pos] = k;
      rec(pos + 1, remaining - k);
    }
  };
  if (nvars == 0) {
    if (level == 0) out.push_back(cur);
    return;
  }
  rec(0, level);
}

}  // namespace

void check_siegel(const MatC& gamma, const std::string& where) {
  require(gamma.rows() == gamma.cols(), where + ": width matrix not square");
  double sc = mat_scale(gamma);
  double asym = (gamma - gamma.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-9 * sc, where + ": width matrix not complex symmetric");
  MatR im = gamma.imag();
  Eigen::SelfAdjointEigenSolver<MatR> es(0.5 * (im + im.transpose()));
  require(es.info() == Eigen::Success, where + ": eigensolver failed");
  require(es.eigenvalues().minCoeff() > 0.0,
          where + ": Im(width) not positive definite");
}

PolyGaussian PolyGaussian::pure(const MatC& gamma, cd norm) {
  PolyGaussian g;
  g.d = static_cast<int>(gamma.rows());
  g.poly = Poly::constant(g.d, cd(1.0, 0.0));
  g.gamma = gamma;
  g.linear = VecC::Zero(g.d);
  g.norm = norm;
  return g;
}

bool PolyGaussian::has_linear(double tol) const {
  return linear.size() > 0 && linear.cwiseAbs().maxCoeff() > tol;
}

PolyGaussian PolyGaussian::scaled(cd s) const {
  PolyGaussian g = *this;
  g.norm *= s;
  return g;
}

PolyGaussian normalized_gaussian(const MatC& gamma) {
  check_siegel(gamma, "normalized_gaussian");
  int d = static_cast<int>(gamma.rows());
  double det_im = gamma.imag().determinant();
  cd norm = std::pow(kPi, -0.25 * d) * std::pow(det_im, 0.25);
  return PolyGaussian::pure(gamma, norm);
}

cd evaluate(const PolyGaussian& g, const VecR& y) {
  VecC yc = y.cast<cd>();
  cd phase = 0.5 * (yc.transpose() * (g.gamma * yc))(0);
  if (g.linear.size() > 0) phase += (g.linear.transpose() * yc)(0);
  return g.poly.eval(yc) * g.norm * std::exp(kI * phase);
}

VecC evaluate_points(const PolyGaussian& g, const std::vector<VecR>& pts) {
  VecC out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out(i) = evaluate(g, pts[i]);
  return out;
}

namespace {

// Moments m_beta = integral y^beta exp(i(y.Q y/2 + s.y)) dy computed level
// by level from integration by parts:
//   sum_k Q(j,k) m_{beta+e_k} = i beta_j m_{beta-e_j} - s_j m_beta.
std::map<std::vector<int>, cd> gaussian_moments(const MatC& Q, const VecC& s,
                                                int max_level) {
  int d = static_cast<int>(Q.rows());
  MatC miQ = -kI * Q;
  cd det_root = sqrt_det_rhp(miQ);
  Eigen::PartialPivLU<MatC> lu(Q);
  VecC Qinv_s = lu.solve(s);
  cd base = std::pow(2.0 * kPi, 0.5 * d) / det_root *
            std::exp(-0.5 * kI * (s.transpose() * Qinv_s)(0));

  std::map<std::vector<int>, cd> m;
  m[std::vector<int>(d, 0)] = base;
  for (int level = 0; level <= max_level; ++level) {
    std::vector<std::vector<int>> idx;
    enumerate_level(d, level, idx);
    for (const auto& beta : idx) {
      auto itb = m.find(beta);
      if (itb == m.end()) continue;
      VecC rhs(d);
      for (int j = 0; j < d; ++j) {
        cd r = -s(j) * itb->second;
        if (beta[j] > 0) {
          std::vector<int> bm = beta;
          bm[j] -= 1;
          r += kI * static_cast<double>(beta[j]) * m.at(bm);
        }
        rhs(j) = r;
      }
      VecC next = lu.solve(rhs);
      for (int k = 0; k < d; ++k) {
        std::vector<int> bp = beta;
        bp[k] += 1;
        m.try_emplace(bp, next(k));
      }
    }
  }
  return m;
}

}  // namespace

cd inner_product(const PolyGaussian& f, const PolyGaussian& g) {
  require(f.d == g.d, "inner_product: dimension mismatch");
  MatC Q = g.gamma - f.gamma.conjugate();
  VecC s = VecC::Zero(f.d);
  if (g.linear.size() > 0) s += g.linear;
  if (f.linear.size() > 0) s -= f.linear.conjugate();
  Poly R = f.poly.conjugated() * g.poly;
  auto m = gaussian_moments(Q, s, R.degree());
  cd acc(0.0);
  for (const auto& [pw, c] : R.terms()) acc += c * m.at(pw);
  return std::conj(f.norm) * g.norm * acc;
}

double l2_norm(const PolyGaussian& g) {
  return std::sqrt(std::max(0.0, inner_product(g, g).real()));
}

cd inner_product_quadrature(const PolyGaussian& f, const PolyGaussian& g,
                            int nodes_per_axis) {
  require(f.d == g.d, "inner_product_quadrature: dimension mismatch");
  int d = f.d;
  // conj(f) g = R(y) exp(i(y.Q y/2 + s.y)) decays like exp(-y.Im(Q) y/2).
  // Diagonalize Im(Q) and scale each Gauss-Hermite axis so the rule's
  // weight e^{-x^2} matches that decay exactly; the de-weighted integrand
  // then stays bounded, which keeps the eigenvector-roundoff in the
  // Golub-Welsch weights from being amplified at large node counts.
  MatC Q = g.gamma - f.gamma.conjugate();
  MatR imQ = Q.imag();
  Eigen::SelfAdjointEigenSolver<MatR> es(0.5 * (imQ + imQ.transpose()));
  require(es.eigenvalues().minCoeff() > 0.0,
          "inner_product_quadrature: decay matrix not positive");
  MatR U = es.eigenvectors();
  VecR lam = es.eigenvalues();
  QuadRule gh = gauss_hermite(nodes_per_axis);

  std::vector<int> counter(d, 0);
  cd acc(0.0);
  while (true) {
    VecR u(d);
    double wprod = 1.0;
    double gauss_back = 0.0;
    for (int i = 0; i < d; ++i) {
      const double xi = gh.x[counter[i]];
      const double scale = std::sqrt(2.0 / lam(i));  // y decay 1/2 per axis
      u(i) = xi * scale;
      // weight e^{-x^2} divided out below via +x^2 in the exponent
      wprod *= gh.w[counter[i]] * scale;
      gauss_back += xi * xi;
    }
    VecR y = U * u;
    VecC yc = y.cast<cd>();
    cd phase = 0.5 * (yc.transpose() * (Q * yc))(0);
    VecC s = VecC::Zero(d);
    if (g.linear.size() > 0) s += g.linear;
    if (f.linear.size() > 0) s -= f.linear.conjugate();
    phase += (s.transpose() * yc)(0);
    cd val = std::conj(f.poly.eval(yc)) * g.poly.eval(yc) *
             std::exp(kI * phase + gauss_back);
    acc += wprod * val;
    int k = 0;
    while (k < d && ++counter[k] == nodes_per_axis) counter[k++] = 0;
    if (k == d) break;
  }
  return std::conj(f.norm) * g.norm * acc;
}

PolyGaussian linear_combine(cd a, const PolyGaussian& f, cd b,
                            const PolyGaussian& g) {
  require(f.d == g.d, "linear_combine: dimension mismatch");
  require((f.gamma - g.gamma).cwiseAbs().maxCoeff() <=
              1e-12 * mat_scale(f.gamma),
          "linear_combine: envelopes differ (gamma)");
  double lin_diff = 0.0;
  if (f.linear.size() > 0 || g.linear.size() > 0) {
    VecC lf = f.linear.size() > 0 ? f.linear : VecC::Zero(f.d).eval();
    VecC lg = g.linear.size() > 0 ? g.linear : VecC::Zero(g.d).eval();
    lin_diff = (lf - lg).cwiseAbs().maxCoeff();
  }
  require(lin_diff <= 1e-12, "linear_combine: envelopes differ (linear)");
  PolyGaussian out = f;
  out.poly = f.poly.scaled(a * f.norm) + g.poly.scaled(b * g.norm);
  out.norm = cd(1.0, 0.0);
  return out;
}

namespace {

// Apply the Weyl operator of the monomial y^a eta^b to a polynomial factor P
// sitting on the envelope (gamma, linear); returns the new polynomial.
// Uses op(eta_j A) = D_j op(A) - (1/(2i)) op(d_{y_j} A), with the momentum
// operator acting as D_j: P -> (gamma y + linear)_j P - i dP/dy_j.
Poly weyl_mono_apply(const std::vector<int>& a, const std::vector<int>& b,
                     const Poly& P, const MatC& gamma, const VecC& linear) {
  int d = static_cast<int>(gamma.rows());
  int jb = -1;
  for (int j = d - 1; j >= 0; --j) {
    if (b[j] > 0) {
      jb = j;
      break;
    }
  }
  if (jb < 0) return Poly::monomial(a, cd(1.0, 0.0)) * P;
  std::vector<int> b1 = b;
  b1[jb] -= 1;
  Poly inner = weyl_mono_apply(a, b1, P, gamma, linear);
  // momentum operator on (inner * envelope)
  Poly term = inner.deriv(jb).scaled(cd(0.0, -1.0));
  for (int k = 0; k < d; ++k) {
    if (std::abs(gamma(jb, k)) == 0.0) continue;
    std::vector<int> pw(d, 0);
    pw[k] = 1;
    term = term + Poly::monomial(pw, gamma(jb, k)) * inner;
  }
  if (linear.size() > 0 && std::abs(linear(jb)) != 0.0)
    term = term + inner.scaled(linear(jb));
  if (a[jb] > 0) {
    std::vector<int> a1 = a;
    a1[jb] -= 1;
    Poly lower = weyl_mono_apply(a1, b1, P, gamma, linear);
    term = term + lower.scaled(cd(0.0, 0.5) * static_cast<double>(a[jb]));
  }
  return term;
}

}  // namespace

PolyGaussian weyl_apply(const Poly& symbol, const PolyGaussian& g,
                        int max_degree) {
  require(symbol.nvars() == 2 * g.d, "weyl_apply: symbol must have 2d vars");
  VecC lin = g.linear.size() > 0 ? g.linear : VecC::Zero(g.d).eval();
  Poly acc(g.d);
  for (const auto& [pw, c] : symbol.terms()) {
    std::vector<int> a(pw.begin(), pw.begin() + g.d);
    std::vector<int> b(pw.begin() + g.d, pw.end());
    acc = acc + weyl_mono_apply(a, b, g.poly, g.gamma, lin).scaled(c);
  }
  require(acc.degree() <= max_degree,
          "weyl_apply: polynomial degree exceeds cap");
  PolyGaussian out = g;
  out.poly = acc;
  return out;
}

Symplectic Symplectic::identity(int d) {
  return Symplectic{MatR::Identity(2 * d, 2 * d)};
}

Symplectic Symplectic::inverse() const {
  int n = d();
  MatR inv(2 * n, 2 * n);
  inv.topLeftCorner(n, n) = D().transpose();
  inv.topRightCorner(n, n) = -B().transpose();
  inv.bottomLeftCorner(n, n) = -C().transpose();
  inv.bottomRightCorner(n, n) = A().transpose();
  return Symplectic{inv};
}

double Symplectic::symplectic_defect() const {
  int n = d();
  MatR J = MatR::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = MatR::Identity(n, n);
  J.bottomLeftCorner(n, n) = -MatR::Identity(n, n);
  return (m.transpose() * J * m - J).cwiseAbs().maxCoeff();
}

PolyGaussian metaplectic_apply(const Symplectic& F, const PolyGaussian& g,
                               int max_degree) {
  require(F.d() == g.d, "metaplectic_apply: dimension mismatch");
  require(!g.has_linear(1e-14), "metaplectic_apply: linear phase unsupported");
  int d = g.d;
  MatC A = F.A().cast<cd>(), B = F.B().cast<cd>();
  MatC C = F.C().cast<cd>(), D = F.D().cast<cd>();
  MatC ApBG = A + B * g.gamma;
  Eigen::PartialPivLU<MatC> lu(ApBG);
  cd det = lu.determinant();
  require(std::abs(det) > 0.0, "metaplectic_apply: singular A + B Gamma");
  MatC gamma_new = (C + D * g.gamma) * lu.inverse();
  gamma_new = 0.5 * (gamma_new + gamma_new.transpose()).eval();
  check_siegel(gamma_new, "metaplectic_apply");

  PolyGaussian out = PolyGaussian::pure(gamma_new, g.norm / std::sqrt(det));
  if (!g.poly.is_constant()) {
    // Symbol covariance: M[F] op(P) = op(P o F^{-1}) M[F]. P depends on y
    // only, so compose with the position rows of F^{-1}.
    Symplectic Finv = F.inverse();
    MatC L(d, 2 * d);
    L.leftCols(d) = Finv.m.topLeftCorner(d, d).cast<cd>();
    L.rightCols(d) = Finv.m.topRightCorner(d, d).cast<cd>();
    Poly sym = g.poly.substitute_linear(L, VecC::Zero(d));
    out = weyl_apply(sym, out, max_degree);
  } else {
    out.norm *= g.poly.coeff(std::vector<int>(d, 0));
  }
  return out;
}

PolyGaussian fourier(const PolyGaussian& g) {
  int d = g.d;
  Eigen::PartialPivLU<MatC> lu(g.gamma);
  MatC gamma_inv = lu.inverse();
  MatC gamma_f = -gamma_inv;
  gamma_f = 0.5 * (gamma_f + gamma_f.transpose()).eval();
  check_siegel(gamma_f, "fourier");
  VecC lin = g.linear.size() > 0 ? g.linear : VecC::Zero(d).eval();
  VecC lin_f = gamma_inv * lin;
  cd extra = std::exp(-0.5 * kI * (lin.transpose() * (gamma_inv * lin))(0));
  cd norm_f = g.norm * extra / sqrt_det_rhp(-kI * g.gamma);

  // F[y_j f] = (i d/d eta_j) F[f]; on the new envelope this is the operator
  // L_j P = i dP/d eta_j - (gamma_f eta + lin_f)_j P. The L_j commute.
  Poly acc(d);
  for (const auto& [pw, c] : g.poly.terms()) {
    Poly cur = Poly::constant(d, c);
    for (int j = 0; j < d; ++j) {
      for (int rep = 0; rep < pw[j]; ++rep) {
        Poly t = cur.deriv(j).scaled(kI);
        for (int k = 0; k < d; ++k) {
          if (std::abs(gamma_f(j, k)) == 0.0) continue;
          std::vector<int> e(d, 0);
          e[k] = 1;
          t = t - Poly::monomial(e, gamma_f(j, k)) * cur;
        }
        if (std::abs(lin_f(j)) != 0.0) t = t - cur.scaled(lin_f(j));
        cur = t;
      }
    }
    acc = acc + cur;
  }
  PolyGaussian out;
  out.d = d;
  out.poly = acc;
  out.gamma = gamma_f;
  out.linear = lin_f;
  out.norm = norm_f;
  return out;
}

PolyGaussian translate(const PolyGaussian& g, const VecR& q, const VecR& p) {
  require(q.size() == g.d && p.size() == g.d, "translate: dimension mismatch");
  VecC qc = q.cast<cd>(), pc = p.cast<cd>();
  VecC lin = g.linear.size() > 0 ? g.linear : VecC::Zero(g.d).eval();
  PolyGaussian out = g;
  out.poly = g.poly.shifted(-qc);
  out.linear = lin + pc - g.gamma * qc;
  cd phase = 0.5 * (qc.transpose() * (g.gamma * qc))(0) -
             (lin.transpose() * qc)(0) - 0.5 * q.dot(p);
  out.norm = g.norm * std::exp(kI * phase);
  return out;
}

namespace {

struct TransferCore {
  cd mu_t;       // mu - alpha.beta/2 + alpha.Gamma alpha/2
  cd total;      // sqrt(pi / (-i mu_t))
  cd prefactor;  // sqrt(2 pi / (i mu))
  MatC gamma_out;
};

TransferCore transfer_core(double mu, const VecR& alpha, const VecR& beta,
                           const MatC& gamma) {
  int d = static_cast<int>(gamma.rows());
  require(alpha.size() == d && beta.size() == d,
          "transfer: coefficient dimension mismatch");
  require(std::abs(mu) > 0.0, "transfer: mu must be nonzero");
  VecC ac = alpha.cast<cd>();
  TransferCore tc;
  tc.mu_t = cd(mu - 0.5 * alpha.dot(beta), 0.0) +
            0.5 * (ac.transpose() * (gamma * ac))(0);
  require(tc.mu_t.imag() > -1e-12 * std::abs(tc.mu_t),
          "transfer: Im(mu_t) negative (invalid width)");
  require(std::abs(tc.mu_t) > 1e-14 * std::max(1.0, std::abs(mu)),
          "transfer: degenerate, 2 mu - alpha.beta + alpha.Gamma alpha ~ 0");
  tc.total = std::sqrt(kPi / (-kI * tc.mu_t));
  tc.prefactor = std::sqrt(2.0 * kPi / (kI * mu));
  VecC w = beta.cast<cd>() - gamma * ac;
  tc.gamma_out = gamma - (w * w.transpose()) / (2.0 * tc.mu_t);
  tc.gamma_out = 0.5 * (tc.gamma_out + tc.gamma_out.transpose()).eval();
  check_siegel(tc.gamma_out, "transfer");
  return tc;
}

}  // namespace

TransferResult transfer_gaussian(double mu, const VecR& alpha,
                                 const VecR& beta, const PolyGaussian& g) {
  require(g.poly.is_constant(), "transfer_gaussian: profile must be pure");
  require(!g.has_linear(1e-14), "transfer_gaussian: linear phase unsupported");
  TransferCore tc = transfer_core(mu, alpha, beta, g.gamma);
  cd c0 = g.poly.coeff(std::vector<int>(g.d, 0));
  TransferResult r;
  r.prefactor = tc.prefactor;
  r.out = PolyGaussian::pure(tc.gamma_out,
                             g.norm * c0 * tc.total / tc.prefactor);
  return r;
}

TransferResult transfer_polygaussian(double mu, const VecR& alpha,
                                     const VecR& beta, const PolyGaussian& g,
                                     int max_degree) {
  require(!g.has_linear(1e-14),
          "transfer_polygaussian: linear phase unsupported");
  PolyGaussian pure = PolyGaussian::pure(g.gamma, g.norm);
  TransferResult r = transfer_gaussian(mu, alpha, beta, pure);
  if (g.poly.is_constant()) {
    r.out.norm *= g.poly.coeff(std::vector<int>(g.d, 0));
    return r;
  }
  // T = sqrt(pi/(-i mu)) M[exp(G/(4 mu))] with G = J Hess (beta.y-alpha.eta)^2
  // and G^2 = 0, so op(P) pushes through as P composed with exp(-G/(4 mu)).
  int d = g.d;
  MatR a = alpha, b = beta;
  MatR TL = MatR::Identity(d, d) + (a * b.transpose()) / (2.0 * mu);
  MatR TR = -(a * a.transpose()) / (2.0 * mu);
  MatC L(d, 2 * d);
  L.leftCols(d) = TL.cast<cd>();
  L.rightCols(d) = TR.cast<cd>();
  Poly sym = g.poly.substitute_linear(L, VecC::Zero(d));
  r.out = weyl_apply(sym, r.out, max_degree);
  return r;
}

VecC transfer_quadrature(double mu, const VecR& alpha, const VecR& beta,
                         const PolyGaussian& g, const std::vector<VecR>& pts,
                         int nodes, double tail_sigmas) {
  require(!g.has_linear(1e-14),
          "transfer_quadrature: linear phase unsupported");
  require(std::abs(mu) > 0.0, "transfer_quadrature: mu must be nonzero");
  int d = g.d;
  VecC ac = alpha.cast<cd>(), bc = beta.cast<cd>();
  cd mu_t = cd(mu - 0.5 * alpha.dot(beta), 0.0) +
            0.5 * (ac.transpose() * (g.gamma * ac))(0);
  // Contour direction that turns e^{i mu_t s^2} into pure decay e^{-|mu_t| r^2}.
  double theta = 0.5 * (0.5 * kPi - std::arg(mu_t));
  cd dir = std::exp(kI * theta);
  double R = tail_sigmas / std::sqrt(std::abs(mu_t));
  QuadRule gl = gauss_legendre(nodes);

  VecC out(pts.size());
  for (size_t ip = 0; ip < pts.size(); ++ip) {
    VecC y = pts[ip].cast<cd>();
    // exponent in s: i mu_t s^2 + i s tau(y) + const, stationary at
    // s* = -tau / (2 mu_t)
    cd tau = (bc.transpose() * y)(0) - (ac.transpose() * (g.gamma * y))(0);
    cd s_star = -tau / (2.0 * mu_t);
    cd acc(0.0);
    for (int k = 0; k < nodes; ++k) {
      cd s = s_star + dir * (R * gl.x[k]);
      // e^{i mu s^2} (T(s alpha, s beta) g)(y) at complex s
      VecC ys = y - s * ac;
      cd expo = cd(mu, 0.0) * s * s - 0.5 * s * s * cd(alpha.dot(beta), 0.0) +
                s * (bc.transpose() * y)(0) +
                0.5 * (ys.transpose() * (g.gamma * ys))(0);
      acc += gl.w[k] * g.poly.eval(ys) * std::exp(kI * expo);
    }
    out(ip) = acc * g.norm * dir * R;
  }
  return out;
}

json poly_to_json(const Poly& p) {
  json terms = json::array();
  for (const auto& [pw, c] : p.terms()) {
    json t;
    t["pow"] = pw;
    t["re"] = c.real();
    t["im"] = c.imag();
    terms.push_back(t);
  }
  json j;
  j["nvars"] = p.nvars();
  j["terms"] = terms;
  return j;
}

Poly poly_from_json(const json& j, int expect_nvars) {
  int nv = j.at("nvars").get<int>();
  if (expect_nvars >= 0)
    require(nv == expect_nvars, "poly_from_json: unexpected variable count");
  Poly p(nv);
  for (const auto& t : j.at("terms")) {
    std::vector<int> pw = t.at("pow").get<std::vector<int>>();
    p.add_term(pw, cd(t.at("re").get<double>(), t.at("im").get<double>()));
  }
  return p;
}

namespace {

json matc_to_json(const MatC& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rrow.push_back(m(i, k).real());
      irow.push_back(m(i, k).imag());
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  json j;
  j["re"] = re;
  j["im"] = im;
  return j;
}

MatC matc_from_json(const json& j) {
  auto re = j.at("re");
  auto im = j.at("im");
  int n = static_cast<int>(re.size());
  int m = n > 0 ? static_cast<int>(re[0].size()) : 0;
  MatC out(n, m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k)
      out(i, k) = cd(re[i][k].get<double>(), im[i][k].get<double>());
  return out;
}

}  // namespace

json polygaussian_to_json(const PolyGaussian& g) {
  json j;
  j["d"] = g.d;
  j["norm"] = {{"re", g.norm.real()}, {"im", g.norm.imag()}};
  j["gamma"] = matc_to_json(g.gamma);
  if (g.has_linear(0.0)) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < g.d; ++i) {
      re.push_back(g.linear(i).real());
      im.push_back(g.linear(i).imag());
    }
    j["linear"] = {{"re", re}, {"im", im}};
  }
  j["poly"] = poly_to_json(g.poly);
  return j;
}

PolyGaussian polygaussian_from_json(const json& j) {
  PolyGaussian g;
  g.d = j.at("d").get<int>();
  g.norm = cd(j.at("norm").at("re").get<double>(),
              j.at("norm").at("im").get<double>());
  g.gamma = matc_from_json(j.at("gamma"));
  check_siegel(g.gamma, "polygaussian_from_json");
  g.linear = VecC::Zero(g.d);
  if (j.contains("linear")) {
    for (int i = 0; i < g.d; ++i)
      g.linear(i) = cd(j.at("linear").at("re")[i].get<double>(),
                       j.at("linear").at("im")[i].get<double>());
  }
  g.poly = poly_from_json(j.at("poly"), g.d);
  return g;
}

json symplectic_to_json(const Symplectic& f) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < f.m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < f.m.cols(); ++k) row.push_back(f.m(i, k));
    rows.push_back(row);
  }
  json j;
  j["m"] = rows;
  return j;
}

Symplectic symplectic_from_json(const json& j) {
  auto rows = j.at("m");
  int n = static_cast<int>(rows.size());
  MatR m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = rows[i][k].get<double>();
  return Symplectic{m};
}

}  // namespace wx
