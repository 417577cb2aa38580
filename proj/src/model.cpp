#include "wavecross/model.hpp"

#include <cmath>

namespace wx {

namespace {

const cd kI(0.0, 1.0);

int band_sign(int band) {
  require(band == 1 || band == 2, "band index must be 1 or 2");
  return band == 1 ? 1 : -1;
}

}  // namespace

VecR TwoLevelModel::pack(double t, const VecR& z) const {
  require(z.size() == 2 * d, "model: phase-space point has wrong dimension");
  VecR x(1 + 2 * d);
  x(0) = t;
  x.tail(2 * d) = z;
  return x;
}

double TwoLevelModel::band_h(int band, double t, const VecR& z) const {
  VecR x = pack(t, z);
  return v.value(x) + band_sign(band) * f.value(x);
}

double TwoLevelModel::band_dt(int band, double t, const VecR& z) const {
  VecR x = pack(t, z);
  return v.d1(0, x) + band_sign(band) * f.d1(0, x);
}

VecR TwoLevelModel::band_grad(int band, double t, const VecR& z) const {
  VecR x = pack(t, z);
  int s = band_sign(band);
  VecR g(2 * d);
  for (int i = 0; i < 2 * d; ++i)
    g(i) = v.d1(1 + i, x) + s * f.d1(1 + i, x);
  return g;
}

MatR TwoLevelModel::band_hess(int band, double t, const VecR& z) const {
  VecR x = pack(t, z);
  int s = band_sign(band);
  MatR h(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i)
    for (int j = i; j < 2 * d; ++j) {
      h(i, j) = v.d2(1 + i, 1 + j, x) + s * f.d2(1 + i, 1 + j, x);
      h(j, i) = h(i, j);
    }
  return h;
}

double TwoLevelModel::band_d3(int band, double t, const VecR& z, int i, int j,
                              int k) const {
  VecR x = pack(t, z);
  return v.d3(1 + i, 1 + j, 1 + k, x) +
         band_sign(band) * f.d3(1 + i, 1 + j, 1 + k, x);
}

namespace {

bool field_has_cubic_z_terms(const ScalarField& f, int d) {
  for (const auto& t : f.poly_terms()) {
    int zdeg = 0;
    for (int i = 0; i < 2 * d; ++i) zdeg += t.pw[1 + i];
    if (zdeg >= 3) return true;
  }
  for (const auto& t : f.trig_terms()) {
    for (int i = 0; i < 2 * d; ++i)
      if (t.k[1 + i] != 0.0) return true;
  }
  return false;
}

}  // namespace

bool TwoLevelModel::band_has_cubic_terms(int band) const {
  band_sign(band);
  return field_has_cubic_z_terms(v, d) || field_has_cubic_z_terms(f, d);
}

double TwoLevelModel::gap_rate_tracked(double t, const VecR& z) const {
  VecR x = pack(t, z);
  double r = f.d1(0, x);
  for (int j = 0; j < d; ++j)
    r += v.d1(1 + d + j, x) * f.d1(1 + j, x) -
         v.d1(1 + j, x) * f.d1(1 + d + j, x);
  return r;
}

double TwoLevelModel::f_rate_along_band(int band, double t,
                                        const VecR& z) const {
  VecR x = pack(t, z);
  int s = band_sign(band);
  double r = f.d1(0, x);
  for (int j = 0; j < d; ++j) {
    double hq = v.d1(1 + j, x) + s * f.d1(1 + j, x);
    double hp = v.d1(1 + d + j, x) + s * f.d1(1 + d + j, x);
    r += hp * f.d1(1 + j, x) - hq * f.d1(1 + d + j, x);
  }
  return r;
}

Eigen::Vector3d TwoLevelModel::u_vec(double t, const VecR& z) const {
  VecR x = pack(t, z);
  if (angle_frame) {
    double th = theta.value(x);
    return {std::cos(th), std::sin(th), 0.0};
  }
  Eigen::Vector3d u{u_raw[0].value(x), u_raw[1].value(x), u_raw[2].value(x)};
  require(std::abs(u.squaredNorm() - 1.0) <= 1e-6,
          "model: |u| deviates from 1 at evaluation point");
  return u;
}

Eigen::Vector3d TwoLevelModel::u_deriv(int var, double t, const VecR& z) const {
  VecR x = pack(t, z);
  if (angle_frame) {
    double th = theta.value(x);
    double dth = theta.d1(var, x);
    return {-std::sin(th) * dth, std::cos(th) * dth, 0.0};
  }
  return {u_raw[0].d1(var, x), u_raw[1].d1(var, x), u_raw[2].d1(var, x)};
}

Mat2c TwoLevelModel::mmat(double t, const VecR& z) const {
  Eigen::Vector3d u = u_vec(t, z);
  Mat2c m;
  m << cd(u(0), 0.0), cd(u(1), -u(2)), cd(u(1), u(2)), cd(-u(0), 0.0);
  return m;
}

Mat2c TwoLevelModel::hmat(double t, const VecR& z) const {
  VecR x = pack(t, z);
  return v.value(x) * Mat2c::Identity() + f.value(x) * mmat(t, z);
}

Mat2c TwoLevelModel::projector(int band, double t, const VecR& z) const {
  double s = band_sign(band);
  return 0.5 * (Mat2c::Identity() + s * mmat(t, z));
}

Mat2c TwoLevelModel::projector_deriv(int band, int var, double t,
                                     const VecR& z) const {
  double s = band_sign(band);
  Eigen::Vector3d du = u_deriv(var, t, z);
  Mat2c m;
  m << cd(du(0), 0.0), cd(du(1), -du(2)), cd(du(1), du(2)), cd(-du(0), 0.0);
  return 0.5 * s * m;
}

Vec2c TwoLevelModel::frame(int band, double t, const VecR& z) const {
  band_sign(band);
  VecR x = pack(t, z);
  if (angle_frame) {
    double half = 0.5 * theta.value(x);
    if (band == 1) return Vec2c(std::cos(half), std::sin(half));
    return Vec2c(-std::sin(half), std::cos(half));
  }
  Eigen::Vector3d u = u_vec(t, z);
  Vec2c v1;
  if (1.0 + u(0) >= 0.2) {
    double r = std::sqrt(2.0 * (1.0 + u(0)));
    v1 = Vec2c(cd(1.0 + u(0), 0.0) / r, cd(u(1), u(2)) / r);
  } else {
    double r = std::sqrt(2.0 * (1.0 - u(0)));
    v1 = Vec2c(cd(u(1), -u(2)) / r, cd(1.0 - u(0), 0.0) / r);
  }
  if (band == 1) return v1;
  return Vec2c(-std::conj(v1(1)), std::conj(v1(0)));
}

Vec2c TwoLevelModel::frame_deriv(int band, int var, double t,
                                 const VecR& z) const {
  band_sign(band);
  require(var >= 0 && var <= 2 * d, "frame_deriv: variable out of range");
  if (angle_frame) {
    // d/dx (cos t/2, sin t/2) = (t_x/2) (-sin t/2, cos t/2): each band's
    // derivative is proportional to the other band's frame.
    VecR x = pack(t, z);
    const double half_rate = 0.5 * theta.d1(var, x);
    if (band == 1) return half_rate * frame(2, t, z);
    return -half_rate * frame(1, t, z);
  }
  // Richardson difference of the chart-based frame
  auto eval = [&](double delta) -> Vec2c {
    if (var == 0) return frame(band, t + delta, z);
    VecR zs = z;
    zs[var - 1] += delta;
    return frame(band, t, zs);
  };
  const double base = var == 0 ? std::abs(t) : std::abs(z[var - 1]);
  const double h = 1e-5 * std::max(1.0, base);
  const Vec2c d_h = (eval(h) - eval(-h)) / (2.0 * h);
  const Vec2c d_h2 = (eval(0.5 * h) - eval(-0.5 * h)) / h;
  return (4.0 * d_h2 - d_h) / 3.0;
}

Mat2c TwoLevelModel::theta_matrix(int band, double t, const VecR& z) const {
  int s = band_sign(band);
  VecR x = pack(t, z);
  Mat2c Pi = projector(band, t, z);
  Mat2c PiPerp = Mat2c::Identity() - Pi;

  // {Pi, Pi} = sum_j dPi/dp_j dPi/dq_j - dPi/dq_j dPi/dp_j
  Mat2c pb = Mat2c::Zero();
  for (int j = 0; j < d; ++j) {
    Mat2c dq = projector_deriv(band, 1 + j, t, z);
    Mat2c dp = projector_deriv(band, 1 + d + j, t, z);
    pb += dp * dq - dq * dp;
  }
  // h_band - h_other = 2 s f
  Mat2c omega = -(s * f.value(x)) * (Pi * pb * Pi);

  // K = PiPerp (d_t Pi + {h_band, Pi}) Pi
  Mat2c dods = projector_deriv(band, 0, t, z);
  for (int j = 0; j < d; ++j) {
    double hq = v.d1(1 + j, x) + s * f.d1(1 + j, x);
    double hp = v.d1(1 + d + j, x) + s * f.d1(1 + d + j, x);
    dods += hp * projector_deriv(band, 1 + j, t, z) -
            hq * projector_deriv(band, 1 + d + j, t, z);
  }
  Mat2c K = PiPerp * dods * Pi;

  return kI * (omega + K - K.adjoint());
}

Mat2c TwoLevelModel::theta_matrix_dz(int band, int k, double t,
                                     const VecR& z) const {
  double h = 1e-4 * std::max(1.0, std::abs(z(k)));
  auto diff = [&](double step) {
    VecR zp = z, zm = z;
    zp(k) += step;
    zm(k) -= step;
    return ((theta_matrix(band, t, zp) - theta_matrix(band, t, zm)) /
            (2.0 * step))
        .eval();
  };
  Mat2c d1 = diff(h), d2 = diff(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

void TwoLevelModel::validate(const VecR& sample_center, double sample_radius,
                             std::uint64_t seed) const {
  if (angle_frame) return;
  Rng rng(seed);
  for (int it = 0; it < 200; ++it) {
    VecR z(2 * d);
    for (int i = 0; i < 2 * d; ++i)
      z(i) = sample_center(i) + sample_radius * (2.0 * rng.uniform01() - 1.0);
    double tt = sample_radius * (2.0 * rng.uniform01() - 1.0);
    VecR x = pack(tt, z);
    double n2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      double uc = u_raw[c].value(x);
      n2 += uc * uc;
    }
    require(std::abs(n2 - 1.0) <= 1e-8,
            "model: raw frame field is not unit length (|u|^2 - 1 exceeds "
            "1e-8 on sample)");
  }
}

namespace {

// lift a (t, x) field into (t, q, p) phase space
ScalarField lift_position(const ScalarField& g, int d) {
  require(g.nvars() == 1 + d, "lift_position: field must have 1+d variables");
  std::vector<int> slot(1 + d);
  slot[0] = 0;
  for (int i = 0; i < d; ++i) slot[1 + i] = 1 + i;
  return g.lifted(1 + 2 * d, slot);
}

// lift a xi-only field into (t, q, p) phase space
ScalarField lift_momentum(const ScalarField& g, int d) {
  require(g.nvars() == d, "lift_momentum: field must have d variables");
  std::vector<int> slot(d);
  for (int i = 0; i < d; ++i) slot[i] = 1 + d + i;
  return g.lifted(1 + 2 * d, slot);
}

ScalarField kinetic_term(int d) {
  ScalarField k(1 + 2 * d);
  for (int j = 0; j < d; ++j) {
    std::vector<int> pw(1 + 2 * d, 0);
    pw[1 + d + j] = 2;
    k.add_poly(0.5, pw);
  }
  return k;
}

ScalarField field_sum(const ScalarField& a, const ScalarField& b) {
  require(a.nvars() == b.nvars(), "field_sum: variable mismatch");
  ScalarField out = a;
  for (const auto& t : b.poly_terms()) out.add_poly(t.c, t.pw);
  for (const auto& t : b.trig_terms())
    out.add_trig(t.amp, t.k, t.phase, t.is_sin);
  return out;
}

}  // namespace

TwoLevelModel make_schrodinger(int d, const ScalarField& pot_v,
                               const ScalarField& pot_f,
                               const ScalarField& pot_theta) {
  TwoLevelModel m;
  m.kind = ModelKind::kSchrodinger;
  m.d = d;
  m.pot_v = pot_v;
  m.pot_f = pot_f;
  m.pot_theta = pot_theta;
  m.kinetic_quadratic = true;
  m.v = field_sum(lift_position(pot_v, d), kinetic_term(d));
  m.f = lift_position(pot_f, d);
  m.theta = lift_position(pot_theta, d);
  m.angle_frame = true;
  return m;
}

TwoLevelModel make_pointwise(int d, const ScalarField& pot_v,
                             const ScalarField& pot_f,
                             const ScalarField& pot_theta) {
  TwoLevelModel m;
  m.kind = ModelKind::kPointwise;
  m.d = d;
  m.pot_v = pot_v;
  m.pot_f = pot_f;
  m.pot_theta = pot_theta;
  m.kinetic_quadratic = false;
  m.v = lift_position(pot_v, d);
  m.f = lift_position(pot_f, d);
  m.theta = lift_position(pot_theta, d);
  m.angle_frame = true;
  return m;
}

TwoLevelModel make_bloch(int d, const ScalarField& kin_a0,
                         const ScalarField& kin_f,
                         const ScalarField& kin_theta,
                         const ScalarField& pot_w) {
  TwoLevelModel m;
  m.kind = ModelKind::kBloch;
  m.d = d;
  m.kin_a0 = kin_a0;
  m.kin_f = kin_f;
  m.kin_theta = kin_theta;
  m.pot_v = pot_w;
  m.v = field_sum(lift_momentum(kin_a0, d), lift_position(pot_w, d));
  m.f = lift_momentum(kin_f, d);
  m.theta = lift_momentum(kin_theta, d);
  m.angle_frame = true;
  return m;
}

TwoLevelModel make_general(int d, const ScalarField& v, const ScalarField& f,
                           const ScalarField& theta) {
  TwoLevelModel m;
  m.kind = ModelKind::kGeneral;
  m.d = d;
  require(v.nvars() == 1 + 2 * d && f.nvars() == 1 + 2 * d &&
              theta.nvars() == 1 + 2 * d,
          "make_general: fields must have 1+2d variables");
  m.v = v;
  m.f = f;
  m.theta = theta;
  m.angle_frame = true;
  return m;
}

TwoLevelModel make_general_raw(int d, const ScalarField& v,
                               const ScalarField& f,
                               const std::array<ScalarField, 3>& u,
                               const VecR& sample_center,
                               double sample_radius) {
  TwoLevelModel m;
  m.kind = ModelKind::kGeneral;
  m.d = d;
  m.v = v;
  m.f = f;
  m.angle_frame = false;
  m.u_raw = u;
  m.validate(sample_center, sample_radius);
  return m;
}

VecR ScalarModel::pack(double t, const VecR& z) const {
  require(z.size() == 2 * d, "scalar model: wrong phase-space dimension");
  VecR x(1 + 2 * d);
  x(0) = t;
  x.tail(2 * d) = z;
  return x;
}

VecR ScalarModel::grad(double t, const VecR& z) const {
  VecR x = pack(t, z);
  VecR g(2 * d);
  for (int i = 0; i < 2 * d; ++i) g(i) = h.d1(1 + i, x);
  return g;
}

MatR ScalarModel::hess(double t, const VecR& z) const {
  VecR x = pack(t, z);
  MatR out(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i)
    for (int j = i; j < 2 * d; ++j) {
      out(i, j) = h.d2(1 + i, 1 + j, x);
      out(j, i) = out(i, j);
    }
  return out;
}

double ScalarModel::d3(double t, const VecR& z, int i, int j, int k) const {
  VecR x = pack(t, z);
  return h.d3(1 + i, 1 + j, 1 + k, x);
}

bool ScalarModel::has_cubic_terms() const {
  return field_has_cubic_z_terms(h, d);
}

ScalarModel make_scalar_separable(int d, const ScalarField& pot) {
  ScalarModel m;
  m.d = d;
  m.separable = true;
  m.pot = pot;
  m.h = field_sum(lift_position(pot, d), kinetic_term(d));
  return m;
}

ScalarModel make_scalar_general(int d, const ScalarField& h) {
  ScalarModel m;
  m.d = d;
  require(h.nvars() == 1 + 2 * d, "make_scalar_general: field needs 1+2d vars");
  m.h = h;
  return m;
}

json two_level_to_json(const TwoLevelModel& m) {
  json j;
  switch (m.kind) {
    case ModelKind::kGeneral:
      j["type"] = "general";
      break;
    case ModelKind::kPointwise:
      j["type"] = "pointwise";
      break;
    case ModelKind::kSchrodinger:
      j["type"] = "schrodinger";
      break;
    case ModelKind::kBloch:
      j["type"] = "bloch";
      break;
  }
  j["d"] = m.d;
  require(m.angle_frame, "two_level_to_json: raw frames are not serialized");
  switch (m.kind) {
    case ModelKind::kGeneral:
      j["v"] = m.v.to_json();
      j["f"] = m.f.to_json();
      j["theta"] = m.theta.to_json();
      break;
    case ModelKind::kPointwise:
    case ModelKind::kSchrodinger:
      j["pot_v"] = m.pot_v.to_json();
      j["pot_f"] = m.pot_f.to_json();
      j["pot_theta"] = m.pot_theta.to_json();
      break;
    case ModelKind::kBloch:
      j["kin_a0"] = m.kin_a0.to_json();
      j["kin_f"] = m.kin_f.to_json();
      j["kin_theta"] = m.kin_theta.to_json();
      j["pot_w"] = m.pot_v.to_json();
      break;
  }
  return j;
}

TwoLevelModel two_level_from_json(const json& j) {
  std::string type = j.at("type").get<std::string>();
  int d = j.at("d").get<int>();
  if (type == "general") {
    return make_general(d, ScalarField::from_json(j.at("v"), 1 + 2 * d),
                        ScalarField::from_json(j.at("f"), 1 + 2 * d),
                        ScalarField::from_json(j.at("theta"), 1 + 2 * d));
  }
  if (type == "pointwise" || type == "schrodinger") {
    ScalarField pv = ScalarField::from_json(j.at("pot_v"), 1 + d);
    ScalarField pf = ScalarField::from_json(j.at("pot_f"), 1 + d);
    ScalarField pt = ScalarField::from_json(j.at("pot_theta"), 1 + d);
    return type == "schrodinger" ? make_schrodinger(d, pv, pf, pt)
                                 : make_pointwise(d, pv, pf, pt);
  }
  if (type == "bloch") {
    return make_bloch(d, ScalarField::from_json(j.at("kin_a0"), d),
                      ScalarField::from_json(j.at("kin_f"), d),
                      ScalarField::from_json(j.at("kin_theta"), d),
                      ScalarField::from_json(j.at("pot_w"), 1 + d));
  }
  fail("model type must be one of general|pointwise|schrodinger|bloch");
}

}  // namespace wx
