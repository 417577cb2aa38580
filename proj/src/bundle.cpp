#include "wavecross/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace wx {

namespace {

const cd kI(0.0, 1.0);

// Dormand-Prince 5(4) tableau.
const double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
const double kC[7] = {0.0,     1.0 / 5, 3.0 / 10, 4.0 / 5,
                      8.0 / 9, 1.0,     1.0};
const double kB5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                       -2187.0 / 6784, 11.0 / 84, 0.0};
const double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695,
                       393.0 / 640,       -92097.0 / 339200,
                       187.0 / 2100,      1.0 / 40};

}  // namespace

OdeResult rk45_integrate(const Rhs& rhs, const VecR& y0, double t0, double t1,
                         const std::vector<double>& collect,
                         const OdeOpts& opts, const StepCb& on_accept) {
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  require(span >= 0.0, "rk45: empty span");
  for (size_t i = 0; i < collect.size(); ++i) {
    require(dir * (collect[i] - t0) >= -1e-12 &&
                dir * (t1 - collect[i]) >= -1e-12,
            "rk45: collect time outside span");
    if (i > 0)
      require(dir * (collect[i] - collect[i - 1]) >= 0.0,
              "rk45: collect times not sorted");
  }

  OdeResult out;
  VecR y = y0;
  double t = t0;
  size_t ci = 0;
  const double teps = 1e-12 * std::max(1.0, span);

  auto record_if_collect = [&](double tt, const VecR& yy) {
    while (ci < collect.size() && std::abs(collect[ci] - tt) <= teps) {
      out.t.push_back(collect[ci]);
      out.y.push_back(yy);
      ++ci;
    }
  };
  record_if_collect(t, y);

  double h = dir * std::min(opts.h_init, std::max(span, 1e-30));
  std::vector<VecR> k(7);
  int rejects_in_row = 0;
  while (dir * (t1 - t) > teps) {
    // clamp to the next collect time / end point
    double t_target = t1;
    if (ci < collect.size() && dir * (collect[ci] - t) > teps)
      t_target = collect[ci];
    if (std::abs(h) > std::abs(t_target - t)) h = t_target - t;
    if (std::abs(h) > opts.h_max) h = dir * opts.h_max;

    k[0] = rhs(t, y);
    for (int s = 1; s < 7; ++s) {
      VecR ys = y;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) ys += (h * kA[s][j]) * k[j];
      k[s] = rhs(t + kC[s] * h, ys);
    }
    VecR y5 = y, y4 = y;
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) y5 += (h * kB5[s]) * k[s];
      if (kB4[s] != 0.0) y4 += (h * kB4[s]) * k[s];
    }
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double sc =
          opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
      double e = (y5(i) - y4(i)) / sc;
      err += e * e;
    }
    err = std::sqrt(err / std::max<Eigen::Index>(1, y.size()));

    if (err <= 1.0) {
      double t_new = t + h;
      if (std::abs(t_new - t_target) <= teps) t_new = t_target;
      if (on_accept) on_accept(t, y, t_new, y5);
      t = t_new;
      y = y5;
      record_if_collect(t, y);
      rejects_in_row = 0;
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
      if (std::abs(h) > opts.h_max) h = dir * opts.h_max;
    } else {
      double fac = 0.9 * std::pow(err, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
      require(++rejects_in_row < 60, "rk45: step size collapsed");
      require(std::abs(h) > 1e-15 * std::max(1.0, std::abs(t)),
              "rk45: step underflow");
    }
  }
  record_if_collect(t1, y);
  require(ci == collect.size(), "rk45: failed to reach all collect times");
  return out;
}

BundleState BundleState::initial(int d, const VecR& z0, const Vec2c& Y0) {
  BundleState s;
  s.t = 0.0;
  s.z = z0;
  s.S = 0.0;
  s.F = MatR::Identity(2 * d, 2 * d);
  s.Y = Y0;
  s.has_W = false;
  s.W.resize(2, 2 * d);
  s.W.setZero();
  return s;
}

VecR pack_bundle(const BundleState& s, int d) {
  int n2 = 2 * d;
  int nf = n2 * n2;
  int len = n2 + 1 + nf + 4 + (s.has_W ? 4 * n2 : 0);
  VecR y(len);
  y.head(n2) = s.z;
  y(n2) = s.S;
  int off = n2 + 1;
  for (int c = 0; c < n2; ++c)
    for (int r = 0; r < n2; ++r) y(off++) = s.F(r, c);
  for (int i = 0; i < 2; ++i) {
    y(off++) = s.Y(i).real();
    y(off++) = s.Y(i).imag();
  }
  if (s.has_W) {
    for (int c = 0; c < n2; ++c)
      for (int r = 0; r < 2; ++r) {
        y(off++) = s.W(r, c).real();
        y(off++) = s.W(r, c).imag();
      }
  }
  return y;
}

BundleState unpack_bundle(const VecR& y, int d, bool has_W, double t) {
  int n2 = 2 * d;
  BundleState s;
  s.t = t;
  s.z = y.head(n2);
  s.S = y(n2);
  s.F.resize(n2, n2);
  int off = n2 + 1;
  for (int c = 0; c < n2; ++c)
    for (int r = 0; r < n2; ++r) s.F(r, c) = y(off++);
  for (int i = 0; i < 2; ++i) {
    s.Y(i) = cd(y(off), y(off + 1));
    off += 2;
  }
  s.has_W = has_W;
  s.W.resize(2, n2);
  s.W.setZero();
  if (has_W) {
    for (int c = 0; c < n2; ++c)
      for (int r = 0; r < 2; ++r) {
        s.W(r, c) = cd(y(off), y(off + 1));
        off += 2;
      }
  }
  return s;
}

namespace {

MatR apply_J(const MatR& m, int d) {
  // J [[X_q],[X_p]] = [[X_p],[-X_q]] row-block swap
  MatR out(2 * d, m.cols());
  out.topRows(d) = m.bottomRows(d);
  out.bottomRows(d) = -m.topRows(d);
  return out;
}

}  // namespace

Rhs band_bundle_rhs(const TwoLevelModel& model, int band, bool with_W) {
  int d = model.d;
  return [=, &model](double t, const VecR& y) -> VecR {
    BundleState s = unpack_bundle(y, d, with_W, t);
    VecR grad = model.band_grad(band, t, s.z);
    MatR hess = model.band_hess(band, t, s.z);

    BundleState ds;
    ds.z.resize(2 * d);
    ds.z.head(d) = grad.tail(d);
    ds.z.tail(d) = -grad.head(d);
    ds.S = s.z.tail(d).dot(grad.tail(d)) - model.band_h(band, t, s.z);
    MatR jh = apply_J(hess, d);
    ds.F = jh * s.F;
    Mat2c theta = model.theta_matrix(band, t, s.z);
    ds.Y = -kI * (theta * s.Y);
    ds.has_W = with_W;
    ds.W.resize(2, 2 * d);
    ds.W.setZero();
    if (with_W) {
      ds.W = -kI * (theta * s.W) - (s.W * jh.cast<cd>());
      for (int kk = 0; kk < 2 * d; ++kk) {
        Mat2c dth = model.theta_matrix_dz(band, kk, t, s.z);
        ds.W.col(kk) -= kI * (dth * s.Y);
      }
    }
    return pack_bundle(ds, d);
  };
}

std::vector<BundleState> integrate_band(const TwoLevelModel& model, int band,
                                        const BundleState& s0, double t1,
                                        const std::vector<double>& collect,
                                        const OdeOpts& opts,
                                        const StepCb& on_accept) {
  Rhs rhs = band_bundle_rhs(model, band, s0.has_W);
  OdeResult r = rk45_integrate(rhs, pack_bundle(s0, model.d), s0.t, t1,
                               collect, opts, on_accept);
  std::vector<BundleState> out;
  out.reserve(r.t.size());
  for (size_t i = 0; i < r.t.size(); ++i)
    out.push_back(unpack_bundle(r.y[i], model.d, s0.has_W, r.t[i]));
  return out;
}

ScalarBundleState ScalarBundleState::initial(int d, const VecR& z0) {
  ScalarBundleState s;
  s.z = z0;
  s.S = 0.0;
  s.F = MatR::Identity(2 * d, 2 * d);
  return s;
}

VecR pack_scalar_bundle(const ScalarBundleState& s, int d) {
  int n2 = 2 * d;
  VecR y(n2 + 1 + n2 * n2);
  y.head(n2) = s.z;
  y(n2) = s.S;
  int off = n2 + 1;
  for (int c = 0; c < n2; ++c)
    for (int r = 0; r < n2; ++r) y(off++) = s.F(r, c);
  return y;
}

ScalarBundleState unpack_scalar_bundle(const VecR& y, int d, double t) {
  int n2 = 2 * d;
  ScalarBundleState s;
  s.t = t;
  s.z = y.head(n2);
  s.S = y(n2);
  s.F.resize(n2, n2);
  int off = n2 + 1;
  for (int c = 0; c < n2; ++c)
    for (int r = 0; r < n2; ++r) s.F(r, c) = y(off++);
  return s;
}

Rhs scalar_bundle_rhs(const ScalarModel& model) {
  int d = model.d;
  return [=, &model](double t, const VecR& y) -> VecR {
    ScalarBundleState s = unpack_scalar_bundle(y, d, t);
    VecR grad = model.grad(t, s.z);
    MatR hess = model.hess(t, s.z);
    ScalarBundleState ds;
    ds.z.resize(2 * d);
    ds.z.head(d) = grad.tail(d);
    ds.z.tail(d) = -grad.head(d);
    ds.S = s.z.tail(d).dot(grad.tail(d)) - model.value(t, s.z);
    ds.F = apply_J(hess, d) * s.F;
    return pack_scalar_bundle(ds, d);
  };
}

std::vector<ScalarBundleState> integrate_scalar(
    const ScalarModel& model, const ScalarBundleState& s0, double t1,
    const std::vector<double>& collect, const OdeOpts& opts,
    const StepCb& on_accept) {
  Rhs rhs = scalar_bundle_rhs(model);
  OdeResult r = rk45_integrate(rhs, pack_scalar_bundle(s0, model.d), s0.t, t1,
                               collect, opts, on_accept);
  std::vector<ScalarBundleState> out;
  out.reserve(r.t.size());
  for (size_t i = 0; i < r.t.size(); ++i)
    out.push_back(unpack_scalar_bundle(r.y[i], model.d, r.t[i]));
  return out;
}

}  // namespace wx
