#include "wavecross/crossing.hpp"

#include <cmath>

#include "wavecross/gaussian.hpp"

namespace wx {

namespace {
const cd kI(0.0, 1.0);
}

CrossingEvent crossing_parameters(const TwoLevelModel& model, double t,
                                  const VecR& z, const Vec2c& Y_in,
                                  const CrossingOpts& opts) {
  int d = model.d;
  VecR x = model.pack(t, z);
  CrossingEvent e;
  e.t = t;
  e.z = z;
  e.Y_in = Y_in;

  e.mu = -model.gap_rate_tracked(t, z);
  e.alpha.resize(d);
  e.beta.resize(d);
  for (int j = 0; j < d; ++j) {
    e.alpha(j) = -2.0 * model.f.d1(1 + d + j, x);
    e.beta(j) = 2.0 * model.f.d1(1 + j, x);
  }

  // transversality scale: time rate plus advection rate of the gap
  VecR grad_gap(2 * d), jgrad_v(2 * d);
  for (int j = 0; j < d; ++j) {
    grad_gap(j) = -2.0 * model.f.d1(1 + j, x);
    grad_gap(d + j) = -2.0 * model.f.d1(1 + d + j, x);
    jgrad_v(j) = model.v.d1(1 + d + j, x);
    jgrad_v(d + j) = -model.v.d1(1 + j, x);
  }
  e.char_rate = std::max(
      1.0, std::abs(-2.0 * model.f.d1(0, x)) + grad_gap.norm() * jgrad_v.norm());
  require(std::abs(e.mu) >= opts.mu_min_factor * e.char_rate,
          "crossing: |mu| below transversality threshold (tangential "
          "crossing not supported)");
  e.prefactor = std::sqrt(2.0 * kPi / (kI * e.mu));

  // coupling (d_t Pi2 + {v, Pi2}) applied to the incoming vector
  Mat2c op = model.projector_deriv(2, 0, t, z);
  for (int j = 0; j < d; ++j) {
    op += model.v.d1(1 + d + j, x) * model.projector_deriv(2, 1 + j, t, z) -
          model.v.d1(1 + j, x) * model.projector_deriv(2, 1 + d + j, t, z);
  }
  Vec2c w = op * Y_in;
  e.gamma_coupling = w.norm();
  if (e.gamma_coupling <= opts.gamma_min) {
    e.zero_transfer = true;
    e.V2.setZero();
    e.gamma_coupling = 0.0;
  } else {
    Mat2c Pi2 = model.projector(2, t, z);
    e.V2 = -(Pi2 * w) / e.gamma_coupling;
    // Pi2 w = w up to higher-order terms off the crossing set; normalize so
    // V2 is exactly unit.
    double n = e.V2.norm();
    require(n > 0.5, "crossing: receiving vector projection degenerated");
    e.V2 /= n;
  }
  e.f_residual = std::abs(model.half_gap(t, z));
  return e;
}

CrossingScan scan_for_crossing(const TwoLevelModel& model, int band,
                               const BundleState& s0, double t1,
                               const OdeOpts& ode_opts,
                               const CrossingOpts& opts) {
  require(band == 1, "scan_for_crossing: transfer is modeled from band 1");
  CrossingScan out;

  struct Bracket {
    double ta, tb;
    VecR ya;
  };
  std::vector<Bracket> brackets;
  double f_prev = model.half_gap(s0.t, s0.z);

  auto cb = [&](double ta, const VecR& ya, double tb, const VecR& yb) {
    BundleState sb = unpack_bundle(yb, model.d, s0.has_W, tb);
    double f_new = model.half_gap(tb, sb.z);
    if ((f_prev < 0.0) != (f_new < 0.0) || f_new == 0.0)
      brackets.push_back({ta, tb, ya});
    f_prev = f_new;
  };

  integrate_band(model, band, s0, t1, {}, ode_opts, cb);
  if (brackets.empty()) return out;

  // refine the first bracket with safeguarded Newton on f(t, z(t))
  const Bracket& br = brackets.front();
  BundleState sa = unpack_bundle(br.ya, model.d, s0.has_W, br.ta);
  double lo = br.ta, hi = br.tb;
  double f_lo = model.half_gap(lo, sa.z);
  double t_cur = 0.5 * (lo + hi);
  BundleState s_cur;
  double f_cur = 0.0;

  auto eval_at = [&](double tt) -> BundleState {
    if (tt == sa.t) return sa;
    auto states = integrate_band(model, band, sa, tt, {tt}, ode_opts);
    require(!states.empty(), "crossing refine: integration failed");
    return states.back();
  };

  double f_scale = std::max({std::abs(f_lo), 1e-6});
  bool converged = false;
  for (int it = 0; it < opts.max_refine_iters; ++it) {
    s_cur = eval_at(t_cur);
    f_cur = model.half_gap(t_cur, s_cur.z);
    f_scale = std::max(f_scale, std::abs(f_cur));
    if (std::abs(f_cur) <= opts.f_tol_factor * f_scale) {
      converged = true;
      break;
    }
    // keep the bracket
    if ((f_cur < 0.0) == (f_lo < 0.0)) {
      lo = t_cur;
      f_lo = f_cur;
    } else {
      hi = t_cur;
    }
    double rate = model.f_rate_along_band(band, t_cur, s_cur.z);
    double t_newton = (rate != 0.0) ? t_cur - f_cur / rate : t_cur;
    if (t_newton > std::min(lo, hi) && t_newton < std::max(lo, hi) &&
        rate != 0.0) {
      if (std::abs(t_newton - t_cur) <=
          1e-15 * std::max(1.0, std::abs(t_cur))) {
        converged = true;
        t_cur = t_newton;
        s_cur = eval_at(t_cur);
        f_cur = model.half_gap(t_cur, s_cur.z);
        break;
      }
      t_cur = t_newton;
    } else {
      t_cur = 0.5 * (lo + hi);
    }
    if (std::abs(hi - lo) <= 1e-15 * std::max(1.0, std::abs(t_cur))) {
      converged = true;
      s_cur = eval_at(t_cur);
      f_cur = model.half_gap(t_cur, s_cur.z);
      break;
    }
  }
  require(converged, "crossing refine: root iteration did not converge");

  CrossingEvent e = crossing_parameters(model, t_cur, s_cur.z, s_cur.Y, opts);
  e.S = s_cur.S;
  e.F = s_cur.F;
  e.f_residual = std::abs(f_cur);
  out.event = e;
  out.state_at_event = s_cur;

  for (size_t i = 1; i < brackets.size(); ++i)
    out.later_sign_changes.push_back(0.5 * (brackets[i].ta + brackets[i].tb));
  return out;
}

json crossing_to_json(const CrossingEvent& e) {
  json j;
  j["t"] = e.t;
  j["z"] = std::vector<double>(e.z.data(), e.z.data() + e.z.size());
  j["S"] = e.S;
  j["mu"] = e.mu;
  j["alpha"] =
      std::vector<double>(e.alpha.data(), e.alpha.data() + e.alpha.size());
  j["beta"] =
      std::vector<double>(e.beta.data(), e.beta.data() + e.beta.size());
  j["prefactor"] = {{"re", e.prefactor.real()}, {"im", e.prefactor.imag()}};
  j["gamma_coupling"] = e.gamma_coupling;
  j["zero_transfer"] = e.zero_transfer;
  json v2 = json::array();
  for (int i = 0; i < 2; ++i)
    v2.push_back({{"re", e.V2(i).real()}, {"im", e.V2(i).imag()}});
  j["V2"] = v2;
  json yin = json::array();
  for (int i = 0; i < 2; ++i)
    yin.push_back({{"re", e.Y_in(i).real()}, {"im", e.Y_in(i).imag()}});
  j["Y_in"] = yin;
  j["f_residual"] = e.f_residual;
  j["char_rate"] = e.char_rate;
  return j;
}

}  // namespace wx
