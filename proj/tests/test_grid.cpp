#include <cmath>

#include "doctest.h"
#include "wavecross/experiment.hpp"
#include "wavecross/grid.hpp"

using namespace wx;

namespace {

PolyGaussian unit_profile() {
  return normalized_gaussian(cd(0, 1) * MatC::Identity(1, 1));
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("fft: roundtrip, naive DFT match, and Parseval") {
  Rng rng(501);
  const int n = 64;
  FftPlan plan = make_fft_plan(n);
  std::vector<cd> x(n);
  for (cd& v : x) v = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
  std::vector<cd> orig = x;
  // against a naive O(n^2) transform
  std::vector<cd> naive(n, cd(0, 0));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      naive[k] += orig[j] * std::polar(1.0, -2.0 * kPi * j * k / n);
  fft_line(plan, x.data(), 1, false);
  double md = 0.0, sum_t = 0.0, sum_f = 0.0;
  for (int k = 0; k < n; ++k) {
    md = std::max(md, std::abs(x[k] - naive[k]));
    sum_t += std::norm(orig[k]);
    sum_f += std::norm(x[k]);
  }
  CHECK(md < 1e-11);
  CHECK(std::abs(sum_f - n * sum_t) < 1e-9);  // Parseval, unnormalized fwd
  fft_line(plan, x.data(), 1, true);
  double rt = 0.0;
  for (int k = 0; k < n; ++k) rt = std::max(rt, std::abs(x[k] - orig[k]));
  CHECK(rt < 1e-13);
}

TEST_CASE("auto box covers position range and momentum Nyquist") {
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = -0.5;
  ext[0].q_hi = 1.5;
  ext[0].p_abs_max = 1.3;
  ext[0].sigma_x = 1.0;
  ext[0].sigma_p = 1.0;
  const double eps = 1e-2;
  Grid g = auto_box(1, ext, eps);
  CHECK(g.d == 1);
  CHECK((g.n[0] & (g.n[0] - 1)) == 0);  // power of two
  CHECK(g.n[0] >= 256);
  CHECK(g.lo[0] < -0.5);
  CHECK(g.lo[0] + g.len[0] > 1.5);
  // Nyquist momentum covers p_abs_max with headroom
  const double xi_max = kPi * eps * g.n[0] / g.len[0];
  CHECK(xi_max > 1.3);
}

TEST_CASE("sampled packets reproduce closed-form inner products") {
  const double eps = 5e-3;
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = -0.4;
  ext[0].q_hi = 0.4;
  ext[0].p_abs_max = 1.0;
  Grid g = auto_box(1, ext, eps);
  PolyGaussian gu = unit_profile();
  VecR z1(2), z2(2);
  z1 << -0.03, 0.4;
  z2 << 0.05, 0.37;
  VecC a = sample_wavepacket(g, eps, z1, gu);
  VecC b = sample_wavepacket(g, eps, z2, gu);
  const double cv = g.cell_volume();
  const cd ip_grid = cv * a.dot(b);  // Eigen dot conjugates the first factor
  // closed form via unit-scale translation:
  //   WP_z phi = e^{i q.p/(2 eps)} WP_0 T(z/sqrt(eps)) phi
  // so the packet inner product is the translated-profile one times
  // e^{i(q1.p1 - q2.p2)/(2 eps)}
  const double rs = std::sqrt(eps);
  PolyGaussian t1 = translate(gu, VecR::Constant(1, z1[0] / rs),
                              VecR::Constant(1, z1[1] / rs));
  PolyGaussian t2 = translate(gu, VecR::Constant(1, z2[0] / rs),
                              VecR::Constant(1, z2[1] / rs));
  const cd phase =
      std::polar(1.0, (z1[0] * z1[1] - z2[0] * z2[1]) / (2.0 * eps));
  const cd ip_exact = phase * inner_product(t1, t2);
  CHECK(std::abs(ip_grid - ip_exact) < 1e-8);
  CHECK(std::abs(cv * a.dot(a).real() - 1.0) < 1e-10);
}

TEST_CASE("free evolution matches the closed-form spreading packet") {
  ScalarModel m = builtin_scalar("free_1d");
  const double eps = 1e-2;
  const double T = 0.4;
  VecR z0(2);
  z0 << 0.0, 1.0;
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = 0.0;
  ext[0].q_hi = 0.5;
  ext[0].p_abs_max = 1.1;
  Grid g = auto_box(1, ext, eps);
  GridState st = initial_wavepacket_scalar(m, g, eps, z0, unit_profile(), 0.0);
  SplitStepper sp(m, g, eps);
  sp.run(st, T, 1e-3);
  // exact: center (q + t p, p), action t p^2 / 2, width via the shear flow
  VecR zt(2);
  zt << z0[0] + T * z0[1], z0[1];
  Symplectic fr = Symplectic::identity(1);
  fr.m(0, 1) = T;
  PolyGaussian prof_t = metaplectic_apply(fr, unit_profile());
  const double S = T * z0[1] * z0[1] / 2.0;
  VecC want = std::polar(1.0, S / eps) * sample_wavepacket(g, eps, zt, prof_t);
  double err2 = 0.0, ref2 = 0.0;
  for (int i = 0; i < want.size(); ++i) {
    err2 += std::norm(st.psi[0][i] - want[i]);
    ref2 += std::norm(want[i]);
  }
  CHECK(std::sqrt(err2 / ref2) < 1e-9);  // split-step is exact for free flow
}

TEST_CASE("two-level stepper conserves norm and projects consistently") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  const double eps = 1e-2;
  VecR z0 = builtin_default_z0("gapped_adiabatic_1d");
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = 0.0;
  ext[0].q_hi = 1.2;
  ext[0].p_abs_max = 1.2;
  Grid g = auto_box(1, ext, eps);
  GridState st = initial_wavepacket(m, 1, g, eps, z0, unit_profile(), 0.0);
  CHECK(std::abs(grid_norm(st) - 1.0) < 1e-8);
  // starting on band 1: band-2 projection vanishes pointwise
  CHECK(grid_norm(project_band(m, st, 2)) < 1e-10);
  OracleDiagnostics diag;
  SplitStepper sp(m, g, eps);
  sp.run(st, 0.3, 5e-4, &diag);
  CHECK(diag.max_norm_drift < 1e-10);
  CHECK(diag.max_tail_fraction < 1e-8);
  // band projections resolve the identity
  GridState p1 = project_band(m, st, 1);
  GridState p2 = project_band(m, st, 2);
  double md = 0.0;
  for (int c = 0; c < 2; ++c)
    md = std::max(md,
                  (p1.psi[c] + p2.psi[c] - st.psi[c]).cwiseAbs().maxCoeff());
  CHECK(md < 1e-12);
}

TEST_CASE("escaping packets abort instead of wrapping around") {
  ScalarModel m = builtin_scalar("free_1d");
  const double eps = 1e-2;
  VecR z0(2);
  z0 << 0.0, 1.0;
  Grid g = make_grid_1d(-0.35, 0.7, 512);  // far too small for t in [0, 1]
  GridState st = initial_wavepacket_scalar(m, g, eps, z0, unit_profile(), 0.0);
  SplitStepper sp(m, g, eps);
  CHECK_THROWS(sp.run(st, 1.0, 1e-3));
}

TEST_CASE("dt heuristic scale is positive and stable") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  const double eps = 1e-2;
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = 0.0;
  ext[0].q_hi = 1.2;
  ext[0].p_abs_max = 1.2;
  Grid g = auto_box(1, ext, eps);
  const double h1 = oracle_h_scale(m, g, eps, 0.0, 1.0);
  CHECK(h1 > 0.5);
  CHECK(h1 < 50.0);
  ScalarModel sm = builtin_scalar("pendulum_1d");
  const double h2 = oracle_h_scale_scalar(sm, g, eps, 0.0, 1.0);
  CHECK(h2 > 0.5);
  CHECK(h2 < 50.0);
}

}  // TEST_SUITE
