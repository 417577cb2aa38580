#include <cmath>

#include "doctest.h"
#include "wavecross/bundle.hpp"
#include "wavecross/experiment.hpp"

using namespace wx;

TEST_SUITE("bundle") {

TEST_CASE("rk45 on exponential growth and a backward run") {
  Rhs rhs = [](double, const VecR& y) { return y; };
  VecR y0 = VecR::Ones(1);
  OdeOpts opts;
  OdeResult fwd = rk45_integrate(rhs, y0, 0.0, 1.0, {0.5, 1.0}, opts);
  REQUIRE(fwd.t.size() == 2);
  CHECK(fwd.t[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(fwd.y[0][0] - std::exp(0.5)) < 1e-9);
  CHECK(std::abs(fwd.y[1][0] - std::exp(1.0)) < 1e-9);
  OdeResult bwd = rk45_integrate(rhs, y0, 0.0, -1.0, {-1.0}, opts);
  CHECK(std::abs(bwd.y[0][0] - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("rk45 step callback sees monotone accepted times") {
  Rhs rhs = [](double t, const VecR& y) {
    VecR d(2);
    d << y[1], -y[0] * (1.0 + 0.3 * std::sin(t));
    return d;
  };
  VecR y0(2);
  y0 << 1.0, 0.0;
  double last = -1.0;
  int count = 0;
  StepCb cb = [&](double t0, const VecR&, double t1, const VecR&) {
    CHECK(t1 > t0);
    CHECK(t0 >= last - 1e-15);
    last = t1;
    ++count;
  };
  rk45_integrate(rhs, y0, 0.0, 3.0, {3.0}, OdeOpts{}, cb);
  CHECK(count > 5);
  CHECK(last == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("bundle state packs and unpacks losslessly") {
  Rng rng(411);
  const int d = 1;
  VecR z(2);
  z << 0.3, -0.8;
  BundleState s = BundleState::initial(d, z, Vec2c(cd(0.6, 0.1), cd(0.2, -0.77)));
  s.t = 1.7;
  s.S = -0.4;
  s.F.setRandom(2 * d, 2 * d);
  s.has_W = true;
  s.W.resize(2, 2 * d);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2 * d; ++j)
      s.W(i, j) = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
  BundleState back = unpack_bundle(pack_bundle(s, d), d, true, s.t);
  CHECK((back.z - s.z).norm() < 1e-15);
  CHECK(std::abs(back.S - s.S) < 1e-15);
  CHECK((back.F - s.F).norm() < 1e-15);
  CHECK((back.Y - s.Y).norm() < 1e-15);
  CHECK((back.W - s.W).norm() < 1e-15);
}

TEST_CASE("scalar bundle on the harmonic oscillator is exact") {
  ScalarModel m = builtin_scalar("harmonic_1d");
  VecR z0(2);
  z0 << 1.0, 0.0;
  ScalarBundleState s0 = ScalarBundleState::initial(1, z0);
  const double T = 1.0;
  auto out = integrate_scalar(m, s0, T, {T}, OdeOpts{});
  REQUIRE(out.size() == 1);
  const ScalarBundleState& sT = out.back();
  CHECK(std::abs(sT.z[0] - std::cos(T)) < 1e-9);
  CHECK(std::abs(sT.z[1] + std::sin(T)) < 1e-9);
  // action integral: S = -sin(2T)/4 for this start
  CHECK(std::abs(sT.S + std::sin(2.0 * T) / 4.0) < 1e-9);
  MatR fw(2, 2);
  fw << std::cos(T), std::sin(T), -std::sin(T), std::cos(T);
  CHECK((sT.F - fw).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("band bundle: symplectic flow map and unit in-band transport") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  VecR z0 = builtin_default_z0("gapped_adiabatic_1d");
  for (int band = 1; band <= 2; ++band) {
    BundleState s0 = BundleState::initial(1, z0, m.frame(band, 0.0, z0));
    auto out = integrate_band(m, band, s0, 3.0, {1.0, 2.0, 3.0}, OdeOpts{});
    REQUIRE(out.size() == 3);
    for (const BundleState& s : out) {
      Symplectic f;
      f.m = s.F;
      CHECK(f.symplectic_defect() < 1e-9);
      CHECK(std::abs(s.Y.norm() - 1.0) < 1e-10);
      const Mat2c pr = m.projector(band, s.t, s.z);
      CHECK(((Mat2c::Identity() - pr) * s.Y).norm() < 1e-8);
    }
    // energy conservation: this model is autonomous on the position side
    const double e0 = m.band_h(band, 0.0, z0);
    CHECK(std::abs(m.band_h(band, 3.0, out.back().z) - e0) < 1e-9);
  }
}

TEST_CASE("frame-derivative transport solves the variational equation") {
  // W(t) F(t) at the flow point equals d/dz0 of the transported frame, so
  // columns of W must match finite differences of Y over launch points.
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  VecR z0 = builtin_default_z0("gapped_adiabatic_1d");
  const int band = 1;
  const double T = 1.5;
  BundleState s0 = BundleState::initial(1, z0, m.frame(band, 0.0, z0));
  s0.has_W = true;
  s0.W.resize(2, 2);
  for (int k = 0; k < 2; ++k) s0.W.col(k) = m.frame_deriv(band, 1 + k, 0.0, z0);
  auto out = integrate_band(m, band, s0, T, {T}, OdeOpts{});
  REQUIRE(out.size() == 1);
  const BundleState& sT = out.back();

  const double h = 1e-5;
  Eigen::Matrix<cd, 2, 2> dYdz0;
  for (int k = 0; k < 2; ++k) {
    VecR zp = z0, zm = z0;
    zp[k] += h;
    zm[k] -= h;
    BundleState sp = BundleState::initial(1, zp, m.frame(band, 0.0, zp));
    BundleState sm = BundleState::initial(1, zm, m.frame(band, 0.0, zm));
    auto op = integrate_band(m, band, sp, T, {T}, OdeOpts{});
    auto om = integrate_band(m, band, sm, T, {T}, OdeOpts{});
    dYdz0.col(k) = (op.back().Y - om.back().Y) / (2.0 * h);
  }
  // W = (dY/dz0) F^{-1}
  Symplectic f;
  f.m = sT.F;
  const MatC pred = dYdz0 * f.inverse().m.cast<cd>();
  CHECK((MatC(sT.W) - pred).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("collect times are honored in order") {
  ScalarModel m = builtin_scalar("pendulum_1d");
  VecR z0(2);
  z0 << 0.0, 1.2;
  auto out = integrate_scalar(m, ScalarBundleState::initial(1, z0), 2.0,
                              {0.4, 0.8, 1.2, 1.6, 2.0}, OdeOpts{});
  REQUIRE(out.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(out[i].t == doctest::Approx(0.4 * (i + 1)).epsilon(1e-13));
  // pendulum energy conservation along the way
  auto energy = [&](const ScalarBundleState& s) {
    return 0.5 * s.z[1] * s.z[1] + std::cos(s.z[0]);
  };
  const double e0 = 0.5 * 1.2 * 1.2 + 1.0;
  for (const auto& s : out) CHECK(std::abs(energy(s) - e0) < 1e-9);
}

}  // TEST_SUITE
