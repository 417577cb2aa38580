#include <cmath>
#include <complex>
#include <sstream>

#include "doctest.h"
#include "wavecross/experiment.hpp"
#include "wavecross/hk.hpp"
#include "wavecross/propagate.hpp"

using namespace wx;

namespace {

PolyGaussian unit_profile() {
  return normalized_gaussian(cd(0, 1) * MatC::Identity(1, 1));
}

Grid packet_box(double q_lo, double q_hi, double p_max, double eps) {
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = q_lo;
  ext[0].q_hi = q_hi;
  ext[0].p_abs_max = p_max;
  return auto_box(1, ext, eps);
}

// evaluate a zero-time run: every seed still at its lattice site
HKRun frozen_run(std::vector<HKSample> seeds, double eps) {
  HKRun run;
  run.eps = eps;
  run.d = 1;
  run.t0 = 0.0;
  run.t_end = 0.0;
  run.matrix = false;
  run.seeds = std::move(seeds);
  return run;
}

}  // namespace

TEST_SUITE("hk") {

TEST_CASE("lattice decomposition resolves the identity") {
  const double eps = 1e-2;
  VecR z0(2);
  z0 << 0.3, -0.4;
  // non-trivial profile: squeezed and rotated width
  MatC gamma = MatC::Identity(1, 1) * cd(0.4, 1.3);
  PolyGaussian prof = normalized_gaussian(gamma);
  std::vector<HKSample> seeds = hk_decompose(prof, eps, z0);
  CHECK(seeds.size() > 100);
  HKRun run = frozen_run(seeds, eps);
  for (HKSample& s : run.seeds) s.z = s.z0;  // zero-time placement
  Grid g = packet_box(-0.6, 1.2, 1.0, eps);
  GridState got = hk_evaluate(run, g);
  const VecC want = sample_wavepacket(g, eps, z0, prof);
  double num = 0.0, den = 0.0;
  num = (got.psi[0] - want).norm();
  den = want.norm();
  CHECK(num / den < 1e-6);
}

TEST_CASE("grid decomposition matches the closed-form overlaps") {
  const double eps = 1e-2;
  VecR z0(2);
  z0 << 0.1, 0.5;
  PolyGaussian prof = normalized_gaussian(cd(0, 1) * MatC::Identity(1, 1));
  Grid g = packet_box(-1.0, 1.2, 1.6, eps);
  const VecC psi = sample_wavepacket(g, eps, z0, prof);
  HKQuadSpec spec;
  spec.radius = 6.0;  // keep the grid variant cheap
  spec.tail_tol = 1e-4;
  std::vector<HKSample> a = hk_decompose(prof, eps, z0, spec);
  std::vector<HKSample> b = hk_decompose_grid(psi, g, eps, z0, spec);
  REQUIRE(a.size() == b.size());
  double max_rel = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) max_abs = std::max(max_abs, std::abs(a[i].coeff));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].z0 - b[i].z0).norm() < 1e-12);
    max_rel = std::max(max_rel, std::abs(a[i].coeff - b[i].coeff) / max_abs);
  }
  CHECK(max_rel < 1e-6);
}

TEST_CASE("prefactor squared equals the metaplectic determinant") {
  ScalarModel m = builtin_scalar("pendulum_1d");
  VecR z0(2);
  z0 << 0.0, 1.2;
  PolyGaussian prof = unit_profile();
  std::vector<HKSample> seeds = hk_decompose(prof, 1e-2, z0);
  HKRun run = hk_propagate(m, std::move(seeds), 1e-2, 0.0, 2.0);
  for (const HKSample& s : run.seeds) {
    const int d = 1;
    const MatR A = s.F.topLeftCorner(d, d);
    const MatR B = s.F.topRightCorner(d, d);
    const MatR C = s.F.bottomLeftCorner(d, d);
    const MatR D = s.F.bottomRightCorner(d, d);
    MatC M = (A + D).cast<cd>() + cd(0, 1) * (C - B).cast<cd>();
    const cd det = M.determinant() / std::pow(2.0, d);
    CHECK(std::abs(s.a_h * s.a_h - det) < 1e-10);
  }
}

TEST_CASE("harmonic prefactor follows the continuous branch past pi/2") {
  ScalarModel m = builtin_scalar("harmonic_1d");
  VecR z0(2);
  z0 << 0.8, 0.5;
  std::vector<HKSample> seeds = hk_decompose(unit_profile(), 1e-2, z0);
  const double T = 2.0;
  HKRun run = hk_propagate(m, std::move(seeds), 1e-2, 0.0, T);
  const cd want = std::polar(1.0, -T / 2.0);
  for (const HKSample& s : run.seeds) CHECK(std::abs(s.a_h - want) < 1e-8);
}

TEST_CASE("free-particle prefactor takes the principal branch") {
  ScalarModel m = builtin_scalar("free_1d");
  VecR z0(2);
  z0 << 0.0, 1.0;
  std::vector<HKSample> seeds = hk_decompose(unit_profile(), 1e-2, z0);
  const double T = 1.5;
  HKRun run = hk_propagate(m, std::move(seeds), 1e-2, 0.0, T);
  const cd want = std::sqrt(cd(1.0, -T / 2.0));
  for (const HKSample& s : run.seeds) CHECK(std::abs(s.a_h - want) < 1e-8);
}

TEST_CASE("harmonic oscillator evolution is reproduced exactly") {
  ScalarModel m = builtin_scalar("harmonic_1d");
  const double eps = 2e-2;
  const double T = 1.3;
  VecR z0(2);
  z0 << 0.8, 0.5;
  PolyGaussian prof = unit_profile();
  std::vector<HKSample> seeds = hk_decompose(prof, eps, z0);
  HKRun run = hk_propagate(m, std::move(seeds), eps, 0.0, T);
  Grid g = packet_box(-1.2, 1.4, 1.4, eps);
  GridState got = hk_evaluate(run, g);
  // closed form: rotated center, S = action integral, profile fixed by the
  // harmonic metaplectic flow, global phase e^{iS/eps} e^{-iT/2}
  const double c = std::cos(T), s = std::sin(T);
  VecR zT(2);
  zT << c * z0[0] + s * z0[1], -s * z0[0] + c * z0[1];
  // d/dt (qp/2) = (p^2 - q^2)/2 = Lagrangian for h = (q^2+p^2)/2
  const double S = 0.5 * (zT[0] * zT[1] - z0[0] * z0[1]);
  const VecC want_base = sample_wavepacket(g, eps, zT, prof);
  const cd phase = std::polar(1.0, S / eps) * std::polar(1.0, -T / 2.0);
  const VecC want = phase * want_base;
  CHECK((got.psi[0] - want).norm() / want.norm() < 1e-6);
}

TEST_CASE("two-level band run matches the single-branch propagator") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  const double eps = 1e-2;
  const double T = 0.6;
  VecR z0 = builtin_default_z0("gapped_adiabatic_1d");
  PolyGaussian prof = unit_profile();
  std::vector<HKSample> seeds = hk_decompose(prof, eps, z0);
  HKRun run = hk_propagate(m, 1, std::move(seeds), eps, 0.0, T);
  CHECK(run.matrix);
  Grid g = packet_box(-0.4, 1.6, 1.4, eps);
  GridState got = hk_evaluate(run, g);
  REQUIRE(got.ncomp() == 2);
  CHECK(std::abs(grid_norm(got) - 1.0) < 0.05);

  InitialData init;
  init.band = 1;
  init.z0 = z0;
  init.profile = prof;
  PropOpts bare;
  bare.with_b1 = false;
  bare.vector_correction = false;
  SemiclassicalSolution sol = propagate(m, eps, init, T, bare);
  GridState rec = reconstruct(sol, T, g);
  const cd ip = grid_inner(rec, got);
  CHECK(std::abs(ip) / (grid_norm(rec) * grid_norm(got)) > 0.98);
}

TEST_CASE("seed table export") {
  ScalarModel m = builtin_scalar("free_1d");
  VecR z0(2);
  z0 << 0.0, 1.0;
  HKQuadSpec spec;
  spec.radius = 3.0;
  spec.tail_tol = 0.5;  // tiny lattice; tail is irrelevant here
  std::vector<HKSample> seeds = hk_decompose(unit_profile(), 1e-2, z0, spec);
  HKRun run = hk_propagate(m, seeds, 1e-2, 0.0, 0.5);
  std::ostringstream os;
  hk_seed_csv(run, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line.find("z0_0") != std::string::npos);
  CHECK(line.find("a_h_re") != std::string::npos);
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == run.seeds.size());
}

TEST_CASE("a lattice that misses packet mass is rejected") {
  VecR z0(2);
  z0 << 0.0, 0.0;
  HKQuadSpec spec;
  spec.radius = 2.0;  // tail mass e^{-2} >> tol
  spec.tail_tol = 1e-8;
  CHECK_THROWS(hk_decompose(unit_profile(), 1e-2, z0, spec));
}

}  // TEST_SUITE
