#include <cmath>

#include "doctest.h"
#include "wavecross/experiment.hpp"
#include "wavecross/propagate.hpp"

using namespace wx;

namespace {

PolyGaussian unit_profile() {
  return normalized_gaussian(cd(0, 1) * MatC::Identity(1, 1));
}

InitialData gapped_init() {
  InitialData init;
  init.band = 1;
  init.z0 = builtin_default_z0("gapped_adiabatic_1d");
  init.profile = unit_profile();
  return init;
}

}  // namespace

TEST_SUITE("propagate") {

TEST_CASE("gapped run: clean diagnostics and sampled snapshots") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  PropOpts opts;
  opts.sample_times = {0.25, 0.5, 0.75};
  SemiclassicalSolution sol = propagate(m, 1e-2, gapped_init(), 1.0, opts);
  REQUIRE(sol.branches.size() == 1);
  CHECK(!sol.crossing.has_value());
  const WavePacketBranch& b = sol.branches[0];
  REQUIRE(b.snaps.size() == 5);  // t0, three samples, t_end
  CHECK(b.snaps.front().t == doctest::Approx(0.0));
  CHECK(b.snaps[1].t == doctest::Approx(0.25));
  CHECK(b.snaps.back().t == doctest::Approx(1.0));
  CHECK(sol.diag.max_symplectic_defect < 1e-8);
  CHECK(sol.diag.min_im_gamma_eig > 0.0);
  CHECK(sol.diag.max_Y_norm_drift < 1e-10);
  CHECK(sol.diag.max_Y_offband < 1e-8);
  CHECK(sol.diag.min_half_gap > 0.5);
  // leading profile keeps unit norm; corrections stay O(sqrt(eps))
  for (const BranchSnapshot& s : b.snaps) {
    CHECK(std::abs(l2_norm(s.prof_main) - 1.0) < 1e-9);
    CHECK(std::abs(branch_norm(b, s, 1e-2) - 1.0) < 0.05);
  }
}

TEST_CASE("reconstruction at the initial time reproduces the initial "
          "packet") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  InitialData init = gapped_init();
  const double eps = 1e-2;
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = 0.0;
  ext[0].q_hi = 1.2;
  ext[0].p_abs_max = 1.2;
  Grid g = auto_box(1, ext, eps);

  // center-frame-only reconstruction equals Y_c times the scalar packet
  PropOpts bare;
  bare.with_b1 = false;
  bare.vector_correction = false;
  SemiclassicalSolution plain = propagate(m, eps, init, 0.8, bare);
  GridState rec0 = reconstruct(plain, 0.0, g);
  const VecC base = sample_wavepacket(g, eps, init.z0, init.profile);
  const Vec2c Y0 = m.frame(1, 0.0, init.z0);
  double diff2 = 0.0;
  for (int c = 0; c < 2; ++c)
    diff2 += (rec0.psi[c] - Y0[c] * base).squaredNorm() * g.cell_volume();
  CHECK(std::sqrt(diff2) < 1e-10);

  // with the frame-derivative correction the mismatch against the exact
  // pointwise frame drops to the second-order Taylor remainder, O(eps)
  SemiclassicalSolution sol = propagate(m, eps, init, 0.8, PropOpts{});
  GridState rec = reconstruct(sol, 0.0, g);
  GridState want = initial_wavepacket(m, 1, g, eps, init.z0, init.profile,
                                      0.0);
  CHECK(grid_l2_diff(rec0, want) > grid_l2_diff(rec, want));
  CHECK(grid_l2_diff(rec, want) < 0.02);
}

TEST_CASE("crossing run spawns a consistent second branch") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  InitialData init;
  init.band = 1;
  init.z0 = builtin_default_z0("schrodinger_crossing_1d");
  init.profile = unit_profile();
  const double eps = 2e-2;
  SemiclassicalSolution sol = propagate(m, eps, init, 1.06, PropOpts{});
  REQUIRE(sol.crossing.has_value());
  REQUIRE(sol.branches.size() == 2);
  const CrossingEvent& ev = *sol.crossing;
  const WavePacketBranch& main = sol.branches[0];
  const WavePacketBranch& spawned = sol.branches[1];
  CHECK(spawned.band == 2);
  CHECK(spawned.born_at == doctest::Approx(ev.t).epsilon(1e-12));
  CHECK(!spawned.alive_at(ev.t - 0.1));
  CHECK(spawned.alive_at(ev.t + 0.1));
  // weight = sqrt(eps) gamma prefactor
  const cd want_w = std::sqrt(eps) * ev.gamma_coupling * ev.prefactor;
  CHECK(std::abs(spawned.weight - want_w) < 1e-12);
  // the main branch has a snapshot exactly at the event; the spawned birth
  // profile is the transfer applied to it
  const BranchSnapshot* at_tb = nullptr;
  for (const BranchSnapshot& s : main.snaps)
    if (std::abs(s.t - ev.t) < 1e-10) at_tb = &s;
  REQUIRE(at_tb != nullptr);
  TransferResult tr =
      transfer_polygaussian(ev.mu, ev.alpha, ev.beta, at_tb->prof_main);
  const BranchSnapshot& birth = spawned.snaps.front();
  CHECK((birth.prof_main.gamma - tr.out.gamma).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(birth.prof_main.norm - tr.out.norm) < 1e-9);
  // spawned branch carries the receiving band vector
  CHECK((birth.Y - ev.V2).norm() < 1e-10);
  // phase-space data at birth matches the event
  CHECK((birth.z - ev.z).norm() < 1e-12);
  CHECK(std::abs(birth.S - at_tb->S) < 1e-12);
}

TEST_CASE("propagation is deterministic") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  InitialData init;
  init.band = 1;
  init.z0 = builtin_default_z0("schrodinger_crossing_1d");
  init.profile = unit_profile();
  SemiclassicalSolution a = propagate(m, 1e-2, init, 1.0, PropOpts{});
  SemiclassicalSolution b = propagate(m, 1e-2, init, 1.0, PropOpts{});
  CHECK(solution_to_json(a, true).dump() == solution_to_json(b, true).dump());
}

TEST_CASE("gapped-only entry point rejects crossing trajectories") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  InitialData init;
  init.band = 1;
  init.z0 = builtin_default_z0("schrodinger_crossing_1d");
  init.profile = unit_profile();
  CHECK_THROWS(adiabatic_propagate(m, 1e-2, init, 1.0, PropOpts{}));
}

TEST_CASE("sample times outside the window are rejected") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  PropOpts opts;
  opts.sample_times = {1.5};
  CHECK_THROWS(propagate(m, 1e-2, gapped_init(), 1.0, opts));
}

TEST_CASE("component profiles weight the band vector") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  SemiclassicalSolution sol = propagate(m, 1e-2, gapped_init(), 0.6,
                                        PropOpts{});
  const BranchSnapshot& s = sol.branches[0].snaps.back();
  auto comps = branch_component_profiles(s, 1e-2);
  REQUIRE(comps.size() == 2);
  // component norms combine to the branch norm
  const double n2 = std::sqrt(
      std::real(inner_product(comps[0], comps[0])) +
      std::real(inner_product(comps[1], comps[1])));
  const double bn = branch_norm(sol.branches[0], s, 1e-2);
  CHECK(std::abs(n2 * std::abs(sol.branches[0].weight) - bn) < 1e-10);
  // without corrections the components reduce to Y * main profile
  PropOpts bare;
  bare.with_b1 = false;
  bare.vector_correction = false;
  SemiclassicalSolution plain = propagate(m, 1e-2, gapped_init(), 0.6, bare);
  const BranchSnapshot& sp = plain.branches[0].snaps.back();
  auto pc = branch_component_profiles(sp, 1e-2);
  std::vector<VecR> pts;
  for (int i = 0; i <= 20; ++i) {
    VecR y(1);
    y[0] = -2.0 + 0.2 * i;
    pts.push_back(y);
  }
  for (int c = 0; c < 2; ++c) {
    const VecC a = evaluate_points(pc[c], pts);
    const VecC b = sp.Y[c] * evaluate_points(sp.prof_main, pts);
    CHECK((a - b).norm() < 1e-10);
  }
}

TEST_CASE("solution JSON exposes diagnostics and crossing data") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  InitialData init;
  init.band = 1;
  init.z0 = builtin_default_z0("schrodinger_crossing_1d");
  init.profile = unit_profile();
  SemiclassicalSolution sol = propagate(m, 1e-2, init, 1.0, PropOpts{});
  json j = solution_to_json(sol);
  CHECK(j.contains("diagnostics"));
  CHECK(j.contains("crossing"));
  CHECK(j.contains("branches"));
  CHECK(j["branches"].size() == 2);
}

}  // TEST_SUITE
