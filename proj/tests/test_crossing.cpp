#include <cmath>

#include "doctest.h"
#include "wavecross/crossing.hpp"
#include "wavecross/experiment.hpp"
#include "wavecross/grid.hpp"
#include "wavecross/propagate.hpp"

using namespace wx;

namespace {

// analytic crossing data for the bundled crossing model: v = 0,
// f = 0.4 (q - 1/2), theta = 0.8 q, start (0, 1) on the upper band
constexpr double kTb = 0.5635083268962915;   // 2.5 (1 - sqrt(3/5))
constexpr double kPb = 0.7745966692414834;   // sqrt(3/5)

}  // namespace

TEST_SUITE("crossing") {

TEST_CASE("transfer parameters at the analytic crossing point") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  VecR zb(2);
  zb << 0.5, kPb;
  const Vec2c yin = m.frame(1, kTb, zb);
  CrossingEvent ev = crossing_parameters(m, kTb, zb, yin);
  // mu = -(df/dt along the trace flow) = -0.4 p
  CHECK(std::abs(ev.mu + 0.4 * kPb) < 1e-12);
  // f has no momentum dependence: alpha = 0; beta = 2 df/dq = 0.8
  CHECK(std::abs(ev.alpha[0]) < 1e-13);
  CHECK(std::abs(ev.beta[0] - 0.8) < 1e-12);
  // frame angle 0.8 q rotating at 0.8 p: coupling = |angle rate| / 2
  CHECK(std::abs(ev.gamma_coupling - 0.4 * kPb) < 1e-10);
  CHECK(!ev.zero_transfer);
  CHECK(std::abs(ev.prefactor - std::sqrt(2.0 * kPi / std::abs(ev.mu)) *
                                    std::polar(1.0, kPi / 4.0)) < 1e-10);
  // spawned direction: unit vector in the receiving eigenspace
  CHECK(std::abs(ev.V2.norm() - 1.0) < 1e-10);
  const Mat2c p2 = m.projector(2, kTb, zb);
  CHECK(((Mat2c::Identity() - p2) * ev.V2).norm() < 1e-10);
}

TEST_CASE("trajectory scan finds and refines the crossing") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  VecR z0(2);
  z0 << 0.0, 1.0;
  BundleState s0 = BundleState::initial(1, z0, m.frame(1, 0.0, z0));
  CrossingScan scan = scan_for_crossing(m, 1, s0, 1.1, OdeOpts{});
  REQUIRE(scan.event.has_value());
  const CrossingEvent& ev = *scan.event;
  CHECK(std::abs(ev.t - kTb) < 1e-9);
  CHECK(std::abs(ev.z[0] - 0.5) < 1e-9);
  CHECK(std::abs(ev.z[1] - kPb) < 1e-9);
  CHECK(std::abs(ev.f_residual) < 1e-10);
  CHECK(scan.later_sign_changes.empty());
  // action along band 1: S = (1 - p^3)/1.2 - 0.3 t at the event
  const double s_want = (1.0 - std::pow(0.6, 1.5)) / 1.2 - 0.3 * kTb;
  CHECK(std::abs(ev.S - s_want) < 1e-9);
  // bundle state at the event agrees with the event record
  CHECK(std::abs(scan.state_at_event.t - ev.t) < 1e-12);
  CHECK((scan.state_at_event.z - ev.z).norm() < 1e-12);
}

TEST_CASE("no event on a gapped trajectory") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  VecR z0 = builtin_default_z0("gapped_adiabatic_1d");
  BundleState s0 = BundleState::initial(1, z0, m.frame(1, 0.0, z0));
  CrossingScan scan = scan_for_crossing(m, 1, s0, 5.0, OdeOpts{});
  CHECK(!scan.event.has_value());
  CHECK(scan.later_sign_changes.empty());
}

TEST_CASE("momentum-side crossing with a frozen frame transfers nothing") {
  TwoLevelModel m = builtin_two_level("bloch_linear_1d");
  VecR z0 = builtin_default_z0("bloch_linear_1d");
  BundleState s0 = BundleState::initial(1, z0, m.frame(1, 0.0, z0));
  CrossingScan scan = scan_for_crossing(m, 1, s0, 3.0, OdeOpts{});
  REQUIRE(scan.event.has_value());
  const CrossingEvent& ev = *scan.event;
  // half gap f = -xi depends on momentum only: alpha = -2 df/dp = +2
  CHECK(std::abs(ev.alpha[0] - 2.0) < 1e-9);
  CHECK(std::abs(ev.beta[0]) < 1e-9);
  // constant frame: no coupling
  CHECK(ev.zero_transfer);
  CHECK(ev.gamma_coupling < 1e-12);
}

TEST_CASE("crossing record serializes its invariants") {
  TwoLevelModel m = builtin_two_level("schrodinger_crossing_1d");
  VecR zb(2);
  zb << 0.5, kPb;
  CrossingEvent ev = crossing_parameters(m, kTb, zb, m.frame(1, kTb, zb));
  ev.t = kTb;
  ev.z = zb;
  json j = crossing_to_json(ev);
  CHECK(j.contains("t"));
  CHECK(j.contains("mu"));
  CHECK(j.contains("alpha"));
  CHECK(j.contains("beta"));
  CHECK(j.contains("gamma_coupling"));
  CHECK(std::abs(j["mu"].get<double>() - ev.mu) < 1e-15);
}

TEST_CASE("pointwise avoided-crossing model against the exact grid "
          "solution") {
  // Zero kinetic symbol: the full PDE decouples into an independent 2x2
  // Landau-Zener problem at every grid point, so the split-step oracle is
  // essentially exact. This pins down the sign AND magnitude conventions of
  // the transfer parameters end to end: a wrong sign of mu reflects the
  // spawned width (i + 0.98 vs its mirror) and kills the band-2 overlap; a
  // wrong |mu| misscales the transferred mass.
  TwoLevelModel m = builtin_two_level("lz_pointwise_1d");
  const double eps = 1e-2;
  VecR z0(2);
  z0 << 0.3, 0.2;
  InitialData init;
  init.band = 1;
  init.z0 = z0;
  init.profile = normalized_gaussian(cd(0, 1) * MatC::Identity(1, 1));
  const double t_end = 0.78;  // crossing at 0.5 - 0.7 q0 = 0.29
  SemiclassicalSolution sol = propagate(m, eps, init, t_end, PropOpts{});
  REQUIRE(sol.crossing.has_value());
  const CrossingEvent& ev = *sol.crossing;
  CHECK(std::abs(ev.t - 0.29) < 1e-9);
  CHECK(std::abs(ev.mu + 1.0) < 1e-10);           // mu = -d f/dt = -1
  CHECK(std::abs(ev.alpha[0]) < 1e-12);           // f is p-independent
  CHECK(std::abs(ev.beta[0] - 1.4) < 1e-10);      // 2 df/dq
  CHECK(std::abs(ev.gamma_coupling - 0.6) < 1e-9);  // |d theta/dt| / 2
  REQUIRE(sol.branches.size() == 2);
  // frozen transferred width: Gamma - beta^2/(2 mu) = i + 0.98
  const MatC gb = sol.branches[1].snaps.front().prof_main.gamma;
  CHECK(std::abs(gb(0, 0) - cd(0.98, 1.0)) < 1e-9);

  // grid oracle comparison well past the boundary layer
  std::vector<AxisExtent> ext(1);
  ext[0].q_lo = z0[0] - 0.1;
  ext[0].q_hi = z0[0] + 0.1;
  ext[0].p_abs_max = 1.2;
  ext[0].sigma_x = 1.5;
  ext[0].sigma_p = 1.5;
  Grid grid = auto_box(1, ext, eps, 10.0, 512, 1 << 18);
  GridState st = initial_wavepacket(m, 1, grid, eps, z0, init.profile, 0.0);
  SplitStepper stepper(m, grid, eps);
  stepper.run(st, t_end, 2.5e-4);
  GridState recon = reconstruct(sol, t_end, grid);
  const GridState ob2 = project_band(m, st, 2);
  const GridState rb2 = project_band(m, recon, 2);
  const double no2 = grid_norm(ob2);
  const double nr2 = grid_norm(rb2);
  REQUIRE(no2 > 1e-4);
  const double overlap = std::abs(grid_inner(ob2, rb2)) / (no2 * nr2);
  CHECK(overlap > 0.99);
  CHECK(std::abs(nr2 - no2) / no2 < 0.12);
  // leading-order transferred mass sqrt(eps) gamma ||T phi||, and here
  // ||T phi|| = sqrt(pi / |mu - alpha.beta/2 + alpha.Gamma alpha/2|)
  //           = sqrt(pi)
  const double mass_pred =
      std::sqrt(eps) * ev.gamma_coupling * std::sqrt(kPi);
  CHECK(std::abs(no2 - mass_pred) / mass_pred < 0.12);
}

}  // TEST_SUITE
