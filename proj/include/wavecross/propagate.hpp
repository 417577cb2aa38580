// End-to-end semiclassical propagation of a band wave packet: classical
// bundle + metaplectic profile dynamics + eigenvector transport on the main
// branch, optional third-order profile correction (integrated alongside the
// bundle), crossing detection, and the sqrt(eps)-weighted branch spawned
// through the transfer operator at the crossing. Reconstruction samples the
// branches on a grid, with the vector symbol applied through first order
// (frame at the center plus its transported z-derivatives).
#ifndef WAVECROSS_PROPAGATE_HPP
#define WAVECROSS_PROPAGATE_HPP

#include <array>
#include <optional>
#include <vector>

#include "wavecross/bundle.hpp"
#include "wavecross/crossing.hpp"
#include "wavecross/gaussian.hpp"
#include "wavecross/grid.hpp"
#include "wavecross/model.hpp"

namespace wx {

struct InitialData {
  int band = 1;
  double t0 = 0.0;
  VecR z0;               // (q, p)
  double S0 = 0.0;
  PolyGaussian profile;  // unit-scale profile, zero linear phase
};

struct PropOpts {
  bool with_b1 = true;            // third-order profile correction
  bool vector_correction = true;  // transport frame z-derivatives for
                                  // first-order reconstruction
  bool scan_crossing = true;
  std::vector<double> sample_times;  // extra snapshot times (t0, t_end, and
                                     // the crossing time are always kept)
  OdeOpts ode;
  CrossingOpts crossing;
  int max_degree = 12;
};

struct BranchSnapshot {
  double t = 0.0;
  VecR z;
  double S = 0.0;
  Symplectic F;  // flow Jacobi matrix since branch birth
  Vec2c Y;       // transported band vector
  bool has_W = false;
  Eigen::Matrix<cd, 2, Eigen::Dynamic> W;  // column k: transported d(V)/dz_k
  PolyGaussian prof_main;  // leading-order profile (metaplectic image)
  PolyGaussian prof_corr;  // correction profile; scales with sqrt(eps)
};

struct WavePacketBranch {
  int band = 1;
  cd weight = cd(1.0, 0.0);  // main branch 1; spawned sqrt(eps)*gamma*prefactor
  double born_at = 0.0;
  std::vector<BranchSnapshot> snaps;

  bool alive_at(double t) const { return t >= born_at - 1e-9; }
  const BranchSnapshot& at_time(double t) const;
};

struct SemiclassicalSolution {
  double eps = 1e-2;
  int d = 1;
  double t0 = 0.0;
  double t_end = 0.0;
  std::vector<WavePacketBranch> branches;  // [0] main, optionally [1] spawned
  std::optional<CrossingEvent> crossing;

  struct Diagnostics {
    double max_symplectic_defect = 0.0;
    double min_im_gamma_eig = 0.0;
    double max_Y_norm_drift = 0.0;
    double max_Y_offband = 0.0;
    double max_profile_norm_drift = 0.0;
    double min_half_gap = 0.0;          // min |f| along the main trace
    double boundary_halfwidth = 0.0;    // eps^{2/9}
    std::vector<double> flagged_times;  // samples inside the boundary layer
  } diag;
};

SemiclassicalSolution propagate(const TwoLevelModel& model, double eps,
                                const InitialData& init, double t_end,
                                const PropOpts& opts = PropOpts{});

// Gapped-only entry point: same code path with the crossing scan demoted to
// a gap check (a detected crossing is an error), and the third-order
// correction always on.
SemiclassicalSolution adiabatic_propagate(const TwoLevelModel& model,
                                          double eps, const InitialData& init,
                                          double t_end,
                                          const PropOpts& opts = PropOpts{});

// Unit-scale two-component profile of a branch at a snapshot: component c is
//   Y_c (P_main + sqrt(eps) P_corr) + sqrt(eps) sum_k W_{c,k} op1(w_k) P_main
// sharing the snapshot envelope; op1(y_k) multiplies, op1(eta_k) = -i d_k.
std::array<PolyGaussian, 2> branch_component_profiles(const BranchSnapshot& s,
                                                      double eps,
                                                      int max_degree = 12);

// L2 norm of the branch contribution weight * e^{iS/eps} WP(profiles).
double branch_norm(const WavePacketBranch& b, const BranchSnapshot& s,
                   double eps);

// Sum of all alive branches sampled on the grid at a recorded snapshot time.
GridState reconstruct(const SemiclassicalSolution& sol, double t,
                      const Grid& grid);

json solution_to_json(const SemiclassicalSolution& sol,
                      bool include_profiles = false);

}  // namespace wx

#endif  // WAVECROSS_PROPAGATE_HPP
