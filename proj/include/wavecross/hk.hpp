// Frozen-Gaussian (Herman-Kluk) initial-value representation: decompose the
// initial packet over a phase-space lattice of unit-width Gaussians, carry
// each seed along its classical trajectory with the branch-tracked prefactor
// a_h = 2^{-d/2} det^{1/2}(A + D + i(C - B)), and reassemble on a grid.
// Scalar Hamiltonians and gapped two-level bands (with the transported
// eigenvector) share the same seed table.
#ifndef WAVECROSS_HK_HPP
#define WAVECROSS_HK_HPP

#include <iosfwd>
#include <vector>

#include "wavecross/bundle.hpp"
#include "wavecross/gaussian.hpp"
#include "wavecross/grid.hpp"
#include "wavecross/model.hpp"

namespace wx {

// One seed of the initial-value representation.
struct HKSample {
  VecR z0;        // seed phase-space point
  cd coeff;       // initial overlap <g_{z0}, psi0>
  double weight;  // phase-space quadrature weight (lattice cell volume)
  // trajectory data, filled by hk_propagate:
  double t = 0.0;
  VecR z;  // flow image of z0
  double S = 0.0;
  MatR F;                    // flow Jacobi matrix
  cd a_h = cd(1.0, 0.0);     // prefactor, continuous branch, a_h(t0) = 1
  Vec2c Y = Vec2c::Zero();   // transported band vector (two-level case)
};

// Deterministic tensor lattice in phase space, centered at the packet.
struct HKQuadSpec {
  double spacing = 0.5;     // lattice spacing in units of sqrt(eps)
  double radius = 9.0;      // half-extent in units of sqrt(eps)
  double tail_tol = 1e-8;   // max relative L2 mass allowed outside the box
  double prune_tol = 1e-12; // drop seeds with |coeff| below this * max|coeff|
};

// Overlap coefficients of psi0 = e^{i p0.(x-q0)/eps} profile((x-q0)/sqrt(eps))
// with the unit-width Gaussian family, on a lattice centered at z0. Errors
// out if the captured mass misses more than tail_tol of ||psi0||^2.
std::vector<HKSample> hk_decompose(const PolyGaussian& profile, double eps,
                                   const VecR& z0,
                                   const HKQuadSpec& spec = HKQuadSpec{});

// Same, for a single-component grid function; overlaps are computed by grid
// quadrature against sampled unit-width packets.
std::vector<HKSample> hk_decompose_grid(const VecC& psi, const Grid& grid,
                                        double eps, const VecR& z0,
                                        const HKQuadSpec& spec = HKQuadSpec{});

struct HKRun {
  double eps = 1e-2;
  int d = 1;
  double t0 = 0.0;
  double t_end = 0.0;
  bool matrix = false;  // two-level band run (seeds carry Y)
  std::vector<HKSample> seeds;
};

// Integrates every seed's trajectory bundle over [t0, t_end] and tracks the
// prefactor branch stepwise (argument jump >= pi/2 in one accepted step is
// an error asking for a smaller step).
HKRun hk_propagate(const ScalarModel& model, std::vector<HKSample> seeds,
                   double eps, double t0, double t_end,
                   const OdeOpts& ode = OdeOpts{});
HKRun hk_propagate(const TwoLevelModel& model, int band,
                   std::vector<HKSample> seeds, double eps, double t0,
                   double t_end, const OdeOpts& ode = OdeOpts{});

// (2 pi eps)^{-d} sum_j weight_j coeff_j a_h,j e^{i S_j/eps} [Y_j] g_{z_j},
// summed in seed order (deterministic). One component for scalar runs, two
// for band runs.
GridState hk_evaluate(const HKRun& run, const Grid& grid);

// Seed table: z0, coeff, weight, final z, S, a_h, Y.
void hk_seed_csv(const HKRun& run, std::ostream& os);

}  // namespace wx

#endif  // WAVECROSS_HK_HPP
