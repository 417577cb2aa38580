// Split-step spectral reference solver for  i eps d_t psi = (K(-i eps grad) +
// V(t, x)) psi  on a periodic box in d = 1 or 2 dimensions, with one or two
// components. Supported structures:
//   - scalar:      K = |xi|^2/2,               V = pot(t, x)
//   - potential:   K = |xi|^2/2 or 0 (2x2 * I), V = v(t,x) I + f(t,x) M(u(t,x))
//   - kinetic-band: K = a0(xi) I + f(xi) M(u(xi)), V = w(t,x) I
// Each Strang step is  half potential kick, full spectral kinetic step, half
// potential kick, with the potential sampled at the step midpoint; every
// factor is unitary, so the discrete L^2 norm is conserved to round-off.
// The Fourier transform is a self-contained iterative radix-2 implementation
// (grid sizes must be powers of two).
#ifndef WAVECROSS_GRID_HPP
#define WAVECROSS_GRID_HPP

#include <vector>

#include "wavecross/gaussian.hpp"
#include "wavecross/model.hpp"
#include "wavecross/util.hpp"

namespace wx {

// Periodic box [lo_a, lo_a + len_a) sampled at n_a points per axis, n_a a
// power of two. Flat storage with axis 0 fastest.
struct Grid {
  int d = 1;
  std::vector<double> lo, len;
  std::vector<int> n;

  std::size_t total() const;
  double cell_volume() const;
  double axis_point(int a, int idx) const { return lo[a] + len[a] * idx / n[a]; }
  // signed integer frequency in (-n/2, n/2]
  int freq_index(int a, int idx) const { return idx <= n[a] / 2 ? idx : idx - n[a]; }
  // scaled momentum xi = 2 pi eps k / len
  double xi(int a, int idx, double eps) const {
    return 2.0 * kPi * eps * freq_index(a, idx) / len[a];
  }
  VecR point(std::size_t flat) const;
  void validate() const;
};

Grid make_grid_1d(double lo, double len, int n);
Grid make_grid_2d(double lo0, double len0, int n0, double lo1, double len1,
                  int n1);

struct GridState {
  double eps = 1e-2;
  double t = 0.0;
  Grid grid;
  // one entry per component, each of length grid.total()
  std::vector<VecC> psi;

  int ncomp() const { return static_cast<int>(psi.size()); }
};

GridState make_grid_state(const Grid& g, double eps, int ncomp, double t0 = 0.0);

// Discrete L^2 norm sqrt(cellvol * sum |psi|^2) over all components.
double grid_norm(const GridState& st);
// cellvol * sum conj(a) . b ; grids must match.
cd grid_inner(const GridState& a, const GridState& b);
double grid_l2_diff(const GridState& a, const GridState& b);

// -- radix-2 FFT ------------------------------------------------------------

struct FftPlan {
  int n = 1;
  std::vector<int> bitrev;
  std::vector<cd> w;  // forward twiddles e^{-2 pi i j / m}, packed per stage
};

FftPlan make_fft_plan(int n);
// In-place transform of a strided line of length plan.n. Forward is
// unnormalized; inverse carries the 1/n factor.
void fft_line(const FftPlan& plan, cd* x, std::ptrdiff_t stride, bool inverse);
// Transform every component of the state along all axes.
void fft_grid(const Grid& g, std::vector<VecC>& comps, bool inverse);

// -- stepping ---------------------------------------------------------------

struct OracleDiagnostics {
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double max_norm_drift = 0.0;        // max |norm - initial_norm|
  double max_tail_fraction = 0.0;     // spectral mass in the top 1/8 shell
  double max_boundary_fraction = 0.0; // position mass in the outer 1/16 rim
  long steps = 0;
  double dt = 0.0;
};

struct OracleOpts {
  double dt_factor = 0.1;     // dt target = eps * dt_factor / max|H|
  double dt_max = 2.5e-3;
  int monitor_stride = 25;    // steps between tail/boundary checks
  double tail_abort = 1e-8;   // abort threshold for spectral tail fraction
  double boundary_abort = 1e-6;  // abort threshold for rim mass fraction
                                 // (periodic wrap-around contamination)
};

class SplitStepper {
 public:
  SplitStepper(const TwoLevelModel& model, const Grid& grid, double eps);
  SplitStepper(const ScalarModel& model, const Grid& grid, double eps);

  // One Strang step t -> t + dt.
  void step(GridState& st, double dt);
  // Integrate to t_end with a fixed step count (dt adjusted to land exactly),
  // recording unitarity/tail/boundary diagnostics.
  void run(GridState& st, double t_end, double dt_target,
           OracleDiagnostics* diag = nullptr,
           const OracleOpts& opts = OracleOpts{});

  double spectral_tail_fraction(const GridState& st);
  double boundary_mass_fraction(const GridState& st) const;

 private:
  enum class Family { kScalar1, kPotential2, kKinetic2 };
  Family family_;
  const TwoLevelModel* tl_ = nullptr;
  const ScalarModel* sc_ = nullptr;
  Grid grid_;
  double eps_ = 0.0;
  bool has_kinetic_ = true;
  std::vector<FftPlan> plans_;
  std::vector<std::vector<double>> xi_;  // per axis, per index

  // kinetic factors cached for the current dt
  double kin_dt_ = -1.0;
  VecC kin_phase_;              // scalar families
  std::vector<Mat2c> kin_mat_;  // kinetic-band family

  // potential half-kick for the current step midpoint
  std::vector<Mat2c> pot_mat_;  // potential 2x2 family
  VecC pot_phase_;              // scalar kick families

  void build_kinetic(double dt);
  void build_potential_half(double t_mid, double dt);
  void apply_potential_half(GridState& st) const;
  void apply_kinetic(GridState& st);
};

// -- semiclassical initial data and band projection --------------------------

// Samples of the eps-scaled packet
//   (WP phi)(x) = eps^{-d/4} e^{i p0.(x - q0)/eps} phi((x - q0)/sqrt(eps))
// on the grid (single component).
VecC sample_wavepacket(const Grid& g, double eps, const VecR& z0,
                       const PolyGaussian& profile);

// Two-level initial data op(V_band) WP phi: multiplication by the band frame
// on the position side for potential-type models, on the Fourier side for
// kinetic-band models (exact in both cases, the frame depends on x only
// resp. xi only).
GridState initial_wavepacket(const TwoLevelModel& model, int band,
                             const Grid& g, double eps, const VecR& z0,
                             const PolyGaussian& profile, double t0);
GridState initial_wavepacket_scalar(const ScalarModel& model, const Grid& g,
                                    double eps, const VecR& z0,
                                    const PolyGaussian& profile, double t0);

// Band projection by the spectral projector, pointwise in x for
// potential-type models and pointwise in xi for kinetic-band models.
// project_band(1) + project_band(2) reassembles the state exactly.
GridState project_band(const TwoLevelModel& model, const GridState& st,
                       int band);

// -- sizing heuristics -------------------------------------------------------

struct AxisExtent {
  double q_lo = 0.0, q_hi = 0.0;  // classical position range over the run
  double p_abs_max = 0.0;         // max |momentum| over the run
  double sigma_x = 1.0;           // unit-scale packet width, position side
  double sigma_p = 1.0;           // unit-scale packet width, momentum side
};

// Box = position range padded by pad_sigmas packet widths (plus an absolute
// floor); resolution chosen so the Nyquist momentum covers p_abs_max plus the
// same padding in momentum, with ~30% headroom.
Grid auto_box(int d, const std::vector<AxisExtent>& extents, double eps,
              double pad_sigmas = 10.0, int min_n = 256, int max_n = 1 << 21);

// max |H| estimate from grid samples of the potential and the kinetic symbol
// at the Nyquist shell, used for the dt heuristic.
double oracle_h_scale(const TwoLevelModel& model, const Grid& g, double eps,
                      double t0, double t1);
double oracle_h_scale_scalar(const ScalarModel& model, const Grid& g,
                             double eps, double t0, double t1);

}  // namespace wx

#endif  // WAVECROSS_GRID_HPP
