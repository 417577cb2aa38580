// Classical trajectory bundles: phase-space center, action, Jacobi matrix of
// the flow, transported band vector, and (optionally) the transported
// Jacobian of the band vector field. Integrated with an adaptive embedded
// Runge-Kutta 5(4) pair; sample times are hit exactly by clamping accepted
// steps, so re-integration is deterministic and interpolation-free.
#ifndef WAVECROSS_BUNDLE_HPP
#define WAVECROSS_BUNDLE_HPP

#include <functional>
#include <vector>

#include "wavecross/model.hpp"
#include "wavecross/util.hpp"

namespace wx {

struct OdeOpts {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_max = 0.05;
};

using Rhs = std::function<VecR(double, const VecR&)>;
// called after each accepted step with (t_old, y_old, t_new, y_new)
using StepCb =
    std::function<void(double, const VecR&, double, const VecR&)>;

struct OdeResult {
  std::vector<double> t;
  std::vector<VecR> y;
};

// Integrates from t0 to t1 (either direction); `collect` must be sorted in
// integration direction and contained in [t0, t1]. Steps are clamped so each
// collect time is reached exactly.
OdeResult rk45_integrate(const Rhs& rhs, const VecR& y0, double t0, double t1,
                         const std::vector<double>& collect,
                         const OdeOpts& opts, const StepCb& on_accept = {});

struct BundleState {
  double t = 0.0;
  VecR z;    // (q, p)
  double S = 0.0;
  MatR F;    // flow Jacobi matrix, blocks [[A,B],[C,D]]
  Vec2c Y;   // transported band vector
  bool has_W = false;
  Eigen::Matrix<cd, 2, Eigen::Dynamic> W;  // column k: d(V)/d z_k transport

  static BundleState initial(int d, const VecR& z0, const Vec2c& Y0);
};

VecR pack_bundle(const BundleState& s, int d);
BundleState unpack_bundle(const VecR& y, int d, bool has_W, double t);

// Right-hand side of the bundle flow on band 1 or 2:
//   z' = J grad h,  S' = p . d_p h - h,  F' = J Hess(h) F,  Y' = -i Theta Y,
//   W' = -i Theta W - i (grad_z Theta) Y - W (J Hess h).
Rhs band_bundle_rhs(const TwoLevelModel& model, int band, bool with_W);

std::vector<BundleState> integrate_band(const TwoLevelModel& model, int band,
                                        const BundleState& s0, double t1,
                                        const std::vector<double>& collect,
                                        const OdeOpts& opts,
                                        const StepCb& on_accept = {});

// Scalar-model bundle (z, S, F), for single-band semiclassics.
struct ScalarBundleState {
  double t = 0.0;
  VecR z;
  double S = 0.0;
  MatR F;
  static ScalarBundleState initial(int d, const VecR& z0);
};

VecR pack_scalar_bundle(const ScalarBundleState& s, int d);
ScalarBundleState unpack_scalar_bundle(const VecR& y, int d, double t);
Rhs scalar_bundle_rhs(const ScalarModel& model);
std::vector<ScalarBundleState> integrate_scalar(
    const ScalarModel& model, const ScalarBundleState& s0, double t1,
    const std::vector<double>& collect, const OdeOpts& opts,
    const StepCb& on_accept = {});

}  // namespace wx

#endif  // WAVECROSS_BUNDLE_HPP
