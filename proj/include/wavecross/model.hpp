// Two-level Hamiltonian models H(t, z) = v I + f (u . sigma) with |u| = 1,
// plus scalar (single-band) models. Provides band Hamiltonians
// h_{1,2} = v +- f with derivatives to third order, spectral projectors and
// their derivatives, smooth eigenframes, and the anti-Hermitian generator of
// band-wise parallel transport.
//
// Band convention throughout: band 1 is h1 = v + f, band 2 is h2 = v - f.
// The half-gap f may change sign; the bands then relabel smoothly across the
// crossing set {f = 0}.
#ifndef WAVECROSS_MODEL_HPP
#define WAVECROSS_MODEL_HPP

#include <array>
#include <optional>
#include <string>

#include "wavecross/fields.hpp"
#include "wavecross/util.hpp"

namespace wx {

enum class ModelKind {
  kGeneral,      // fields over (t, q, p); no grid oracle
  kPointwise,    // potential-only: fields over (t, x), zero kinetic symbol
  kSchrodinger,  // kinetic |xi|^2/2 + matrix potential V(x) (may depend on t)
  kBloch,        // matrix kinetic symbol A(xi) + scalar potential W(x)
};

struct TwoLevelModel {
  ModelKind kind = ModelKind::kGeneral;
  int d = 1;

  // Assembled phase-space fields over (t, q_1..q_d, p_1..p_d).
  ScalarField v, f;
  // Frame direction u = (cos theta, sin theta, 0) when angle-parameterized;
  // otherwise three raw components validated to |u| = 1.
  bool angle_frame = true;
  ScalarField theta;
  std::array<ScalarField, 3> u_raw;

  // Structure fields for the grid oracle (empty when not applicable):
  // potential side over (t, x_1..x_d), kinetic side over (xi_1..xi_d).
  ScalarField pot_v, pot_f, pot_theta;
  bool kinetic_quadratic = false;  // |xi|^2/2
  ScalarField kin_a0, kin_f, kin_theta;

  int nvars() const { return 1 + 2 * d; }
  VecR pack(double t, const VecR& z) const;

  // --- scalar band data -------------------------------------------------
  double band_h(int band, double t, const VecR& z) const;
  double band_dt(int band, double t, const VecR& z) const;
  VecR band_grad(int band, double t, const VecR& z) const;      // 2d
  MatR band_hess(int band, double t, const VecR& z) const;      // 2d x 2d
  double band_d3(int band, double t, const VecR& z, int i, int j, int k) const;
  bool band_has_cubic_terms(int band) const;  // false => Hessian is exact

  double trace_part(double t, const VecR& z) const { return v.value(pack(t, z)); }
  double half_gap(double t, const VecR& z) const { return f.value(pack(t, z)); }
  // (d_t + {v, .}) f along the trace flow; {a,b} = sum_j d_p a d_q b - d_q a d_p b.
  double gap_rate_tracked(double t, const VecR& z) const;
  // time derivative of f along the band flow (for crossing root finding)
  double f_rate_along_band(int band, double t, const VecR& z) const;

  // --- matrix data --------------------------------------------------------
  Eigen::Vector3d u_vec(double t, const VecR& z) const;
  // derivative of u with respect to packed variable 0..2d (0 = t)
  Eigen::Vector3d u_deriv(int var, double t, const VecR& z) const;
  Mat2c hmat(double t, const VecR& z) const;
  Mat2c mmat(double t, const VecR& z) const;  // u . sigma
  Mat2c projector(int band, double t, const VecR& z) const;
  Mat2c projector_deriv(int band, int var, double t, const VecR& z) const;
  // Smooth unit eigenvector of band `band`. Globally smooth in the angle
  // parameterization; chart-based (locally smooth) for raw frames.
  Vec2c frame(int band, double t, const VecR& z) const;
  // derivative of frame with respect to packed variable 0..2d (0 = t);
  // analytic for angle frames, Richardson differences for raw frames.
  Vec2c frame_deriv(int band, int var, double t, const VecR& z) const;

  // Hermitian generator of band transport: Y' = -i Theta Y preserves the
  // band subspace, norm, and Berry-free gauge.
  Mat2c theta_matrix(int band, double t, const VecR& z) const;
  // z-gradient of theta_matrix by Richardson finite differences of the
  // analytic first-derivative expression.
  Mat2c theta_matrix_dz(int band, int k, double t, const VecR& z) const;

  void validate(const VecR& sample_center, double sample_radius,
                std::uint64_t seed = 12345) const;
};

// Builders. Position-side fields take (t, x); kinetic-side fields take xi.
TwoLevelModel make_schrodinger(int d, const ScalarField& pot_v,
                               const ScalarField& pot_f,
                               const ScalarField& pot_theta);
TwoLevelModel make_pointwise(int d, const ScalarField& pot_v,
                             const ScalarField& pot_f,
                             const ScalarField& pot_theta);
TwoLevelModel make_bloch(int d, const ScalarField& kin_a0,
                         const ScalarField& kin_f,
                         const ScalarField& kin_theta,
                         const ScalarField& pot_w);
TwoLevelModel make_general(int d, const ScalarField& v, const ScalarField& f,
                           const ScalarField& theta);
TwoLevelModel make_general_raw(int d, const ScalarField& v,
                               const ScalarField& f,
                               const std::array<ScalarField, 3>& u,
                               const VecR& sample_center,
                               double sample_radius);

// Single-band model for scalar semiclassics (Herman-Kluk, scalar oracle).
struct ScalarModel {
  int d = 1;
  ScalarField h;  // over (t, q, p)
  // grid-oracle structure: h = |xi|^2/2 + pot(x) when separable
  bool separable = false;
  ScalarField pot;  // over (t, x)

  VecR pack(double t, const VecR& z) const;
  double value(double t, const VecR& z) const { return h.value(pack(t, z)); }
  VecR grad(double t, const VecR& z) const;
  MatR hess(double t, const VecR& z) const;
  double d3(double t, const VecR& z, int i, int j, int k) const;
  bool has_cubic_terms() const;
};

ScalarModel make_scalar_separable(int d, const ScalarField& pot);
ScalarModel make_scalar_general(int d, const ScalarField& h);

json two_level_to_json(const TwoLevelModel& m);
TwoLevelModel two_level_from_json(const json& j);

}  // namespace wx

#endif  // WAVECROSS_MODEL_HPP
