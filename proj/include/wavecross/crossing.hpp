// Detection of band-crossing events along a trajectory and the parameters of
// the induced transfer operator.
//
// Convention (band 1 incoming, band 2 receiving, half-gap f, trace part v):
//   mu    = 1/2 (d_t + {v, .})(h2 - h1)        = -(d_t f + {v, f})
//   alpha = position part of J grad_z(h2 - h1) = -2 d_p f
//   beta  = momentum part of J grad_z(h2 - h1) = +2 d_q f
//   gamma = | (d_t Pi_2 + {v, Pi_2}) Y_in |
//   V2    = -(1/gamma) Pi_2 (d_t Pi_2 + {v, Pi_2}) Y_in
// with {a, b} = sum_j d_{p_j} a d_{q_j} b - d_{q_j} a d_{p_j} b.
#ifndef WAVECROSS_CROSSING_HPP
#define WAVECROSS_CROSSING_HPP

#include <optional>

#include "wavecross/bundle.hpp"
#include "wavecross/model.hpp"

namespace wx {

struct CrossingEvent {
  double t = 0.0;
  VecR z;
  double S = 0.0;
  MatR F;
  Vec2c Y_in;
  double mu = 0.0;
  VecR alpha, beta;
  cd prefactor;  // sqrt(2 pi / (i mu))
  double gamma_coupling = 0.0;
  Vec2c V2;
  bool zero_transfer = false;
  double f_residual = 0.0;  // |f| after root refinement
  double char_rate = 1.0;   // transversality scale
};

struct CrossingOpts {
  double mu_min_factor = 1e-8;  // |mu| >= factor * char_rate required
  double gamma_min = 1e-12;     // below: zero_transfer
  double f_tol_factor = 1e-12;  // |f| <= factor * char scale at the root
  int max_refine_iters = 80;
};

// Transfer parameters at a given point with a given incoming vector
// (band 1 -> band 2). Fills everything except (t, z, S, F) bookkeeping.
CrossingEvent crossing_parameters(const TwoLevelModel& model, double t,
                                  const VecR& z, const Vec2c& Y_in,
                                  const CrossingOpts& opts = {});

struct CrossingScan {
  std::optional<CrossingEvent> event;  // first transversal crossing
  BundleState state_at_event;          // refined bundle state at t_flat
  std::vector<double> later_sign_changes;  // flagged only
};

// Scans the band-1 trajectory from s0.t to t1 for sign changes of f. The
// first one is refined by safeguarded Newton iteration on f(t, z(t)) using
// short deterministic re-integrations from the bracketing accepted step.
CrossingScan scan_for_crossing(const TwoLevelModel& model, int band,
                               const BundleState& s0, double t1,
                               const OdeOpts& ode_opts,
                               const CrossingOpts& opts = {});

json crossing_to_json(const CrossingEvent& e);

}  // namespace wx

#endif  // WAVECROSS_CROSSING_HPP
