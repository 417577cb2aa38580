#include "wavecross/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace wx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// all monomials over nvars variables with total degree <= max_deg, in
// deterministic (map) order
std::vector<std::vector<int>> monomial_basis(int nvars, int max_deg) {
  std::map<std::vector<int>, int> seen;
  std::vector<int> pw(nvars, 0);
  // odometer enumeration
  while (true) {
    int deg = 0;
    for (int e : pw) deg += e;
    if (deg <= max_deg) seen.emplace(pw, 0);
    int a = 0;
    while (a < nvars) {
      ++pw[a];
      int s = 0;
      for (int e : pw) s += e;
      if (s <= max_deg) break;
      pw[a] = 0;
      ++a;
    }
    if (a == nvars) break;
  }
  std::vector<std::vector<int>> out;
  out.reserve(seen.size());
  for (const auto& kv : seen) out.push_back(kv.first);
  return out;
}

// top d rows of F^{-1}, complex: the position part of the inverse flow, so
// that a profile polynomial P(y) becomes the symbol P((F^{-1} w)_y).
MatC egorov_position_map(const Symplectic& F) {
  MatR inv = F.inverse().m;
  return inv.topRows(F.d()).cast<cd>();
}

// Taylor cubic of the band Hamiltonian at (t, z) as a symbol in the 2d
// packet variables w = (y, eta):  sum_{|a|=3} d^a h / a! w^a.
Poly band_cubic_symbol(const TwoLevelModel& model, int band, double t,
                       const VecR& z) {
  const int n = 2 * model.d;
  Poly sym(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = model.band_d3(band, t, z, i, j, k);
        if (v == 0.0) continue;
        const int m = (i == j && j == k) ? 1 : (i == j || j == k || i == k) ? 3 : 6;
        std::vector<int> pw(n, 0);
        ++pw[i];
        ++pw[j];
        ++pw[k];
        sym.add_term(pw, cd(v * m / 6.0, 0.0));
      }
  return sym;
}

// integrand of the third-order correction: op1((cubic of h) o F) phi0,
// returned as the profile polynomial relative to phi0's envelope and norm
Poly b1_integrand_poly(const TwoLevelModel& model, int band, double t,
                       const VecR& z, const MatR& F, const PolyGaussian& phi0,
                       int max_degree) {
  Poly sym = band_cubic_symbol(model, band, t, z);
  if (sym.is_zero()) return Poly(model.d);
  Poly symF = sym.substitute_linear(F.cast<cd>(), VecC::Zero(2 * model.d));
  return weyl_apply(symF, phi0, max_degree).poly;
}

struct RunDiag {
  double max_defect = 0.0;
  double min_im = kInf;
  double max_Ydrift = 0.0;
  double max_Yoff = 0.0;
  double max_prof_drift = 0.0;
  double min_abs_f = kInf;
  bool f_sign_change = false;
};

void merge_diag(RunDiag& into, const RunDiag& other) {
  into.max_defect = std::max(into.max_defect, other.max_defect);
  into.min_im = std::min(into.min_im, other.min_im);
  into.max_Ydrift = std::max(into.max_Ydrift, other.max_Ydrift);
  into.max_Yoff = std::max(into.max_Yoff, other.max_Yoff);
  into.max_prof_drift = std::max(into.max_prof_drift, other.max_prof_drift);
  into.min_abs_f = std::min(into.min_abs_f, other.min_abs_f);
  into.f_sign_change = into.f_sign_change || other.f_sign_change;
}

double min_im_eig(const MatC& gamma) {
  Eigen::SelfAdjointEigenSolver<MatC> es(
      (0.5 * (gamma - gamma.adjoint()) / cd(0, 1)).eval());
  return es.eigenvalues().minCoeff();
}

// Integrates one branch: bundle + incremental metaplectic profile +
// (optionally) the third-order correction coefficients, with snapshots at
// the requested times (sorted; times outside (s0.t, t1] are ignored, s0.t
// itself is always recorded).
std::vector<BranchSnapshot> run_branch(const TwoLevelModel& model, int band,
                                       const BundleState& s0, double t1,
                                       const std::vector<double>& all_times,
                                       const PolyGaussian& birth_profile,
                                       bool with_b1, int max_degree,
                                       const OdeOpts& ode, RunDiag* rd) {
  const int d = model.d;
  const bool with_W = s0.has_W;
  require(!birth_profile.has_linear(),
          "branch profiles must have zero linear phase");
  require(birth_profile.d == d, "profile dimension mismatch");

  const bool b1_active = with_b1 && model.band_has_cubic_terms(band);
  std::vector<std::vector<int>> basis;
  std::map<std::vector<int>, int> bindex;
  if (b1_active) {
    const int corr_deg = birth_profile.poly.degree() + 3;
    require(corr_deg <= max_degree,
            "third-order correction exceeds the polynomial degree cap");
    basis = monomial_basis(d, corr_deg);
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
      bindex.emplace(basis[i], i);
  }
  const int ncoef = static_cast<int>(basis.size());

  const VecR yb0 = pack_bundle(s0, d);
  const int nb = static_cast<int>(yb0.size());
  VecR y0 = VecR::Zero(nb + 2 * ncoef);
  y0.head(nb) = yb0;

  const Rhs base = band_bundle_rhs(model, band, with_W);
  const PolyGaussian phi0 = birth_profile;
  Rhs rhs = [&model, base, phi0, band, d, nb, ncoef, with_W, max_degree,
             &bindex](double t, const VecR& y) -> VecR {
    VecR dy = VecR::Zero(y.size());
    const VecR yb = y.head(nb);
    dy.head(nb) = base(t, yb);
    if (ncoef > 0) {
      BundleState s = unpack_bundle(yb, d, with_W, t);
      const Poly q =
          b1_integrand_poly(model, band, t, s.z, s.F, phi0, max_degree);
      for (const auto& term : q.terms()) {
        const int idx = bindex.at(term.first);
        // dc/dt = -i q
        dy[nb + 2 * idx] += term.second.imag();
        dy[nb + 2 * idx + 1] += -term.second.real();
      }
    }
    return dy;
  };

  // snapshot times inside the run
  const double teps = 1e-12 * std::max(1.0, std::abs(t1 - s0.t));
  std::vector<double> times;
  for (double t : all_times)
    if (t > s0.t + teps && t <= t1 + teps) times.push_back(t);
  if (times.empty() || std::abs(times.back() - t1) > teps)
    times.push_back(t1);

  // incremental profile state
  PolyGaussian gpure = PolyGaussian::pure(birth_profile.gamma,
                                          birth_profile.norm);
  Symplectic Fprev{s0.F};
  const double birth_norm = l2_norm(birth_profile);

  std::vector<BranchSnapshot> snaps;
  auto record = [&](const BundleState& s, const VecR& yfull) {
    BranchSnapshot snap;
    snap.t = s.t;
    snap.z = s.z;
    snap.S = s.S;
    snap.F = Symplectic{s.F};
    snap.Y = s.Y;
    snap.has_W = s.has_W;
    snap.W = s.W;
    const MatC pos_map = egorov_position_map(snap.F);
    if (phi0.poly.is_constant()) {
      snap.prof_main = gpure.scaled(phi0.poly.coeff(std::vector<int>(d, 0)));
    } else {
      const Poly sym = phi0.poly.substitute_linear(pos_map, VecC::Zero(d));
      snap.prof_main = weyl_apply(sym, gpure, max_degree);
    }
    Poly corr(d);
    for (int i = 0; i < ncoef; ++i) {
      const cd c(yfull[nb + 2 * i], yfull[nb + 2 * i + 1]);
      if (c != cd(0.0, 0.0)) corr.add_term(basis[i], c);
    }
    if (!corr.is_zero()) {
      const Poly sym = corr.substitute_linear(pos_map, VecC::Zero(d));
      snap.prof_corr = weyl_apply(sym, gpure, max_degree);
    } else {
      snap.prof_corr = PolyGaussian{d, Poly(d), gpure.gamma,
                                    VecC::Zero(d), gpure.norm};
    }
    if (rd) {
      rd->max_prof_drift = std::max(
          rd->max_prof_drift, std::abs(l2_norm(snap.prof_main) - birth_norm));
    }
    snaps.push_back(std::move(snap));
  };

  // birth snapshot
  record(s0, y0);

  std::size_t ci = 0;
  double f_prev = model.half_gap(s0.t, s0.z);
  StepCb cb = [&](double, const VecR&, double tb, const VecR& yb_full) {
    BundleState sb = unpack_bundle(yb_full.head(nb), d, with_W, tb);
    const Symplectic Fnew{sb.F};
    Symplectic step;
    step.m = Fnew.m * Fprev.inverse().m;
    gpure = metaplectic_apply(step, gpure);
    Fprev = Fnew;
    if (rd) {
      rd->max_defect = std::max(rd->max_defect, Fnew.symplectic_defect());
      rd->min_im = std::min(rd->min_im, min_im_eig(gpure.gamma));
      rd->max_Ydrift =
          std::max(rd->max_Ydrift, std::abs(sb.Y.norm() - 1.0));
      const Mat2c off = Mat2c::Identity() - model.projector(band, tb, sb.z);
      rd->max_Yoff = std::max(rd->max_Yoff, (off * sb.Y).norm());
      const double f_here = model.half_gap(tb, sb.z);
      rd->min_abs_f = std::min(rd->min_abs_f, std::abs(f_here));
      if ((f_here < 0.0) != (f_prev < 0.0)) rd->f_sign_change = true;
      f_prev = f_here;
    }
    while (ci < times.size() && times[ci] <= tb + teps) {
      if (std::abs(times[ci] - tb) <= teps) record(sb, yb_full);
      ++ci;
    }
  };

  rk45_integrate(rhs, y0, s0.t, t1, times, ode, cb);
  require(!snaps.empty() && std::abs(snaps.back().t - t1) <= 1e-9,
          "branch integration did not reach the final time");
  return snaps;
}

}  // namespace

const BranchSnapshot& WavePacketBranch::at_time(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (const BranchSnapshot& s : snaps)
    if (std::abs(s.t - t) <= tol) return s;
  fail("no branch snapshot recorded at the requested time");
}

static SemiclassicalSolution propagate_core(const TwoLevelModel& model,
                                            double eps,
                                            const InitialData& init,
                                            double t_end, PropOpts opts,
                                            bool gapped_only) {
  const int d = model.d;
  require(eps > 0.0, "eps must be positive");
  require(init.band == 1 || init.band == 2, "band must be 1 or 2");
  require(static_cast<int>(init.z0.size()) == 2 * d,
          "initial phase-space point must have dimension 2d");
  require(init.profile.d == d, "initial profile dimension mismatch");
  require(!init.profile.has_linear(),
          "initial profile must have zero linear phase");
  check_siegel(init.profile.gamma, "initial profile width");
  require(t_end > init.t0, "t_end must exceed t0");

  SemiclassicalSolution sol;
  sol.eps = eps;
  sol.d = d;
  sol.t0 = init.t0;
  sol.t_end = t_end;
  sol.diag.boundary_halfwidth = std::pow(eps, 2.0 / 9.0);

  BundleState s0 = BundleState::initial(d, init.z0, Vec2c::Zero());
  s0.t = init.t0;
  s0.S = init.S0;
  s0.Y = model.frame(init.band, init.t0, init.z0);
  if (opts.vector_correction) {
    s0.has_W = true;
    s0.W.resize(2, 2 * d);
    for (int k = 0; k < 2 * d; ++k)
      s0.W.col(k) = model.frame_deriv(init.band, 1 + k, init.t0, init.z0);
  }

  // crossing scan (transfer convention: band 1 incoming)
  std::optional<CrossingEvent> ev;
  if ((opts.scan_crossing || gapped_only) && init.band == 1) {
    BundleState scan0 = s0;
    scan0.has_W = false;
    scan0.W.resize(2, 0);
    CrossingScan scan =
        scan_for_crossing(model, 1, scan0, t_end, opts.ode, opts.crossing);
    if (scan.event) {
      if (gapped_only)
        fail("band gap closes along the trajectory; use propagate()");
      require(scan.later_sign_changes.empty(),
              "multiple band crossings in [t0, t_end] are not supported");
      ev = scan.event;
    }
  }

  // snapshot times: user samples plus endpoints plus the crossing time
  const double teps = 1e-12 * std::max(1.0, std::abs(t_end - init.t0));
  std::vector<double> times{init.t0, t_end};
  for (double t : opts.sample_times) {
    require(t >= init.t0 - teps && t <= t_end + teps,
            "sample times must lie in [t0, t_end]");
    times.push_back(std::min(std::max(t, init.t0), t_end));
  }
  if (ev) times.push_back(ev->t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [teps](double a, double b) {
                            return std::abs(a - b) <= teps;
                          }),
              times.end());

  RunDiag rd;
  WavePacketBranch main;
  main.band = init.band;
  main.weight = cd(1.0, 0.0);
  main.born_at = init.t0;
  main.snaps = run_branch(model, init.band, s0, t_end, times, init.profile,
                          opts.with_b1, opts.max_degree, opts.ode, &rd);
  sol.branches.push_back(std::move(main));
  if (gapped_only && rd.f_sign_change)
    fail("band gap closes along the trajectory; use propagate()");

  if (ev && !ev->zero_transfer) {
    const BranchSnapshot& sb = sol.branches[0].at_time(ev->t);
    TransferResult tr = transfer_polygaussian(ev->mu, ev->alpha, ev->beta,
                                              sb.prof_main, opts.max_degree);
    BundleState s2 = BundleState::initial(d, ev->z, ev->V2);
    s2.t = ev->t;
    s2.S = sb.S;
    if (opts.vector_correction) {
      // first-order vector data for the receiving band, same convention as
      // the main branch at t0; V2 equals the model frame up to a phase, so
      // carry that phase onto the frame derivatives
      const cd ph = model.frame(2, ev->t, ev->z).dot(ev->V2);
      s2.has_W = true;
      s2.W.resize(2, 2 * d);
      for (int k = 0; k < 2 * d; ++k)
        s2.W.col(k) = ph * model.frame_deriv(2, 1 + k, ev->t, ev->z);
    }
    WavePacketBranch spawn;
    spawn.band = 2;
    spawn.born_at = ev->t;
    spawn.weight = std::sqrt(eps) * ev->gamma_coupling * ev->prefactor;
    RunDiag rd2;
    spawn.snaps = run_branch(model, 2, s2, t_end, times, tr.out,
                             /*with_b1=*/false, opts.max_degree, opts.ode,
                             &rd2);
    sol.branches.push_back(std::move(spawn));
    merge_diag(rd, rd2);
  }
  sol.crossing = ev;

  sol.diag.max_symplectic_defect = rd.max_defect;
  sol.diag.min_im_gamma_eig = rd.min_im == kInf ? 0.0 : rd.min_im;
  sol.diag.max_Y_norm_drift = rd.max_Ydrift;
  sol.diag.max_Y_offband = rd.max_Yoff;
  sol.diag.max_profile_norm_drift = rd.max_prof_drift;
  sol.diag.min_half_gap = rd.min_abs_f == kInf ? 0.0 : rd.min_abs_f;
  if (ev) {
    for (double t : times)
      if (std::abs(t - ev->t) < sol.diag.boundary_halfwidth)
        sol.diag.flagged_times.push_back(t);
  }
  return sol;
}

SemiclassicalSolution propagate(const TwoLevelModel& model, double eps,
                                const InitialData& init, double t_end,
                                const PropOpts& opts) {
  return propagate_core(model, eps, init, t_end, opts, /*gapped_only=*/false);
}

SemiclassicalSolution adiabatic_propagate(const TwoLevelModel& model,
                                          double eps, const InitialData& init,
                                          double t_end, const PropOpts& opts) {
  PropOpts o = opts;
  o.with_b1 = true;  // the O(eps) accuracy claim needs the correction
  return propagate_core(model, eps, init, t_end, o, /*gapped_only=*/true);
}

std::array<PolyGaussian, 2> branch_component_profiles(const BranchSnapshot& s,
                                                      double eps,
                                                      int max_degree) {
  const int d = s.prof_main.d;
  const double rs = std::sqrt(eps);
  const Poly& pm = s.prof_main.poly;
  // correction polynomial rebased to prof_main's norm factor
  Poly pc(d);
  if (!s.prof_corr.poly.is_zero())
    pc = s.prof_corr.poly.scaled(s.prof_corr.norm / s.prof_main.norm);

  // op1(w_k) prof_main for the transported frame derivatives
  std::vector<Poly> opw;
  if (s.has_W) {
    opw.reserve(2 * d);
    for (int k = 0; k < 2 * d; ++k) {
      std::vector<int> pw(2 * d, 0);
      pw[k] = 1;
      opw.push_back(
          weyl_apply(Poly::monomial(pw, cd(1.0, 0.0)), s.prof_main, max_degree)
              .poly);
    }
  }

  std::array<PolyGaussian, 2> out;
  for (int c = 0; c < 2; ++c) {
    Poly total = pm.scaled(s.Y[c]) + pc.scaled(rs * s.Y[c]);
    if (s.has_W)
      for (int k = 0; k < 2 * d; ++k) {
        const cd w = s.W(c, k);
        if (w != cd(0.0, 0.0)) total = total + opw[k].scaled(rs * w);
      }
    out[c] = PolyGaussian{d, total, s.prof_main.gamma, VecC::Zero(d),
                          s.prof_main.norm};
  }
  return out;
}

double branch_norm(const WavePacketBranch& b, const BranchSnapshot& s,
                   double eps) {
  const std::array<PolyGaussian, 2> profs = branch_component_profiles(s, eps);
  double n2 = 0.0;
  for (const PolyGaussian& pg : profs) n2 += inner_product(pg, pg).real();
  return std::abs(b.weight) * std::sqrt(std::max(0.0, n2));
}

GridState reconstruct(const SemiclassicalSolution& sol, double t,
                      const Grid& grid) {
  require(grid.d == sol.d, "grid dimension does not match the solution");
  GridState st = make_grid_state(grid, sol.eps, 2, t);
  for (const WavePacketBranch& b : sol.branches) {
    if (!b.alive_at(t)) continue;
    const BranchSnapshot& s = b.at_time(t);
    const std::array<PolyGaussian, 2> profs =
        branch_component_profiles(s, sol.eps);
    const cd phase = b.weight * std::polar(1.0, s.S / sol.eps);
    for (int c = 0; c < 2; ++c) {
      if (profs[c].poly.is_zero()) continue;
      st.psi[c] += phase * sample_wavepacket(grid, sol.eps, s.z, profs[c]);
    }
  }
  return st;
}

json solution_to_json(const SemiclassicalSolution& sol,
                      bool include_profiles) {
  json j;
  j["eps"] = sol.eps;
  j["d"] = sol.d;
  j["t0"] = sol.t0;
  j["t_end"] = sol.t_end;
  json diag;
  diag["max_symplectic_defect"] = sol.diag.max_symplectic_defect;
  diag["min_im_gamma_eig"] = sol.diag.min_im_gamma_eig;
  diag["max_Y_norm_drift"] = sol.diag.max_Y_norm_drift;
  diag["max_Y_offband"] = sol.diag.max_Y_offband;
  diag["max_profile_norm_drift"] = sol.diag.max_profile_norm_drift;
  diag["min_half_gap"] = sol.diag.min_half_gap;
  diag["boundary_halfwidth"] = sol.diag.boundary_halfwidth;
  diag["flagged_times"] = sol.diag.flagged_times;
  j["diagnostics"] = diag;
  if (sol.crossing) j["crossing"] = crossing_to_json(*sol.crossing);
  json branches = json::array();
  for (const WavePacketBranch& b : sol.branches) {
    json jb;
    jb["band"] = b.band;
    jb["weight"] = {b.weight.real(), b.weight.imag()};
    jb["born_at"] = b.born_at;
    json snaps = json::array();
    for (const BranchSnapshot& s : b.snaps) {
      json js;
      js["t"] = s.t;
      js["z"] = std::vector<double>(s.z.data(), s.z.data() + s.z.size());
      js["S"] = s.S;
      js["profile_norm"] = l2_norm(s.prof_main);
      js["corr_norm"] =
          s.prof_corr.poly.is_zero() ? 0.0 : l2_norm(s.prof_corr);
      js["Y"] = {s.Y[0].real(), s.Y[0].imag(), s.Y[1].real(), s.Y[1].imag()};
      if (include_profiles) {
        js["F"] = symplectic_to_json(s.F);
        js["prof_main"] = polygaussian_to_json(s.prof_main);
        js["prof_corr"] = polygaussian_to_json(s.prof_corr);
      }
      snaps.push_back(std::move(js));
    }
    jb["snapshots"] = std::move(snaps);
    branches.push_back(std::move(jb));
  }
  j["branches"] = std::move(branches);
  return j;
}

}  // namespace wx
