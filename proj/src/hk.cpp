#include "wavecross/hk.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

namespace wx {

namespace {

// lattice points z0 + spacing*sqrt(eps)*k, k in [-m, m]^{2d}, with the
// phase-space cell volume as weight
struct Lattice {
  std::vector<VecR> points;
  double cell = 0.0;
};

Lattice make_lattice(const VecR& z0, int d, double eps,
                     const HKQuadSpec& spec) {
  require(spec.spacing > 0.0 && spec.radius > 0.0,
          "hk_decompose: lattice spacing and radius must be positive");
  const double h = spec.spacing * std::sqrt(eps);
  const int m = static_cast<int>(std::ceil(spec.radius / spec.spacing));
  const int n = 2 * m + 1;
  const int dim = 2 * d;
  Lattice lat;
  lat.cell = std::pow(h, dim);
  std::vector<int> idx(dim, -m);
  while (true) {
    VecR z = z0;
    for (int a = 0; a < dim; ++a) z[a] += h * idx[a];
    lat.points.push_back(std::move(z));
    int a = 0;
    while (a < dim && ++idx[a] > m) idx[a++] = -m;
    if (a == dim) break;
  }
  require(static_cast<long>(lat.points.size()) ==
              static_cast<long>(std::pow(static_cast<double>(n), dim) + 0.5),
          "hk_decompose: lattice enumeration bug");
  return lat;
}

std::vector<HKSample> finish_decompose(std::vector<HKSample> seeds,
                                       double eps, int d, double mass,
                                       const HKQuadSpec& spec) {
  // captured phase-space mass vs the resolution of identity
  double captured = 0.0;
  double peak = 0.0;
  for (const HKSample& s : seeds) {
    captured += s.weight * std::norm(s.coeff);
    peak = std::max(peak, std::abs(s.coeff));
  }
  captured /= std::pow(2.0 * kPi * eps, d);
  require(captured >= (1.0 - spec.tail_tol) * mass,
          "hk_decompose: quadrature box does not cover the packet; "
          "increase the lattice radius");
  std::vector<HKSample> kept;
  kept.reserve(seeds.size());
  for (HKSample& s : seeds)
    if (std::abs(s.coeff) >= spec.prune_tol * peak)
      kept.push_back(std::move(s));
  return kept;
}

cd lattice_phase(const VecR& z, const VecR& z0, int d, double eps) {
  // e^{(i/2eps) (q - q0).(p + p0)}
  const double arg =
      (z.head(d) - z0.head(d)).dot(z.tail(d) + z0.tail(d)) / (2.0 * eps);
  return std::polar(1.0, arg);
}

cd step_delta(const MatR& F) {
  const int d = static_cast<int>(F.rows()) / 2;
  const MatC M = (F.topLeftCorner(d, d) + F.bottomRightCorner(d, d))
                     .cast<cd>() +
                 cd(0.0, 1.0) * (F.bottomLeftCorner(d, d) -
                                 F.topRightCorner(d, d))
                                    .cast<cd>();
  return M.determinant();
}

}  // namespace

std::vector<HKSample> hk_decompose(const PolyGaussian& profile, double eps,
                                   const VecR& z0, const HKQuadSpec& spec) {
  const int d = profile.d;
  require(static_cast<int>(z0.size()) == 2 * d,
          "hk_decompose: center must have dimension 2d");
  require(!profile.has_linear(),
          "hk_decompose: profile must have zero linear phase");
  const PolyGaussian gu =
      normalized_gaussian(cd(0.0, 1.0) * MatC::Identity(d, d));
  const double rs = std::sqrt(eps);
  Lattice lat = make_lattice(z0, d, eps, spec);
  std::vector<HKSample> seeds;
  seeds.reserve(lat.points.size());
  for (const VecR& z : lat.points) {
    const VecR qt = (z0.head(d) - z.head(d)) / rs;
    const VecR pt = (z0.tail(d) - z.tail(d)) / rs;
    HKSample s;
    s.z0 = z;
    s.weight = lat.cell;
    s.coeff = lattice_phase(z, z0, d, eps) *
              inner_product(gu, translate(profile, qt, pt));
    seeds.push_back(std::move(s));
  }
  const double nrm = l2_norm(profile);
  return finish_decompose(std::move(seeds), eps, d, nrm * nrm, spec);
}

std::vector<HKSample> hk_decompose_grid(const VecC& psi, const Grid& grid,
                                        double eps, const VecR& z0,
                                        const HKQuadSpec& spec) {
  const int d = grid.d;
  require(static_cast<int>(z0.size()) == 2 * d,
          "hk_decompose_grid: center must have dimension 2d");
  require(psi.size() == grid.total(), "hk_decompose_grid: size mismatch");
  const PolyGaussian gu =
      normalized_gaussian(cd(0.0, 1.0) * MatC::Identity(d, d));
  Lattice lat = make_lattice(z0, d, eps, spec);
  const double cellvol = grid.cell_volume();
  std::vector<HKSample> seeds;
  seeds.reserve(lat.points.size());
  for (const VecR& z : lat.points) {
    const VecC gz = sample_wavepacket(grid, eps, z, gu);
    HKSample s;
    s.z0 = z;
    s.weight = lat.cell;
    s.coeff = cellvol * gz.dot(psi);  // Eigen dot conjugates the first factor
    seeds.push_back(std::move(s));
  }
  const double nrm2 = cellvol * psi.squaredNorm();
  return finish_decompose(std::move(seeds), eps, d, nrm2, spec);
}

HKRun hk_propagate(const ScalarModel& model, std::vector<HKSample> seeds,
                   double eps, double t0, double t_end, const OdeOpts& ode) {
  require(t_end > t0, "hk_propagate: t_end must exceed t0");
  const int d = model.d;
  HKRun run;
  run.eps = eps;
  run.d = d;
  run.t0 = t0;
  run.t_end = t_end;
  run.matrix = false;
  for (HKSample& s : seeds) {
    ScalarBundleState s0 = ScalarBundleState::initial(d, s.z0);
    s0.t = t0;
    BranchSqrt br;
    br.reset(step_delta(s0.F), cd(1.0, 0.0));
    StepCb cb = [&](double, const VecR&, double tb, const VecR& yb) {
      br.update(step_delta(unpack_scalar_bundle(yb, d, tb).F));
    };
    std::vector<ScalarBundleState> out =
        integrate_scalar(model, s0, t_end, {t_end}, ode, cb);
    require(!out.empty(), "hk_propagate: trajectory integration failed");
    const ScalarBundleState& sf = out.back();
    s.t = sf.t;
    s.z = sf.z;
    s.S = sf.S;
    s.F = sf.F;
    s.a_h = br.value();
    run.seeds.push_back(std::move(s));
  }
  return run;
}

HKRun hk_propagate(const TwoLevelModel& model, int band,
                   std::vector<HKSample> seeds, double eps, double t0,
                   double t_end, const OdeOpts& ode) {
  require(t_end > t0, "hk_propagate: t_end must exceed t0");
  require(band == 1 || band == 2, "hk_propagate: band must be 1 or 2");
  const int d = model.d;
  HKRun run;
  run.eps = eps;
  run.d = d;
  run.t0 = t0;
  run.t_end = t_end;
  run.matrix = true;
  for (HKSample& s : seeds) {
    BundleState s0 =
        BundleState::initial(d, s.z0, model.frame(band, t0, s.z0));
    s0.t = t0;
    BranchSqrt br;
    br.reset(step_delta(s0.F), cd(1.0, 0.0));
    StepCb cb = [&](double, const VecR&, double tb, const VecR& yb) {
      br.update(step_delta(unpack_bundle(yb, d, false, tb).F));
    };
    std::vector<BundleState> out =
        integrate_band(model, band, s0, t_end, {t_end}, ode, cb);
    require(!out.empty(), "hk_propagate: trajectory integration failed");
    const BundleState& sf = out.back();
    s.t = sf.t;
    s.z = sf.z;
    s.S = sf.S;
    s.F = sf.F;
    s.Y = sf.Y;
    s.a_h = br.value();
    run.seeds.push_back(std::move(s));
  }
  return run;
}

GridState hk_evaluate(const HKRun& run, const Grid& grid) {
  require(grid.d == run.d, "hk_evaluate: grid dimension mismatch");
  GridState st =
      make_grid_state(grid, run.eps, run.matrix ? 2 : 1, run.t_end);
  const PolyGaussian gu =
      normalized_gaussian(cd(0.0, 1.0) * MatC::Identity(run.d, run.d));
  const double scale = std::pow(2.0 * kPi * run.eps, -run.d);
  for (const HKSample& s : run.seeds) {
    const cd amp = scale * s.weight * s.coeff * s.a_h *
                   std::polar(1.0, s.S / run.eps);
    const VecC vals = sample_wavepacket(grid, run.eps, s.z, gu);
    if (run.matrix) {
      st.psi[0] += (amp * s.Y[0]) * vals;
      st.psi[1] += (amp * s.Y[1]) * vals;
    } else {
      st.psi[0] += amp * vals;
    }
  }
  return st;
}

void hk_seed_csv(const HKRun& run, std::ostream& os) {
  const int d = run.d;
  os.precision(17);
  for (int a = 0; a < 2 * d; ++a) os << "z0_" << a << ",";
  os << "coeff_re,coeff_im,weight,";
  for (int a = 0; a < 2 * d; ++a) os << "z_" << a << ",";
  os << "S,a_h_re,a_h_im";
  if (run.matrix) os << ",Y1_re,Y1_im,Y2_re,Y2_im";
  os << "\n";
  for (const HKSample& s : run.seeds) {
    for (int a = 0; a < 2 * d; ++a) os << s.z0[a] << ",";
    os << s.coeff.real() << "," << s.coeff.imag() << "," << s.weight << ",";
    for (int a = 0; a < 2 * d; ++a) os << s.z[a] << ",";
    os << s.S << "," << s.a_h.real() << "," << s.a_h.imag();
    if (run.matrix)
      os << "," << s.Y[0].real() << "," << s.Y[0].imag() << ","
         << s.Y[1].real() << "," << s.Y[1].imag();
    os << "\n";
  }
}

}  // namespace wx
