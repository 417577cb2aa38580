#include "wavecross/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace wx {

namespace {

bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void flat_to_idx(const Grid& g, std::size_t flat, int* idx) {
  for (int a = 0; a < g.d; ++a) {
    idx[a] = static_cast<int>(flat % g.n[a]);
    flat /= g.n[a];
  }
}

// exp(-i theta (v I + w . sigma)) for the Hermitian matrix
// [[v + w1, w2 - i w3], [w2 + i w3, v - w1]]; exact, unitary to round-off.
Mat2c herm2_exp(double theta, double v, double w1, double w2, double w3) {
  const double fmag = std::sqrt(w1 * w1 + w2 * w2 + w3 * w3);
  const double c = std::cos(theta * fmag);
  // sin(theta |w|)/|w| -> theta as |w| -> 0
  const double s = fmag > 1e-290 ? std::sin(theta * fmag) / fmag : theta;
  const cd phase = std::polar(1.0, -theta * v);
  const cd is = cd(0.0, -1.0) * s;
  Mat2c m;
  m(0, 0) = phase * (c + is * w1);
  m(0, 1) = phase * (is * cd(w2, -w3));
  m(1, 0) = phase * (is * cd(w2, w3));
  m(1, 1) = phase * (c - is * w1);
  return m;
}

int next_pow2(double x) {
  int n = 1;
  while (n < x && n < (1 << 30)) n <<= 1;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

std::size_t Grid::total() const {
  std::size_t m = 1;
  for (int a = 0; a < d; ++a) m *= static_cast<std::size_t>(n[a]);
  return m;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= len[a] / n[a];
  return v;
}

VecR Grid::point(std::size_t flat) const {
  int idx[4] = {0, 0, 0, 0};
  flat_to_idx(*this, flat, idx);
  VecR x(d);
  for (int a = 0; a < d; ++a) x[a] = axis_point(a, idx[a]);
  return x;
}

void Grid::validate() const {
  require(d >= 1 && d <= 2, "grid dimension must be 1 or 2");
  require(static_cast<int>(lo.size()) == d && static_cast<int>(len.size()) == d &&
              static_cast<int>(n.size()) == d,
          "grid axis arrays must have length d");
  for (int a = 0; a < d; ++a) {
    require(len[a] > 0.0, "grid axis length must be positive");
    require(is_pow2(n[a]) && n[a] >= 2, "grid size must be a power of two");
  }
}

Grid make_grid_1d(double lo, double len, int n) {
  Grid g;
  g.d = 1;
  g.lo = {lo};
  g.len = {len};
  g.n = {n};
  g.validate();
  return g;
}

Grid make_grid_2d(double lo0, double len0, int n0, double lo1, double len1,
                  int n1) {
  Grid g;
  g.d = 2;
  g.lo = {lo0, lo1};
  g.len = {len0, len1};
  g.n = {n0, n1};
  g.validate();
  return g;
}

GridState make_grid_state(const Grid& g, double eps, int ncomp, double t0) {
  g.validate();
  require(ncomp == 1 || ncomp == 2, "grid states carry 1 or 2 components");
  require(eps > 0.0, "eps must be positive");
  GridState st;
  st.eps = eps;
  st.t = t0;
  st.grid = g;
  st.psi.assign(ncomp, VecC::Zero(static_cast<Eigen::Index>(g.total())));
  return st;
}

double grid_norm(const GridState& st) {
  double s = 0.0;
  for (const VecC& c : st.psi) s += c.squaredNorm();
  return std::sqrt(st.grid.cell_volume() * s);
}

static void require_same_grid(const GridState& a, const GridState& b) {
  require(a.grid.d == b.grid.d && a.grid.n == b.grid.n &&
              a.ncomp() == b.ncomp(),
          "grid states live on different grids");
}

cd grid_inner(const GridState& a, const GridState& b) {
  require_same_grid(a, b);
  cd s = 0.0;
  for (int c = 0; c < a.ncomp(); ++c) s += a.psi[c].dot(b.psi[c]);
  return a.grid.cell_volume() * s;
}

double grid_l2_diff(const GridState& a, const GridState& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (int c = 0; c < a.ncomp(); ++c) s += (a.psi[c] - b.psi[c]).squaredNorm();
  return std::sqrt(a.grid.cell_volume() * s);
}

// ---------------------------------------------------------------------------
// FFT

FftPlan make_fft_plan(int n) {
  require(is_pow2(n), "fft length must be a power of two");
  FftPlan p;
  p.n = n;
  int logn = 0;
  while ((1 << logn) < n) ++logn;
  p.bitrev.resize(n);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < logn; ++b) r |= ((i >> b) & 1) << (logn - 1 - b);
    p.bitrev[i] = r;
  }
  p.w.reserve(n > 1 ? n - 1 : 0);
  for (int m = 2; m <= n; m <<= 1)
    for (int j = 0; j < m / 2; ++j) {
      const double ang = -2.0 * kPi * j / m;
      p.w.emplace_back(std::cos(ang), std::sin(ang));
    }
  return p;
}

void fft_line(const FftPlan& plan, cd* x, std::ptrdiff_t stride, bool inverse) {
  const int n = plan.n;
  if (n == 1) return;
  auto at = [&](int i) -> cd& { return x[stride * i]; };
  for (int i = 0; i < n; ++i) {
    const int r = plan.bitrev[i];
    if (r > i) std::swap(at(i), at(r));
  }
  for (int m = 2; m <= n; m <<= 1) {
    const int h = m / 2;
    const cd* tw = plan.w.data() + (h - 1);
    for (int k = 0; k < n; k += m)
      for (int j = 0; j < h; ++j) {
        const cd w = inverse ? std::conj(tw[j]) : tw[j];
        const cd u = at(k + j);
        const cd v = at(k + j + h) * w;
        at(k + j) = u + v;
        at(k + j + h) = u - v;
      }
  }
  if (inverse) {
    const double s = 1.0 / n;
    for (int i = 0; i < n; ++i) at(i) *= s;
  }
}

void fft_grid(const Grid& g, std::vector<VecC>& comps, bool inverse) {
  std::vector<FftPlan> plans;
  plans.reserve(g.d);
  for (int a = 0; a < g.d; ++a) plans.push_back(make_fft_plan(g.n[a]));
  const std::size_t total = g.total();
  for (VecC& comp : comps) {
    require(static_cast<std::size_t>(comp.size()) == total,
            "component size does not match grid");
    cd* data = comp.data();
    std::size_t stride = 1;
    for (int a = 0; a < g.d; ++a) {
      const std::size_t block = stride * g.n[a];
      for (std::size_t blk = 0; blk < total; blk += block)
        for (std::size_t off = 0; off < stride; ++off)
          fft_line(plans[a], data + blk + off,
                   static_cast<std::ptrdiff_t>(stride), inverse);
      stride = block;
    }
  }
}

// ---------------------------------------------------------------------------
// SplitStepper

SplitStepper::SplitStepper(const TwoLevelModel& model, const Grid& grid,
                           double eps)
    : tl_(&model), grid_(grid), eps_(eps) {
  grid_.validate();
  require(eps > 0.0, "eps must be positive");
  require(grid_.d == model.d, "grid dimension does not match the model");
  switch (model.kind) {
    case ModelKind::kPointwise:
      family_ = Family::kPotential2;
      has_kinetic_ = false;
      break;
    case ModelKind::kSchrodinger:
      family_ = Family::kPotential2;
      has_kinetic_ = true;
      break;
    case ModelKind::kBloch:
      family_ = Family::kKinetic2;
      has_kinetic_ = true;
      break;
    default:
      fail("grid oracle requires a pointwise, Schrodinger, or Bloch model");
  }
  for (int a = 0; a < grid_.d; ++a) {
    plans_.push_back(make_fft_plan(grid_.n[a]));
    std::vector<double> xs(grid_.n[a]);
    for (int i = 0; i < grid_.n[a]; ++i) xs[i] = grid_.xi(a, i, eps_);
    xi_.push_back(std::move(xs));
  }
}

SplitStepper::SplitStepper(const ScalarModel& model, const Grid& grid,
                           double eps)
    : family_(Family::kScalar1), sc_(&model), grid_(grid), eps_(eps) {
  grid_.validate();
  require(eps > 0.0, "eps must be positive");
  require(grid_.d == model.d, "grid dimension does not match the model");
  require(model.separable,
          "grid oracle requires a separable scalar model (|xi|^2/2 + pot)");
  for (int a = 0; a < grid_.d; ++a) {
    plans_.push_back(make_fft_plan(grid_.n[a]));
    std::vector<double> xs(grid_.n[a]);
    for (int i = 0; i < grid_.n[a]; ++i) xs[i] = grid_.xi(a, i, eps_);
    xi_.push_back(std::move(xs));
  }
}

void SplitStepper::build_kinetic(double dt) {
  if (!has_kinetic_ || dt == kin_dt_) return;
  kin_dt_ = dt;
  const std::size_t total = grid_.total();
  const double theta = dt / eps_;
  int idx[4] = {0, 0, 0, 0};
  if (family_ == Family::kKinetic2) {
    kin_mat_.resize(total);
    VecR xiv(grid_.d);
    for (std::size_t i = 0; i < total; ++i) {
      flat_to_idx(grid_, i, idx);
      for (int a = 0; a < grid_.d; ++a) xiv[a] = xi_[a][idx[a]];
      const double a0 = tl_->kin_a0.value(xiv);
      const double f = tl_->kin_f.value(xiv);
      const double th = tl_->kin_theta.value(xiv);
      kin_mat_[i] =
          herm2_exp(theta, a0, f * std::cos(th), f * std::sin(th), 0.0);
    }
  } else {
    kin_phase_.resize(static_cast<Eigen::Index>(total));
    for (std::size_t i = 0; i < total; ++i) {
      flat_to_idx(grid_, i, idx);
      double k = 0.0;
      for (int a = 0; a < grid_.d; ++a) k += 0.5 * xi_[a][idx[a]] * xi_[a][idx[a]];
      kin_phase_[static_cast<Eigen::Index>(i)] = std::polar(1.0, -theta * k);
    }
  }
}

void SplitStepper::build_potential_half(double t_mid, double dt) {
  const std::size_t total = grid_.total();
  const double theta = 0.5 * dt / eps_;
  int idx[4] = {0, 0, 0, 0};
  VecR xv(1 + grid_.d);
  xv[0] = t_mid;
  if (family_ == Family::kPotential2) {
    pot_mat_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      flat_to_idx(grid_, i, idx);
      for (int a = 0; a < grid_.d; ++a) xv[1 + a] = grid_.axis_point(a, idx[a]);
      const double v = tl_->pot_v.value(xv);
      const double f = tl_->pot_f.value(xv);
      const double th = tl_->pot_theta.value(xv);
      pot_mat_[i] =
          herm2_exp(theta, v, f * std::cos(th), f * std::sin(th), 0.0);
    }
  } else {
    pot_phase_.resize(static_cast<Eigen::Index>(total));
    const ScalarField& pot =
        family_ == Family::kScalar1 ? sc_->pot : tl_->pot_v;
    for (std::size_t i = 0; i < total; ++i) {
      flat_to_idx(grid_, i, idx);
      for (int a = 0; a < grid_.d; ++a) xv[1 + a] = grid_.axis_point(a, idx[a]);
      pot_phase_[static_cast<Eigen::Index>(i)] =
          std::polar(1.0, -theta * pot.value(xv));
    }
  }
}

void SplitStepper::apply_potential_half(GridState& st) const {
  const std::size_t total = grid_.total();
  if (family_ == Family::kPotential2) {
    cd* p0 = st.psi[0].data();
    cd* p1 = st.psi[1].data();
    for (std::size_t i = 0; i < total; ++i) {
      const Mat2c& m = pot_mat_[i];
      const cd a = p0[i], b = p1[i];
      p0[i] = m(0, 0) * a + m(0, 1) * b;
      p1[i] = m(1, 0) * a + m(1, 1) * b;
    }
  } else {
    for (VecC& comp : st.psi) comp.array() *= pot_phase_.array();
  }
}

void SplitStepper::apply_kinetic(GridState& st) {
  if (!has_kinetic_) return;
  fft_grid(grid_, st.psi, false);
  if (family_ == Family::kKinetic2) {
    const std::size_t total = grid_.total();
    cd* p0 = st.psi[0].data();
    cd* p1 = st.psi[1].data();
    for (std::size_t i = 0; i < total; ++i) {
      const Mat2c& m = kin_mat_[i];
      const cd a = p0[i], b = p1[i];
      p0[i] = m(0, 0) * a + m(0, 1) * b;
      p1[i] = m(1, 0) * a + m(1, 1) * b;
    }
  } else {
    for (VecC& comp : st.psi) comp.array() *= kin_phase_.array();
  }
  fft_grid(grid_, st.psi, true);
}

void SplitStepper::step(GridState& st, double dt) {
  require(st.ncomp() == (family_ == Family::kScalar1 ? 1 : 2),
          "state component count does not match the model");
  build_kinetic(dt);
  build_potential_half(st.t + 0.5 * dt, dt);
  apply_potential_half(st);
  apply_kinetic(st);
  apply_potential_half(st);
  st.t += dt;
}

void SplitStepper::run(GridState& st, double t_end, double dt_target,
                       OracleDiagnostics* diag, const OracleOpts& opts) {
  const double t0 = st.t;
  const double span = t_end - t0;
  require(span >= 0.0, "grid oracle integrates forward in time");
  require(dt_target > 0.0, "dt must be positive");
  OracleDiagnostics local;
  OracleDiagnostics& dg = diag ? *diag : local;
  dg.initial_norm = grid_norm(st);
  if (span == 0.0) {
    dg.final_norm = dg.initial_norm;
    return;
  }
  const long nsteps = std::max<long>(1, std::lround(span / dt_target));
  const double dt = span / nsteps;
  dg.steps = nsteps;
  dg.dt = dt;
  for (long i = 0; i < nsteps; ++i) {
    step(st, dt);
    st.t = t0 + (i + 1) * span / nsteps;  // avoid additive drift
    const bool monitor =
        (opts.monitor_stride > 0 && (i + 1) % opts.monitor_stride == 0) ||
        i + 1 == nsteps;
    if (!monitor) continue;
    const double nrm = grid_norm(st);
    dg.max_norm_drift =
        std::max(dg.max_norm_drift, std::abs(nrm - dg.initial_norm));
    if (has_kinetic_) {
      const double tail = spectral_tail_fraction(st);
      dg.max_tail_fraction = std::max(dg.max_tail_fraction, tail);
      require(tail <= opts.tail_abort,
              "spectral tail mass too large; increase resolution");
      const double rim = boundary_mass_fraction(st);
      dg.max_boundary_fraction = std::max(dg.max_boundary_fraction, rim);
      require(rim <= opts.boundary_abort,
              "wave packet mass reached the box boundary; enlarge the box");
    }
  }
  dg.final_norm = grid_norm(st);
}

double SplitStepper::spectral_tail_fraction(const GridState& st) {
  std::vector<VecC> hat = st.psi;
  fft_grid(grid_, hat, false);
  double total = 0.0, tail = 0.0;
  int idx[4] = {0, 0, 0, 0};
  const std::size_t m = grid_.total();
  for (std::size_t i = 0; i < m; ++i) {
    flat_to_idx(grid_, i, idx);
    bool in_tail = false;
    for (int a = 0; a < grid_.d; ++a) {
      const int k = std::abs(grid_.freq_index(a, idx[a]));
      if (16 * k >= 7 * grid_.n[a]) in_tail = true;
    }
    double mass = 0.0;
    for (const VecC& comp : hat) mass += std::norm(comp[static_cast<Eigen::Index>(i)]);
    total += mass;
    if (in_tail) tail += mass;
  }
  return total > 0.0 ? tail / total : 0.0;
}

double SplitStepper::boundary_mass_fraction(const GridState& st) const {
  double total = 0.0, rim = 0.0;
  int idx[4] = {0, 0, 0, 0};
  const std::size_t m = grid_.total();
  for (std::size_t i = 0; i < m; ++i) {
    flat_to_idx(grid_, i, idx);
    bool in_rim = false;
    for (int a = 0; a < grid_.d; ++a) {
      const int margin = std::max(1, grid_.n[a] / 16);
      if (idx[a] < margin || idx[a] >= grid_.n[a] - margin) in_rim = true;
    }
    double mass = 0.0;
    for (const VecC& comp : st.psi) mass += std::norm(comp[static_cast<Eigen::Index>(i)]);
    total += mass;
    if (in_rim) rim += mass;
  }
  return total > 0.0 ? rim / total : 0.0;
}

// ---------------------------------------------------------------------------
// Initial data and band projection

VecC sample_wavepacket(const Grid& g, double eps, const VecR& z0,
                       const PolyGaussian& profile) {
  g.validate();
  require(static_cast<int>(z0.size()) == 2 * g.d,
          "phase-space center must have dimension 2d");
  require(profile.d == g.d, "profile dimension does not match the grid");
  const VecR q0 = z0.head(g.d);
  const VecR p0 = z0.tail(g.d);
  const double rs = std::sqrt(eps);
  const double amp = std::pow(eps, -0.25 * g.d);
  const std::size_t m = g.total();
  VecC out(static_cast<Eigen::Index>(m));
  VecR y(g.d);
  for (std::size_t i = 0; i < m; ++i) {
    const VecR x = g.point(i);
    y = (x - q0) / rs;
    const double ph = p0.dot(x - q0) / eps;
    out[static_cast<Eigen::Index>(i)] =
        amp * std::polar(1.0, ph) * evaluate(profile, y);
  }
  return out;
}

GridState initial_wavepacket(const TwoLevelModel& model, int band,
                             const Grid& g, double eps, const VecR& z0,
                             const PolyGaussian& profile, double t0) {
  require(band == 1 || band == 2, "band must be 1 or 2");
  require(model.kind == ModelKind::kPointwise ||
              model.kind == ModelKind::kSchrodinger ||
              model.kind == ModelKind::kBloch,
          "grid initial data requires a pointwise, Schrodinger, or Bloch model");
  GridState st = make_grid_state(g, eps, 2, t0);
  VecC base = sample_wavepacket(g, eps, z0, profile);
  const std::size_t m = g.total();
  if (model.kind == ModelKind::kBloch) {
    // frame depends on xi only: multiply on the transform side
    std::vector<VecC> hat{std::move(base)};
    fft_grid(g, hat, false);
    st.psi[0] = VecC::Zero(static_cast<Eigen::Index>(m));
    st.psi[1] = VecC::Zero(static_cast<Eigen::Index>(m));
    int idx[4] = {0, 0, 0, 0};
    VecR z(2 * g.d);
    z.setZero();
    for (std::size_t i = 0; i < m; ++i) {
      flat_to_idx(g, i, idx);
      for (int a = 0; a < g.d; ++a) z[g.d + a] = g.xi(a, idx[a], eps);
      const Vec2c v = model.frame(band, t0, z);
      st.psi[0][static_cast<Eigen::Index>(i)] = v[0] * hat[0][static_cast<Eigen::Index>(i)];
      st.psi[1][static_cast<Eigen::Index>(i)] = v[1] * hat[0][static_cast<Eigen::Index>(i)];
    }
    fft_grid(g, st.psi, true);
  } else {
    // frame depends on (t, x) only: multiply pointwise
    VecR z(2 * g.d);
    z.tail(g.d) = z0.tail(g.d);
    for (std::size_t i = 0; i < m; ++i) {
      z.head(g.d) = g.point(i);
      const Vec2c v = model.frame(band, t0, z);
      st.psi[0][static_cast<Eigen::Index>(i)] = v[0] * base[static_cast<Eigen::Index>(i)];
      st.psi[1][static_cast<Eigen::Index>(i)] = v[1] * base[static_cast<Eigen::Index>(i)];
    }
  }
  return st;
}

GridState initial_wavepacket_scalar(const ScalarModel& model, const Grid& g,
                                    double eps, const VecR& z0,
                                    const PolyGaussian& profile, double t0) {
  require(g.d == model.d, "grid dimension does not match the model");
  GridState st = make_grid_state(g, eps, 1, t0);
  st.psi[0] = sample_wavepacket(g, eps, z0, profile);
  return st;
}

GridState project_band(const TwoLevelModel& model, const GridState& st,
                       int band) {
  require(band == 1 || band == 2, "band must be 1 or 2");
  require(st.ncomp() == 2, "band projection needs a two-component state");
  GridState out = st;
  const Grid& g = st.grid;
  const std::size_t m = g.total();
  int idx[4] = {0, 0, 0, 0};
  VecR z(2 * g.d);
  z.setZero();
  if (model.kind == ModelKind::kBloch) {
    fft_grid(g, out.psi, false);
    for (std::size_t i = 0; i < m; ++i) {
      flat_to_idx(g, i, idx);
      for (int a = 0; a < g.d; ++a) z[g.d + a] = g.xi(a, idx[a], st.eps);
      const Mat2c pi = model.projector(band, st.t, z);
      const cd a = out.psi[0][static_cast<Eigen::Index>(i)];
      const cd b = out.psi[1][static_cast<Eigen::Index>(i)];
      out.psi[0][static_cast<Eigen::Index>(i)] = pi(0, 0) * a + pi(0, 1) * b;
      out.psi[1][static_cast<Eigen::Index>(i)] = pi(1, 0) * a + pi(1, 1) * b;
    }
    fft_grid(g, out.psi, true);
  } else if (model.kind == ModelKind::kPointwise ||
             model.kind == ModelKind::kSchrodinger) {
    for (std::size_t i = 0; i < m; ++i) {
      z.head(g.d) = g.point(i);
      const Mat2c pi = model.projector(band, st.t, z);
      const cd a = out.psi[0][static_cast<Eigen::Index>(i)];
      const cd b = out.psi[1][static_cast<Eigen::Index>(i)];
      out.psi[0][static_cast<Eigen::Index>(i)] = pi(0, 0) * a + pi(0, 1) * b;
      out.psi[1][static_cast<Eigen::Index>(i)] = pi(1, 0) * a + pi(1, 1) * b;
    }
  } else {
    fail("band projection requires a pointwise, Schrodinger, or Bloch model");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sizing heuristics

Grid auto_box(int d, const std::vector<AxisExtent>& extents, double eps,
              double pad_sigmas, int min_n, int max_n) {
  require(d >= 1 && d <= 2, "grid dimension must be 1 or 2");
  require(static_cast<int>(extents.size()) == d,
          "one extent record per axis required");
  require(eps > 0.0, "eps must be positive");
  const double rs = std::sqrt(eps);
  Grid g;
  g.d = d;
  for (int a = 0; a < d; ++a) {
    const AxisExtent& e = extents[a];
    require(e.q_hi >= e.q_lo, "extent range is inverted");
    const double pad = pad_sigmas * rs * e.sigma_x;
    const double lo = e.q_lo - pad;
    const double len = (e.q_hi - e.q_lo) + 2.0 * pad;
    // Nyquist momentum pi*eps*n/len must cover the packet in momentum, and
    // the mesh must resolve the sqrt(eps)-width envelope.
    const double p_need = e.p_abs_max + pad_sigmas * rs * e.sigma_p;
    const double n_momentum = 1.3 * len * p_need / (kPi * eps);
    const double n_envelope = 4.0 * len / (rs * e.sigma_x);
    int n = next_pow2(std::max({static_cast<double>(min_n), n_momentum,
                                n_envelope}));
    require(n <= max_n, "auto_box: required resolution exceeds max_n");
    g.lo.push_back(lo);
    g.len.push_back(len);
    g.n.push_back(n);
  }
  g.validate();
  return g;
}

namespace {

// max over grid samples of |v| + |f| (the eigenvalue magnitude bound; the
// frame angle does not enter). f may be null for scalar potentials.
double potential_scale(const ScalarField& v, const ScalarField* f,
                       const Grid& g, const std::vector<double>& times) {
  double best = 0.0;
  const std::size_t m = g.total();
  const std::size_t stride = std::max<std::size_t>(1, m / 4096);
  VecR xv(1 + g.d);
  for (double t : times) {
    xv[0] = t;
    for (std::size_t i = 0; i < m; i += stride) {
      const VecR x = g.point(i);
      for (int a = 0; a < g.d; ++a) xv[1 + a] = x[a];
      double s = std::abs(v.value(xv));
      if (f) s += std::abs(f->value(xv));
      best = std::max(best, s);
    }
  }
  return best;
}

}  // namespace

double oracle_h_scale(const TwoLevelModel& model, const Grid& g, double eps,
                      double t0, double t1) {
  const std::vector<double> times{t0, 0.5 * (t0 + t1), t1};
  double pot = 0.0, kin = 0.0;
  if (model.kind == ModelKind::kPointwise ||
      model.kind == ModelKind::kSchrodinger) {
    pot = potential_scale(model.pot_v, &model.pot_f, g, times);
    if (model.kind == ModelKind::kSchrodinger) {
      double k2 = 0.0;
      for (int a = 0; a < g.d; ++a) {
        const double ximax = kPi * eps * g.n[a] / g.len[a];
        k2 += 0.5 * ximax * ximax;
      }
      kin = k2;
    }
  } else if (model.kind == ModelKind::kBloch) {
    pot = potential_scale(model.pot_v, nullptr, g, times);
    VecR xiv(g.d);
    const int samples = 64;
    for (int a = 0; a < g.d; ++a) {
      for (int s = 0; s <= samples; ++s) {
        xiv.setZero();
        xiv[a] = kPi * eps * g.n[a] / g.len[a] * (2.0 * s / samples - 1.0);
        kin = std::max(kin, std::abs(model.kin_a0.value(xiv)) +
                                std::abs(model.kin_f.value(xiv)));
      }
    }
  } else {
    fail("oracle_h_scale requires a grid-capable model");
  }
  return std::max(1.0, pot + kin);
}

double oracle_h_scale_scalar(const ScalarModel& model, const Grid& g,
                             double eps, double t0, double t1) {
  require(model.separable, "scalar oracle requires a separable model");
  const std::vector<double> times{t0, 0.5 * (t0 + t1), t1};
  const double pot = potential_scale(model.pot, nullptr, g, times);
  double k2 = 0.0;
  for (int a = 0; a < g.d; ++a) {
    const double ximax = kPi * eps * g.n[a] / g.len[a];
    k2 += 0.5 * ximax * ximax;
  }
  return std::max(1.0, pot + k2);
}

}  // namespace wx
