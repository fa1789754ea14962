#include "dspec/bohl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dspec {

namespace {

constexpr double kNegHuge = -std::numeric_limits<double>::infinity();
constexpr double kPosHuge = std::numeric_limits<double>::infinity();

bool close(const ExtReal& a, const ExtReal& b, double tol) {
  if (a.is_finite() && b.is_finite()) return std::abs(a.value() - b.value()) <= tol;
  return a == b;
}

struct Sweep {
  std::vector<double> wmax;  // over window length w: max over starts of log sigma_max / w
  std::vector<double> wmin;  // min over starts of log sigma_min / w
};

void validate_grid(const WindowGrid& grid) {
  if (grid.horizon < 2) throw ConfigError("window grid horizon must be at least 2");
  if (grid.window_stride < 1) throw ConfigError("window stride must be >= 1");
  if (grid.window_floors.empty()) throw ConfigError("window grid needs at least one floor");
  long prev = -1;
  for (long f : grid.window_floors) {
    if (f <= prev) throw ConfigError("window floors must be strictly increasing");
    if (f >= grid.horizon) throw ConfigError("window floors must be below the horizon");
    prev = f;
  }
}

/// Harvest all windows starting at m for one start frame (an orthonormal basis
/// of Phi(m,0)[U]).
void harvest_from(const CoefficientSequence& s, const Subspace& frame, long m, long t_end,
                  Sweep& out) {
  SvdState st = svd_state_init(frame);
  const int j = st.dim();
  for (long n = m + 1; n <= t_end; ++n) {
    svd_state_step(st, s.eval(n - 1));
    long w = n - m;
    double rmax = st.log_sv(0) / static_cast<double>(w);
    double rmin = st.log_sv(j - 1) / static_cast<double>(w);
    if (rmax > out.wmax[w]) out.wmax[w] = rmax;
    if (rmin < out.wmin[w]) out.wmin[w] = rmin;
  }
}

/// Dim-1 fast path: sigma_max = sigma_min = the norm of the propagated vector,
/// so one normalized trajectory with log prefix sums covers every window.
Sweep line_sweep(const CoefficientSequence& s, const Subspace& u, const WindowGrid& grid) {
  const long t = grid.horizon;
  const bool two_sided = s.domain() == TimeDomain::TwoSided;
  const long lo = two_sided ? -t : 0;
  std::vector<double> f(2 * t + 1);  // f[n + t] = log ||Phi(n,0) x0||
  auto at = [&](long n) -> double& { return f[n + t]; };

  Eigen::VectorXd x = u.basis.col(0);
  at(0) = 0.0;
  for (long n = 1; n <= t; ++n) {
    x = s.eval(n - 1) * x;
    at(n) = at(n - 1) + std::log(x.norm());
    x.normalize();
  }
  if (two_sided) {
    x = u.basis.col(0);
    for (long n = -1; n >= -t; --n) {
      x = s.eval_inv(n) * x;
      at(n) = at(n + 1) + std::log(x.norm());
      x.normalize();
    }
  }

  Sweep out;
  out.wmax.assign(t + 1, kNegHuge);
  out.wmin.assign(t + 1, kPosHuge);
  for (long m = lo - (lo % grid.window_stride); m < t; m += grid.window_stride) {
    long n_hi = std::min(t, m + t);
    for (long n = m + 1; n <= n_hi; ++n) {
      long w = n - m;
      double r = (at(n) - at(m)) / static_cast<double>(w);
      if (r > out.wmax[w]) out.wmax[w] = r;
      if (r < out.wmin[w]) out.wmin[w] = r;
    }
  }
  return out;
}

Sweep window_sweep(const CoefficientSequence& s, const Subspace& u, const WindowGrid& grid) {
  if (u.dim() == 1) return line_sweep(s, u, grid);
  const long t = grid.horizon;
  Sweep out;
  out.wmax.assign(t + 1, kNegHuge);
  out.wmin.assign(t + 1, kPosHuge);

  // Nonnegative starts; the frame is advanced incrementally between starts.
  Subspace frame = u;
  long m = 0;
  for (;;) {
    harvest_from(s, frame, m, t, out);
    long next = m + grid.window_stride;
    if (next >= t) break;
    Eigen::MatrixXd b = frame.basis;
    for (long q = m; q < next; ++q) b = s.eval(q) * b;
    frame = orthonormalize(b);
    m = next;
  }

  if (s.domain() == TimeDomain::TwoSided) {
    frame = u;
    m = 0;
    while (m - grid.window_stride >= -t) {
      Eigen::MatrixXd b = frame.basis;
      for (long q = m - 1; q >= m - grid.window_stride; --q) b = s.eval_inv(q) * b;
      frame = orthonormalize(b);
      m -= grid.window_stride;
      harvest_from(s, frame, m, std::min(t, m + t), out);
    }
  }
  return out;
}

/// Picks the reported value from the per-floor trace: the entry at the end of
/// the longest prefix with consecutive differences within conv_tol. The final
/// floors see only a handful of near-horizon windows, so a jump there is a
/// truncation artifact rather than new information.
void finish_estimate(BohlEstimate& e, double conv_tol) {
  size_t idx = 0;
  while (idx + 1 < e.per_floor.size() &&
         close(e.per_floor[idx].second, e.per_floor[idx + 1].second, conv_tol))
    ++idx;
  e.value = e.per_floor[idx].second;
  size_t r = e.per_floor.size();
  if (r >= 2) {
    const ExtReal& a = e.per_floor[r - 2].second;
    const ExtReal& b = e.per_floor[r - 1].second;
    if (a.is_finite() && b.is_finite())
      e.spread = std::abs(a.value() - b.value());
    else
      e.spread = (a == b) ? 0.0 : kPosHuge;
    e.converged = close(a, b, conv_tol);
  } else {
    e.spread = 0.0;
    e.converged = false;
  }
}

BohlPair zero_subspace_pair(const WindowGrid& grid) {
  BohlPair p;
  p.upper.direction = BohlDirection::Upper;
  p.lower.direction = BohlDirection::Lower;
  for (long f : grid.window_floors) {
    p.upper.per_floor.emplace_back(f, ExtReal::neg_inf());
    p.lower.per_floor.emplace_back(f, ExtReal::pos_inf());
  }
  p.upper.value = ExtReal::neg_inf();
  p.lower.value = ExtReal::pos_inf();
  p.upper.converged = p.lower.converged = true;
  return p;
}

}  // namespace

WindowGrid WindowGrid::standard(long horizon) {
  WindowGrid g;
  g.horizon = horizon;
  for (long div : {16, 8, 4, 2}) {
    long f = horizon / div;
    if (f >= 1 && f < horizon && (g.window_floors.empty() || f > g.window_floors.back()))
      g.window_floors.push_back(f);
  }
  g.window_stride = 1;
  for (long t = horizon; t > 512; t /= 2) ++g.window_stride;
  return g;
}

WindowProfile window_profile(const CoefficientSequence& system, const Subspace& u,
                             const WindowGrid& grid) {
  validate_grid(grid);
  if (u.is_zero()) throw ZeroSubspace("window_profile: zero subspace");
  Sweep sw = window_sweep(system, u, grid);
  WindowProfile p;
  const long t = grid.horizon;
  p.max_log_sigma.assign(t + 1, kNegHuge);
  p.min_log_sigma.assign(t + 1, kPosHuge);
  p.max_log_sigma[0] = p.min_log_sigma[0] = 0.0;
  for (long w = 1; w <= t; ++w) {
    if (std::isfinite(sw.wmax[w])) p.max_log_sigma[w] = sw.wmax[w] * w;
    if (std::isfinite(sw.wmin[w])) p.min_log_sigma[w] = sw.wmin[w] * w;
  }
  return p;
}

BohlPair bohl_both(const CoefficientSequence& system, const Subspace& u,
                   const WindowGrid& grid) {
  validate_grid(grid);
  if (u.is_zero()) return zero_subspace_pair(grid);

  Sweep sw = window_sweep(system, u, grid);
  const long t = grid.horizon;

  // Suffix extremes: per_floor(N) covers all windows with w > N.
  std::vector<double> smax(t + 2, kNegHuge), smin(t + 2, kPosHuge);
  for (long w = t; w >= 1; --w) {
    smax[w] = std::max(sw.wmax[w], smax[w + 1]);
    smin[w] = std::min(sw.wmin[w], smin[w + 1]);
  }

  BohlPair p;
  p.upper.direction = BohlDirection::Upper;
  p.lower.direction = BohlDirection::Lower;
  for (long f : grid.window_floors) {
    double hi = smax[f + 1];
    double lo = smin[f + 1];
    p.upper.per_floor.emplace_back(f, std::isfinite(hi) ? ExtReal::finite(hi)
                                                        : ExtReal::neg_inf());
    p.lower.per_floor.emplace_back(f, std::isfinite(lo) ? ExtReal::finite(lo)
                                                        : ExtReal::pos_inf());
  }
  finish_estimate(p.upper, grid.conv_tol);
  finish_estimate(p.lower, grid.conv_tol);
  return p;
}

BohlEstimate upper_bohl(const CoefficientSequence& system, const Subspace& u,
                        const WindowGrid& grid) {
  return bohl_both(system, u, grid).upper;
}

BohlEstimate lower_bohl(const CoefficientSequence& system, const Subspace& u,
                        const WindowGrid& grid) {
  return bohl_both(system, u, grid).lower;
}

namespace {

double eval_upper(const CoefficientSequence& s, const Subspace& u, const WindowGrid& grid) {
  return upper_bohl(s, u, grid).value.value();
}

double eval_lower(const CoefficientSequence& s, const Subspace& u, const WindowGrid& grid) {
  return lower_bohl(s, u, grid).value.value();
}

/// Right-singular subspace of Phi(t,0) restricted to start (identity when
/// start is full): the j most or least amplified directions inside start.
Subspace singular_heuristic(const CoefficientSequence& s, const Subspace& start, long t,
                            int j, bool top) {
  SvdState st = svd_state_init(start);
  for (long q = 0; q < t; ++q) svd_state_step(st, s.eval(q));
  Eigen::MatrixXd cols =
      top ? st.v.leftCols(j) : st.v.rightCols(j);
  return orthonormalize(start.basis * cols);
}

/// Perturbs u inside l: the step is taken in l-coordinates so every candidate
/// stays a subspace of l.
std::vector<Subspace> perturb_within(const Subspace& l, const Subspace& u, double step,
                                     int count, std::uint64_t seed) {
  Subspace coords{l.dim(), l.basis.transpose() * u.basis};
  std::vector<Subspace> out;
  for (const auto& p : perturb(coords, step, count, seed))
    out.push_back(orthonormalize(l.basis * p.basis));
  return out;
}

/// sup over U in G_j(L) of the upper exponent (want_sup) or inf over G_j(L) of
/// the lower exponent. Returns the best value and witness.
std::pair<double, Subspace> inner_extremum(const CoefficientSequence& s, const Subspace& l,
                                           int j, const WindowGrid& grid,
                                           const SearchConfig& cfg, bool want_sup,
                                           std::uint64_t seed) {
  auto score = [&](const Subspace& u) {
    return want_sup ? eval_upper(s, u, grid) : eval_lower(s, u, grid);
  };
  auto better = [&](double a, double b) { return want_sup ? a > b : a < b; };

  if (j == l.dim()) return {score(l), l};

  std::vector<Subspace> cands = sample_in(l, j, cfg.inner_samples, seed);
  for (long t : {grid.horizon, grid.horizon / 2})
    if (t >= 1) cands.push_back(singular_heuristic(s, l, t, j, want_sup));

  double best = want_sup ? kNegHuge : kPosHuge;
  Subspace best_u = cands.front();
  for (const auto& u : cands) {
    double v = score(u);
    if (better(v, best)) {
      best = v;
      best_u = u;
    }
  }
  double step = 0.3;
  for (int r = 0; r < cfg.refine_rounds; ++r) {
    bool improved = false;
    for (const auto& u : perturb_within(l, best_u, step, 2, seed + 1000 + r)) {
      double v = score(u);
      if (better(v, best)) {
        best = v;
        best_u = u;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, best_u};
}

/// Window rates of every singular value of the full transition Phi(n,m).
/// Each window's product starts at m, so contracted directions are resolved to
/// machine precision; a fixed initial direction propagated across the whole
/// horizon loses them to roundoff amplified at the separation rate.
struct FullSweep {
  std::vector<std::vector<double>> rmax;  // [singular index][w]: max over starts
  std::vector<std::vector<double>> rmin;  // min over starts
};

FullSweep full_singular_sweep(const CoefficientSequence& s, const WindowGrid& grid) {
  const long t = grid.horizon;
  const int d = s.dim();
  FullSweep out;
  out.rmax.assign(d, std::vector<double>(t + 1, kNegHuge));
  out.rmin.assign(d, std::vector<double>(t + 1, kPosHuge));
  const long lo = s.domain() == TimeDomain::TwoSided ? -t : 0;
  for (long m = lo - (lo % grid.window_stride); m < t; m += grid.window_stride) {
    SvdState st = svd_state_init(Subspace::full(d));
    const long n_hi = std::min(t, m + t);
    for (long n = m + 1; n <= n_hi; ++n) {
      svd_state_step(st, s.eval(n - 1));
      const double w = static_cast<double>(n - m);
      for (int i = 0; i < d; ++i) {
        double r = st.log_sv(i) / w;
        if (r > out.rmax[i][n - m]) out.rmax[i][n - m] = r;
        if (r < out.rmin[i][n - m]) out.rmin[i][n - m] = r;
      }
    }
  }
  return out;
}

/// Bohl-style estimate of the rate of one singular value (0-based index from
/// the largest): sup over windows for the upper direction, inf for the lower.
BohlEstimate singular_rate_estimate(const FullSweep& fs, int index, const WindowGrid& grid,
                                    bool upper) {
  const auto& row = upper ? fs.rmax[index] : fs.rmin[index];
  const long t = static_cast<long>(row.size()) - 1;
  std::vector<double> suffix(t + 2, upper ? kNegHuge : kPosHuge);
  for (long w = t; w >= 1; --w)
    suffix[w] = upper ? std::max(row[w], suffix[w + 1]) : std::min(row[w], suffix[w + 1]);

  BohlEstimate e;
  e.direction = upper ? BohlDirection::Upper : BohlDirection::Lower;
  for (long f : grid.window_floors) {
    double v = suffix[f + 1];
    e.per_floor.emplace_back(f, std::isfinite(v) ? ExtReal::finite(v)
                                                 : (upper ? ExtReal::neg_inf()
                                                          : ExtReal::pos_inf()));
  }
  finish_estimate(e, grid.conv_tol);
  return e;
}

LimitingEstimate limiting_search(const CoefficientSequence& s, int outer_dim, int j,
                                 const WindowGrid& grid, const SearchConfig& cfg,
                                 bool upper) {
  // upper: inf over L in G_outer of sup over G_j(L); lower: sup of inf.
  validate_grid(grid);
  const int d = s.dim();

  LimitingEstimate out;
  if (j == 0) {
    // sup over G_0(L) is the exponent of {0}: -inf for upper, +inf for lower.
    out.value = upper ? ExtReal::neg_inf() : ExtReal::pos_inf();
    out.witness_l = outer_dim == 0 ? Subspace::zero(d)
                                   : sample_uniform(d, outer_dim, 1, cfg.seed)[0];
    out.inner_witness = Subspace::zero(d);
    return out;
  }

  std::vector<Subspace> ls = sample_uniform(d, outer_dim, cfg.outer_starts, cfg.seed);
  // Singular-subspace heuristics: the inf over L is attained near the least
  // amplified directions for the upper exponent, the most amplified for lower.
  for (long t : {grid.horizon, grid.horizon / 2})
    if (t >= 1)
      ls.push_back(singular_heuristic(s, Subspace::full(d), t, outer_dim, !upper));

  double best = upper ? kPosHuge : kNegHuge;
  Subspace best_l = ls.front(), best_u = ls.front();
  auto outer_better = [&](double a, double b) { return upper ? a < b : a > b; };
  int iter = 0;
  auto consider = [&](const Subspace& l) {
    auto [v, u] = inner_extremum(s, l, j, grid, cfg, upper, cfg.seed + 7 * (iter + 1));
    if (outer_better(v, best)) {
      best = v;
      best_l = l;
      best_u = u;
    }
    out.search_trace.emplace_back(iter++, best);
  };
  for (const auto& l : ls) consider(l);
  double step = 0.3;
  for (int r = 0; r < cfg.refine_rounds; ++r) {
    double before = best;
    for (const auto& l : perturb(best_l, step, 2, cfg.seed + 5000 + r)) consider(l);
    if (best == before) step *= 0.5;
  }

  out.value = ExtReal::finite(best);
  out.witness_l = best_l;
  out.inner_witness = best_u;
  out.estimate = upper ? upper_bohl(s, best_u, grid) : lower_bohl(s, best_u, grid);
  return out;
}

}  // namespace

LimitingEstimate limiting_upper(const CoefficientSequence& system, int k, int j,
                                const WindowGrid& grid, const SearchConfig& cfg) {
  const int d = system.dim();
  if (j < 0 || k < 0 || j > k || k > d)
    throw DimensionError("limiting_upper requires 0 <= j <= k <= d");
  if (k == 0) {
    LimitingEstimate out;
    out.value = ExtReal::neg_inf();
    out.witness_l = Subspace::zero(d);
    out.inner_witness = Subspace::zero(d);
    return out;
  }
  LimitingEstimate est = limiting_search(system, k, j, grid, cfg, /*upper=*/true);
  // The search optimizes over explicit subspaces and can only overestimate the
  // inf: a candidate near a contracted direction still evaluates near the top
  // rate once roundoff re-injects the expanding directions. The window rate of
  // sigma_{d-k+1} is a per-window lower bound on the inner sup for every L, so
  // the smaller of the two values is the sharper estimate.
  BohlEstimate sr =
      singular_rate_estimate(full_singular_sweep(system, grid), d - k, grid, true);
  if (sr.value < est.value) {
    est.value = sr.value;
    est.estimate = sr;
  }
  return est;
}

LimitingEstimate limiting_lower(const CoefficientSequence& system, int k, int j,
                                const WindowGrid& grid, const SearchConfig& cfg) {
  const int d = system.dim();
  if (j < 0 || k < 0 || k > d || j > d - k)
    throw DimensionError("limiting_lower requires 0 <= j <= d - k");
  if (k == d) {
    LimitingEstimate out;
    out.value = ExtReal::pos_inf();
    out.witness_l = Subspace::zero(d);
    out.inner_witness = Subspace::zero(d);
    return out;
  }
  LimitingEstimate est = limiting_search(system, d - k, j, grid, cfg, /*upper=*/false);
  // Mirror of the upper case: the top singular span of each window witnesses
  // sigma_{d-k} as an attainable inner inf, so the larger value is sharper.
  BohlEstimate sr =
      singular_rate_estimate(full_singular_sweep(system, grid), d - k - 1, grid, false);
  if (sr.value > est.value) {
    est.value = sr.value;
    est.estimate = sr;
  }
  return est;
}

bool exponent_bounds_check(const CoefficientSequence& system, const BohlEstimate& estimate,
                           const SystemBounds& bounds, double slack) {
  (void)system;
  if (!estimate.value.is_finite()) return false;
  double v = estimate.value.value();
  double lo = -std::log(bounds.norm_a_inv) - slack;
  double hi = std::log(bounds.norm_a) + slack;
  return v >= lo && v <= hi;
}

}  // namespace dspec
