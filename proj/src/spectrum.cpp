#include "dspec/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "dspec/propagation.hpp"

namespace dspec {

bool is_admissible(int d, int k, int j1, int j2) {
  if (k < 0 || k > d) return false;
  if (k == 0) return j1 == 0 && j2 >= 1 && j2 <= d;
  if (k == d) return j1 >= 1 && j1 <= d && j2 == 0;
  return j1 >= 1 && j1 <= k && j2 >= 1 && j2 <= d - k;
}

void validate_dimensions(int d, const UniformityDimensions& j) {
  if (static_cast<int>(j.pairs.size()) != d + 1)
    throw DimensionError("uniformity dimensions need exactly d + 1 pairs");
  for (int k = 0; k <= d; ++k)
    if (!is_admissible(d, k, j.pairs[k].first, j.pairs[k].second))
      throw DimensionError("pair (" + std::to_string(j.pairs[k].first) + "," +
                           std::to_string(j.pairs[k].second) +
                           ") is not admissible at k = " + std::to_string(k));
}

UniformityDimensions j_bd(int d) {
  UniformityDimensions j;
  j.pairs.emplace_back(0, 1);
  for (int k = 1; k < d; ++k) j.pairs.emplace_back(1, 1);
  j.pairs.emplace_back(1, 0);
  return j;
}

UniformityDimensions j_ed(int d) {
  UniformityDimensions j;
  for (int k = 0; k <= d; ++k) j.pairs.emplace_back(k, d - k);
  return j;
}

bool ResolventGap::nonempty(double gap_tol) const {
  if (lo.is_pos_inf() || hi.is_neg_inf()) return false;
  if (lo.is_neg_inf() || hi.is_pos_inf()) return true;
  return hi.value() - lo.value() > gap_tol;
}

std::vector<ResolventGap> resolvent_intervals(const CoefficientSequence& system,
                                              const UniformityDimensions& j,
                                              const WindowGrid& grid,
                                              const SearchConfig& cfg) {
  const int d = system.dim();
  validate_dimensions(d, j);
  std::vector<ResolventGap> out;
  for (int k = 0; k <= d; ++k) {
    ResolventGap g;
    g.k = k;
    auto up = limiting_upper(system, k, j.pairs[k].first, grid, cfg);
    auto lo = limiting_lower(system, k, j.pairs[k].second, grid, cfg);
    g.lo = up.value;
    g.hi = lo.value;
    g.lo_converged = up.estimate.per_floor.empty() ? true : up.estimate.converged;
    g.hi_converged = lo.estimate.per_floor.empty() ? true : lo.estimate.converged;
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

/// Truncates an infinite gap end at the empirical exponent bounds +- 1 so the
/// filtration can place finite gamma samples.
std::pair<double, double> truncated_gap(const ResolventGap& g, const SystemBounds& b) {
  double lo = g.lo.truncated(-std::log(b.norm_a_inv) - 1.0, 0.0);
  double hi = g.hi.truncated(0.0, std::log(b.norm_a) + 1.0);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

std::vector<double> gap_samples(const ResolventGap& g, const SystemBounds& b) {
  auto [lo, hi] = truncated_gap(g, b);
  return {lo + 0.25 * (hi - lo), lo + 0.50 * (hi - lo), lo + 0.75 * (hi - lo)};
}

/// Span of the right-singular directions of the forward (or backward)
/// transition whose scaled singular values decay below the margin.
Subspace decay_space(const SvdState& st, double gamma_t, double margin_t) {
  int d = st.dim();
  int cnt = 0;
  for (int i = 0; i < d; ++i)
    if (st.log_sv(i) - gamma_t < -margin_t) ++cnt;
  if (cnt == 0) return Subspace::zero(d);
  // log_sv is sorted nonincreasing: the decaying directions are the last cnt.
  return Subspace{d, st.v.rightCols(cnt)};
}

}  // namespace

std::vector<Subspace> extract_filtration(const CoefficientSequence& system,
                                         const std::vector<ResolventGap>& gaps,
                                         const WindowGrid& grid) {
  const long t = grid.horizon;
  SystemBounds bounds = empirical_bounds(system, std::min<long>(t, 256));
  SvdState st = transition_svd(system, 0, t);

  std::vector<Subspace> out;
  for (const auto& g : gaps) {
    auto [lo, hi] = truncated_gap(g, bounds);
    Subspace picked = Subspace::zero(system.dim());
    int dim_seen = -1;
    for (double gamma : gap_samples(g, bounds)) {
      double margin = 0.5 * std::min(gamma - lo, hi - gamma);
      Subspace m = decay_space(st, gamma * t, margin * t);
      if (dim_seen < 0) {
        dim_seen = m.dim();
        picked = m;
      } else if (m.dim() != dim_seen) {
        throw UnstableDimension("filtration dimension differs across gamma samples in gap at k = " +
                                std::to_string(g.k));
      }
    }
    out.push_back(std::move(picked));
  }
  return out;
}

std::vector<Subspace> extract_decomposition(const CoefficientSequence& system,
                                            const std::vector<ResolventGap>& gaps,
                                            const WindowGrid& grid) {
  if (system.domain() != TimeDomain::TwoSided)
    throw OutOfHorizon("decomposition needs a two-sided system");
  const long t = grid.horizon;
  const int d = system.dim();
  SystemBounds bounds = empirical_bounds(system, std::min<long>(t, 256));
  std::vector<Subspace> m_spaces = extract_filtration(system, gaps, grid);

  // Backward decay spaces N, one per gap: directions decaying against
  // e^{gamma n} as n -> -infinity, from the singular profile of Phi(-T,0).
  SvdState back = transition_svd(system, 0, -t);
  std::vector<Subspace> n_spaces;
  for (const auto& g : gaps) {
    auto [lo, hi] = truncated_gap(g, bounds);
    Subspace picked = Subspace::zero(d);
    int dim_seen = -1;
    for (double gamma : gap_samples(g, bounds)) {
      double margin = 0.5 * std::min(gamma - lo, hi - gamma);
      Subspace n = decay_space(back, -gamma * t, margin * t);
      if (dim_seen < 0) {
        dim_seen = n.dim();
        picked = n;
      } else if (n.dim() != dim_seen) {
        throw UnstableDimension("backward space dimension differs across gamma samples in gap at k = " +
                                std::to_string(g.k));
      }
    }
    n_spaces.push_back(std::move(picked));
  }

  std::vector<Subspace> out;
  int total = 0;
  for (size_t i = 1; i < gaps.size(); ++i) {
    const Subspace& m = m_spaces[i];
    const Subspace& n = n_spaces[i - 1];
    Subspace w = Subspace::zero(d);
    if (!m.is_zero() && !n.is_zero()) {
      if (m.dim() == d)
        w = n;
      else if (n.dim() == d)
        w = m;
      else
        w = intersect(m, n, 1e-3);
    }
    total += w.dim();
    out.push_back(std::move(w));
  }
  if (total != d)
    throw DecompositionDefect("decomposition dimensions sum to " + std::to_string(total) +
                              ", expected " + std::to_string(d));
  return out;
}

SpectrumReport compute_spectrum(const CoefficientSequence& system,
                                const UniformityDimensions& j, const WindowGrid& grid,
                                const SearchConfig& cfg, double gap_tol) {
  const int d = system.dim();
  std::vector<ResolventGap> all = resolvent_intervals(system, j, grid, cfg);

  SpectrumReport report;
  for (const auto& g : all) {
    report.diagnostics.push_back({g.k, true, g.lo, g.lo_converged});
    report.diagnostics.push_back({g.k, false, g.hi, g.hi_converged});
  }

  // Gap iteration: k_0 = 0, k_{i+1} = the next
  // dimension with a numerically nonempty gap; must terminate at k = d.
  std::vector<int> ks;
  for (int k = 0; k <= d; ++k)
    if (all[k].nonempty(gap_tol)) ks.push_back(k);
  if (ks.empty() || ks.front() != 0 || ks.back() != d)
    throw NoSpectrumStructure("gap iteration did not run from k = 0 to k = d");

  for (size_t i = 1; i < ks.size(); ++i) {
    double a = all[ks[i - 1]].hi.value();  // finite: interior gap ends are finite
    double b = all[ks[i]].lo.value();
    if (a > b) std::swap(a, b);  // search noise can cross tight endpoints
    report.intervals.push_back({a, b});
  }
  if (report.intervals.empty() || static_cast<int>(report.intervals.size()) > d)
    throw NoSpectrumStructure("expected between 1 and d spectral intervals");
  for (size_t i = 1; i < report.intervals.size(); ++i)
    if (!(report.intervals[i - 1].hi < report.intervals[i].lo))
      throw NoSpectrumStructure("spectral intervals out of order");

  for (int k : ks) report.resolvent_gaps.push_back(all[k]);
  report.filtration_dims = ks;
  report.filtration = extract_filtration(system, report.resolvent_gaps, grid);
  {
    SystemBounds bounds = empirical_bounds(system, std::min<long>(grid.horizon, 256));
    for (const auto& g : report.resolvent_gaps)
      report.filtration_gammas.push_back(gap_samples(g, bounds));
  }
  if (system.domain() == TimeDomain::TwoSided)
    report.decomposition = extract_decomposition(system, report.resolvent_gaps, grid);
  return report;
}

}  // namespace dspec
