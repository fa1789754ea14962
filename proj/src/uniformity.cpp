#include "dspec/uniformity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dspec/propagation.hpp"
#include "dspec/rng.hpp"

namespace dspec {

namespace {

constexpr double kNegHuge = -std::numeric_limits<double>::infinity();
constexpr double kPosHuge = std::numeric_limits<double>::infinity();

/// Least-squares slope of y(w) over the largest quartile of window lengths.
double quartile_slope(const std::vector<double>& y, long t) {
  long w_lo = (3 * t) / 4 + 1;
  double sw = 0, sy = 0, sww = 0, swy = 0;
  long n = 0;
  for (long w = w_lo; w <= t; ++w) {
    if (!std::isfinite(y[w])) continue;
    sw += w;
    sy += y[w];
    sww += static_cast<double>(w) * w;
    swy += w * y[w];
    ++n;
  }
  if (n < 2) return 0.0;
  double denom = n * sww - sw * sw;
  return denom == 0.0 ? 0.0 : (n * swy - sw * sy) / denom;
}

CheckResult d1_from_profile(const WindowProfile& p, double gamma, long t) {
  std::vector<double> g(t + 1, kNegHuge);
  double top = 0.0;  // w = 0 contributes log ratio 0
  for (long w = 1; w <= t; ++w) {
    if (!std::isfinite(p.max_log_sigma[w])) continue;
    g[w] = p.max_log_sigma[w] - gamma * w;
    top = std::max(top, g[w]);
  }
  CheckResult r;
  r.slope = quartile_slope(g, t);
  r.holds = r.slope <= kSlopeTol;
  r.constant = std::exp(top);
  return r;
}

CheckResult d2_from_profile(const WindowProfile& p, double gamma, long t) {
  std::vector<double> h(t + 1, kPosHuge);
  double bot = 0.0;
  for (long w = 1; w <= t; ++w) {
    if (!std::isfinite(p.min_log_sigma[w])) continue;
    h[w] = p.min_log_sigma[w] - gamma * w;
    bot = std::min(bot, h[w]);
  }
  CheckResult r;
  r.slope = quartile_slope(h, t);
  r.holds = r.slope >= -kSlopeTol;
  r.constant = std::exp(bot);
  return r;
}

}  // namespace

CheckResult check_d1(const CoefficientSequence& system, double gamma, const Subspace& u,
                     const WindowGrid& grid) {
  return d1_from_profile(window_profile(system, u, grid), gamma, grid.horizon);
}

CheckResult check_d2(const CoefficientSequence& system, double gamma, const Subspace& u,
                     const WindowGrid& grid) {
  return d2_from_profile(window_profile(system, u, grid), gamma, grid.horizon);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::FailsD1: return "FailsD1";
    case Verdict::FailsD2: return "FailsD2";
    default: return "Inconclusive";
  }
}

DichotomyCertificate certify_dichotomy(const CoefficientSequence& system, double gamma,
                                       const Splitting& splitting, int j1, int j2,
                                       const WindowGrid& grid, const SearchConfig& cfg) {
  const int d = system.dim();
  const int k = splitting.l1.dim();
  if (!is_admissible(d, k, j1, j2))
    throw DimensionError("certificate dims not admissible for the splitting");
  if (!is_splitting(splitting.l1, splitting.l2))
    throw DimensionError("certificate requires a transversal splitting");

  auto pick = [&](const Subspace& l, int j, std::uint64_t seed) {
    std::vector<Subspace> us;
    if (j == 0) return us;
    if (j == l.dim()) {
      us.push_back(l);
      return us;
    }
    return sample_in(l, j, cfg.inner_samples, seed);
  };
  std::vector<Subspace> u1s = pick(splitting.l1, j1, cfg.seed + 11);
  std::vector<Subspace> u2s = pick(splitting.l2, j2, cfg.seed + 29);

  std::vector<WindowProfile> p1s, p2s;
  for (const auto& u : u1s) p1s.push_back(window_profile(system, u, grid));
  for (const auto& u : u2s) p2s.push_back(window_profile(system, u, grid));

  DichotomyCertificate cert;
  cert.gamma = gamma;
  cert.splitting = splitting;
  cert.j1 = j1;
  cert.j2 = j2;
  cert.samples = static_cast<int>(u1s.size() + u2s.size());

  // Alpha grid: geometric from the estimated exponent gap half-width down to
  // the numerical gap floor.
  double side1 = kPosHuge, side2 = kPosHuge;
  for (const auto& u : u1s) side1 = std::min(side1, gamma - upper_bohl(system, u, grid).value.value());
  for (const auto& u : u2s) side2 = std::min(side2, lower_bohl(system, u, grid).value.value() - gamma);
  double alpha_hi = std::min(side1, side2);
  if (!std::isfinite(alpha_hi) || alpha_hi < kGapTol) alpha_hi = 2 * kGapTol;
  std::vector<double> alphas;
  double ratio = std::pow(kGapTol / alpha_hi, 1.0 / 7.0);
  for (int i = 0; i < 8; ++i) alphas.push_back(alpha_hi * std::pow(ratio, i));

  const long t = grid.horizon;
  double worst_d1_slope = 0.0, worst_d2_slope = 0.0;
  for (double alpha : alphas) {
    bool ok = true;
    double c1 = 1.0, c2 = 1.0;
    for (const auto& p : p1s) {
      auto r = d1_from_profile(p, gamma - alpha, t);
      worst_d1_slope = std::max(worst_d1_slope, r.slope);
      if (!r.holds) ok = false;
      c1 = std::max(c1, r.constant);
    }
    for (const auto& p : p2s) {
      auto r = d2_from_profile(p, gamma + alpha, t);
      worst_d2_slope = std::min(worst_d2_slope, r.slope);
      if (!r.holds) ok = false;
      c2 = std::min(c2, r.constant);
    }
    if (ok) {
      cert.alpha = alpha;
      cert.c1_max = c1;
      cert.c2_min = c2;
      cert.verdict = Verdict::Holds;
      return cert;
    }
  }

  // No alpha passed: classify using the failures at the smallest alpha.
  double a = alphas.back();
  bool d1_strong = false, d1_weak = false, d2_strong = false, d2_weak = false;
  double c1 = 1.0, c2 = 1.0;
  for (const auto& p : p1s) {
    auto r = d1_from_profile(p, gamma - a, t);
    c1 = std::max(c1, r.constant);
    if (!r.holds) (r.slope > 2 * kSlopeTol ? d1_strong : d1_weak) = true;
  }
  for (const auto& p : p2s) {
    auto r = d2_from_profile(p, gamma + a, t);
    c2 = std::min(c2, r.constant);
    if (!r.holds) (r.slope < -2 * kSlopeTol ? d2_strong : d2_weak) = true;
  }
  cert.alpha = 0.0;
  cert.c1_max = c1;
  cert.c2_min = c2;
  if (d1_strong)
    cert.verdict = Verdict::FailsD1;
  else if (d2_strong)
    cert.verdict = Verdict::FailsD2;
  else if (d1_weak || d2_weak)
    cert.verdict = Verdict::Inconclusive;
  else
    cert.verdict = Verdict::Inconclusive;
  return cert;
}

std::pair<int, int> maximal_uniformity(const CoefficientSequence& system,
                                       const Splitting& splitting, const WindowGrid& grid,
                                       const SearchConfig& cfg, double margin) {
  auto base = certify_dichotomy(system, 0.0, splitting, 1, 1, grid, cfg);
  if (base.verdict != Verdict::Holds)
    throw NotDichotomous("baseline certificate at gamma = 0 with dims (1,1): " +
                         verdict_name(base.verdict));

  auto sup_upper = [&](const Subspace& l, int j, std::uint64_t seed) {
    std::vector<Subspace> us =
        j == l.dim() ? std::vector<Subspace>{l} : sample_in(l, j, cfg.inner_samples, seed);
    double s = kNegHuge;
    for (const auto& u : us) s = std::max(s, upper_bohl(system, u, grid).value.value());
    return s;
  };
  auto inf_lower = [&](const Subspace& l, int j, std::uint64_t seed) {
    std::vector<Subspace> us =
        j == l.dim() ? std::vector<Subspace>{l} : sample_in(l, j, cfg.inner_samples, seed);
    double s = kPosHuge;
    for (const auto& u : us) s = std::min(s, lower_bohl(system, u, grid).value.value());
    return s;
  };

  // s_j is monotone in j, so the first failing j ends the scan.
  int u1 = 0;
  for (int j = 1; j <= splitting.l1.dim(); ++j) {
    if (sup_upper(splitting.l1, j, cfg.seed + 101 * j) < -margin)
      u1 = j;
    else
      break;
  }
  int u2 = 0;
  for (int j = 1; j <= splitting.l2.dim(); ++j) {
    if (inf_lower(splitting.l2, j, cfg.seed + 211 * j) > margin)
      u2 = j;
    else
      break;
  }
  return {u1, u2};
}

namespace {

/// Minimal log of sigma_min(Phi(n,m) restricted to the evolved subspace) minus
/// gamma (n - m) over all windows with m >= m_start.
double min_log_defect(const CoefficientSequence& s, const Subspace& u, double gamma,
                      long m_start, long t, long stride) {
  double worst = 0.0;
  Subspace frame = evolve_subspace(s, u, m_start);
  long m = m_start;
  for (;;) {
    SvdState st = svd_state_init(frame);
    for (long n = m + 1; n <= t; ++n) {
      svd_state_step(st, s.eval(n - 1));
      worst = std::min(worst, st.log_sv(st.dim() - 1) - gamma * (n - m));
    }
    long next = m + stride;
    if (next >= t) break;
    Eigen::MatrixXd b = frame.basis;
    for (long q = m; q < next; ++q) b = s.eval(q) * b;
    frame = orthonormalize(b);
    m = next;
  }
  return worst;
}

}  // namespace

double tail_to_global_constant(const CoefficientSequence& system, double gamma,
                               const Subspace& u, long m0, double c_tail,
                               const SystemBounds& bounds, const WindowGrid& grid) {
  if (m0 < 0) throw ConfigError("tail start m0 must be nonnegative");
  if (u.is_zero()) throw ZeroSubspace("tail_to_global_constant: zero subspace");
  const long t = grid.horizon;
  if (m0 >= t) throw OutOfHorizon("tail start beyond the horizon");

  double tail_min = min_log_defect(system, u, gamma, m0, t, grid.window_stride);
  if (tail_min < std::log(c_tail) - 1e-6)
    throw TailEstimateInvalid("claimed tail D2 constant fails numerically");

  if (m0 == 0) return c_tail;

  // One inductive step per unit of m0 divides the constant by a^2.
  double a = std::max(bounds.norm_a, bounds.norm_a_inv);
  double c_global = c_tail;
  for (long i = 0; i < m0; ++i) c_global /= a * a;

  double global_min = min_log_defect(system, u, gamma, 0, t, grid.window_stride);
  if (global_min < std::log(c_global) - 1e-6)
    throw TailEstimateInvalid("propagated global D2 constant fails numerically");
  return c_global;
}

UniformityIndependenceReport uniformity_independence_check(
    const CoefficientSequence& system, const Subspace& l1,
    const std::vector<Subspace>& l2_list, const WindowGrid& grid,
    const SearchConfig& cfg) {
  UniformityIndependenceReport report;

  auto dims_for = [&](const Subspace& l2) -> std::pair<int, int> {
    return maximal_uniformity(system, Splitting{l1, l2}, grid, cfg);
  };

  Subspace orth = orthogonal_complement(l1);
  report.orthogonal = dims_for(orth);

  int u1_seen = -1;
  for (size_t i = 0; i < l2_list.size(); ++i) {
    try {
      auto uu = dims_for(l2_list[i]);
      report.per_complement.push_back(uu);
      if (u1_seen < 0) u1_seen = uu.first;
      if (uu.first != u1_seen || uu.first != report.orthogonal.first) {
        report.u1_consistent = false;
        report.findings.push_back("u1 differs at complement " + std::to_string(i));
      }
      if (uu.second > report.orthogonal.second) {
        report.orthogonal_u2_maximal = false;
        report.findings.push_back("u2 at complement " + std::to_string(i) +
                                  " exceeds the orthogonal complement");
      }
    } catch (const NotDichotomous&) {
      report.per_complement.push_back({-1, -1});
      report.findings.push_back("complement " + std::to_string(i) +
                                " failed the baseline dichotomy certificate");
    }
  }
  return report;
}

std::vector<ConjectureFinding> conjecture_search(const ConjectureSearchConfig& cfg) {
  if (cfg.d < 1 || cfg.d > 4) throw ConfigError("conjecture search needs 1 <= d <= 4");
  if (cfg.dim_l1 < 1 || cfg.dim_l1 >= cfg.d)
    throw ConfigError("conjecture search needs 1 <= dim_l1 < d");
  if (cfg.num_systems < 0 || cfg.num_complements < 1)
    throw ConfigError("conjecture search needs a positive sample budget");

  std::vector<ConjectureFinding> findings;
  const int co_dim = cfg.d - cfg.dim_l1;
  for (int si = 0; si < cfg.num_systems; ++si) {
    std::uint64_t system_seed = cfg.seed + 1000003u * (si + 1);
    auto rng = make_rng(system_seed, 1);
    Eigen::MatrixXd sim = random_orthogonal(cfg.d, rng);
    auto system = make_random_block_dichotomous(cfg.d, cfg.dim_l1, cfg.alpha, cfg.b,
                                                system_seed, sim, TimeDomain::OneSided);
    Subspace l1 = orthonormalize(sim.leftCols(cfg.dim_l1));

    std::vector<Subspace> complements;
    auto cands = sample_uniform(cfg.d, co_dim, 4 * cfg.num_complements, system_seed + 7);
    for (const auto& c : cands) {
      if (static_cast<int>(complements.size()) == cfg.num_complements) break;
      if (is_splitting(l1, c, 1e-2)) complements.push_back(c);
    }

    std::vector<int> u2s;
    for (const auto& l2 : complements) {
      try {
        u2s.push_back(maximal_uniformity(system, Splitting{l1, l2}, WindowGrid::standard(cfg.horizon),
                                         cfg.search).second);
      } catch (const NotDichotomous&) {
        u2s.push_back(-1);
      }
    }
    for (size_t a = 0; a < u2s.size(); ++a)
      for (size_t b = a + 1; b < u2s.size(); ++b) {
        if (u2s[a] < 0 || u2s[b] < 0 || u2s[a] == u2s[b]) continue;
        ConjectureFinding f;
        f.system_seed = system_seed;
        f.complement_a = static_cast<int>(a);
        f.complement_b = static_cast<int>(b);
        f.u2_a = u2s[a];
        f.u2_b = u2s[b];
        f.contradicts_remark = cfg.dim_l1 == 1 || cfg.dim_l1 == cfg.d - 1;
        findings.push_back(f);
      }
  }
  return findings;
}

}  // namespace dspec
