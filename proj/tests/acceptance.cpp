// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dspec/io.hpp"

using namespace dspec;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

SearchConfig budgets(int outer, int inner, int refine, std::uint64_t seed) {
  SearchConfig cfg;
  cfg.outer_starts = outer;
  cfg.inner_samples = inner;
  cfg.refine_rounds = refine;
  cfg.seed = seed;
  return cfg;
}

MatrixXd diag2(double a, double b) {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double worst_angle(const Subspace& u, const Subspace& v) {
  if (u.dim() != v.dim()) return M_PI / 2;
  if (u.dim() == 0) return 0.0;
  auto a = principal_angles(u, v);
  return a.back();
}

MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  return orthonormalize(g).basis;
}

bool ext_le(const ExtReal& a, const ExtReal& b, double tol) {
  if (a.is_neg_inf() || b.is_pos_inf()) return true;
  if (a.is_pos_inf() || b.is_neg_inf()) return false;
  return a.value() <= b.value() + tol;
}

// Interlacing check across consecutive candidate gaps of one J choice.
bool interlaced(const CoefficientSequence& s, const UniformityDimensions& j,
                const WindowGrid& g, const SearchConfig& cfg, double tol) {
  auto gaps = resolvent_intervals(s, j, g, cfg);
  for (size_t k = 0; k + 1 < gaps.size(); ++k)
    if (!ext_le(gaps[k].hi, gaps[k + 1].lo, tol)) return false;
  return true;
}

bool bd_in_dilated_ed(const SpectrumReport& bd, const SpectrumReport& ed, double dilate) {
  for (const auto& b : bd.intervals) {
    bool covered = false;
    for (const auto& e : ed.intervals)
      covered = covered || (b.lo >= e.lo - dilate && b.hi <= e.hi + dilate);
    if (!covered) return false;
  }
  return true;
}

bool criterion_1() {
  auto s = make_constant(diag2(std::exp(1.0), std::exp(-1.0)));
  auto grid = WindowGrid::standard(256);
  auto cfg = budgets(8, 8, 4, 11);
  for (const auto& j : {j_ed(2), j_bd(2)}) {
    auto rep = compute_spectrum(s, j, grid, cfg);
    if (rep.intervals.size() != 2) return false;
    if (std::abs(rep.intervals[0].lo + 1) > 0.05 || std::abs(rep.intervals[0].hi + 1) > 0.05)
      return false;
    if (std::abs(rep.intervals[1].lo - 1) > 0.05 || std::abs(rep.intervals[1].hi - 1) > 0.05)
      return false;
  }
  auto rep = compute_spectrum(s, j_ed(2), grid, cfg);
  if (rep.filtration.size() != 3) return false;
  if (rep.filtration[0].dim() != 0) return false;
  if (worst_angle(rep.filtration[1], Subspace::span(Vector2d(0, 1))) > 1e-3) return false;
  if (rep.filtration[2].dim() != 2) return false;
  if (rep.decomposition.size() != 2) return false;
  if (worst_angle(rep.decomposition[0], Subspace::span(Vector2d(0, 1))) > 1e-3) return false;
  if (worst_angle(rep.decomposition[1], Subspace::span(Vector2d(1, 0))) > 1e-3) return false;
  return true;
}

bool criterion_2() {
  auto grid = WindowGrid::standard(128);
  auto cfg = budgets(6, 6, 3, 12);
  for (int d : {1, 2, 3}) {
    auto s = make_constant(MatrixXd::Identity(d, d));
    for (const auto& j : {j_bd(d), j_ed(d)}) {
      auto rep = compute_spectrum(s, j, grid, cfg);
      if (rep.intervals.size() != 1) return false;
      if (std::abs(rep.intervals[0].lo) > 0.02 || std::abs(rep.intervals[0].hi) > 0.02)
        return false;
    }
  }
  return true;
}

bool criterion_3() {
  VectorXd on(1), off(1);
  on << 1.0;
  off << -1.0;
  auto s = make_dyadic_switching(on, off);
  auto rep = compute_spectrum(s, j_ed(1), WindowGrid::standard(2048), budgets(4, 4, 2, 13));
  if (rep.intervals.size() != 1) return false;
  return std::abs(rep.intervals[0].lo + 1) <= 0.1 && std::abs(rep.intervals[0].hi - 1) <= 0.1;
}

bool criterion_4() {
  auto grid = WindowGrid::standard(256);
  auto cfg = budgets(8, 8, 4, 14);
  {
    MatrixXd a0(1, 1), a1(1, 1);
    a0 << 2.0;
    a1 << 0.5;
    auto rep = compute_spectrum(make_periodic({a0, a1}), j_ed(1), grid, cfg);
    if (rep.intervals.size() != 1) return false;
    if (std::abs(rep.intervals[0].lo) > 0.02 || std::abs(rep.intervals[0].hi) > 0.02)
      return false;
  }
  // 2-periodic matrix systems against the monodromy-eigenvalue oracle.
  MatrixXd a0(2, 2), a1(2, 2);
  a0 << 2.0, 1.0, 0.0, 0.5;
  a1 << 1.5, 1.0, 0.0, 0.6;
  for (int variant = 0; variant < 2; ++variant) {
    MatrixXd b0 = a0, b1 = a1;
    if (variant == 1) {
      MatrixXd p = random_orthogonal(2, 77);
      b0 = p * a0 * p.transpose();
      b1 = p * a1 * p.transpose();
    }
    MatrixXd monodromy = b1 * b0;
    Eigen::EigenSolver<MatrixXd> eig(monodromy);
    std::vector<double> rates;
    for (int i = 0; i < 2; ++i) rates.push_back(std::log(std::abs(eig.eigenvalues()(i))) / 2);
    std::sort(rates.begin(), rates.end());

    auto rep = compute_spectrum(make_periodic({b0, b1}), j_ed(2), grid, cfg);
    if (rep.intervals.size() != 2) return false;
    for (int i = 0; i < 2; ++i) {
      if (std::abs(rep.intervals[i].lo - rates[i]) > 0.05) return false;
      if (std::abs(rep.intervals[i].hi - rates[i]) > 0.05) return false;
    }
  }
  return true;
}

bool criterion_5() {
  auto grid = WindowGrid::standard(128);
  for (int i = 0; i < 10; ++i) {
    std::uint64_t seed = 400 + i;
    auto s = make_random_bounded(2, seed, 0.8);
    auto cfg = budgets(6, 6, 3, seed);
    auto base = compute_spectrum(s, j_ed(2), grid, cfg);
    for (double c : {-1.0, 0.3, 2.0}) {
      auto rep = compute_spectrum(shifted(s, c), j_ed(2), grid, cfg);
      if (rep.intervals.size() != base.intervals.size()) return false;
      for (size_t k = 0; k < rep.intervals.size(); ++k) {
        if (std::abs(rep.intervals[k].lo - (base.intervals[k].lo - c)) > 1e-6) return false;
        if (std::abs(rep.intervals[k].hi - (base.intervals[k].hi - c)) > 1e-6) return false;
      }
    }
  }
  return true;
}

std::vector<CoefficientSequence> test_systems() {
  std::vector<CoefficientSequence> out;
  out.push_back(make_constant(diag2(std::exp(1.0), std::exp(-1.0))));
  out.push_back(make_constant(MatrixXd::Identity(2, 2)));
  MatrixXd d3 = MatrixXd::Zero(3, 3);
  d3(0, 0) = std::exp(-1.0);
  d3(1, 1) = 1.0;
  d3(2, 2) = std::exp(1.0);
  out.push_back(make_constant(d3));
  MatrixXd a0(2, 2), a1(2, 2);
  a0 << 2.0, 1.0, 0.0, 0.5;
  a1 << 1.5, 1.0, 0.0, 0.6;
  out.push_back(make_periodic({a0, a1}));
  out.push_back(make_random_bounded(2, 21, 0.8));
  out.push_back(make_random_bounded(2, 22, 0.8));
  out.push_back(make_random_bounded(3, 23, 0.6));
  return out;
}

bool criterion_6() {
  auto systems = test_systems();
  for (size_t i = 0; i < systems.size(); ++i) {
    const auto& s = systems[i];
    long t = s.dim() >= 3 ? 96 : 128;
    auto grid = WindowGrid::standard(t);
    auto cfg = budgets(6, 6, 3, 600 + i);
    if (!interlaced(s, j_bd(s.dim()), grid, cfg, 0.02)) return false;
    if (!interlaced(s, j_ed(s.dim()), grid, cfg, 0.02)) return false;
  }
  return true;
}

bool criterion_7() {
  auto systems = test_systems();
  for (size_t i = 0; i < systems.size(); ++i) {
    const auto& s = systems[i];
    long t = s.dim() >= 3 ? 96 : 128;
    auto grid = WindowGrid::standard(t);
    auto cfg = budgets(6, 6, 3, 700 + i);
    auto bd = compute_spectrum(s, j_bd(s.dim()), grid, cfg);
    auto ed = compute_spectrum(s, j_ed(s.dim()), grid, cfg);
    if (!bd_in_dilated_ed(bd, ed, 0.05)) return false;
  }
  return true;
}

bool criterion_8() {
  auto grid = WindowGrid::standard(128);
  std::vector<CoefficientSequence> systems;
  systems.push_back(make_random_bounded(2, 80, 0.4));
  systems.push_back(make_random_bounded(2, 82, 0.3));
  for (size_t si = 0; si < systems.size(); ++si) {
    const auto& s = systems[si];
    double brute_upper = std::numeric_limits<double>::infinity();
    double brute_lower = -std::numeric_limits<double>::infinity();
    const int lines = 10000;
    for (int i = 0; i < lines; ++i) {
      double theta = M_PI * i / lines;
      auto u = Subspace::span(Vector2d(std::cos(theta), std::sin(theta)));
      auto pair = bohl_both(s, u, grid);
      brute_upper = std::min(brute_upper, pair.upper.value.value());
      brute_lower = std::max(brute_lower, pair.lower.value.value());
    }
    auto cfg = budgets(16, 16, 8, 800 + si);
    auto up = limiting_upper(s, 1, 1, grid, cfg);
    auto lo = limiting_lower(s, 1, 1, grid, cfg);
    if (std::abs(up.value.value() - brute_upper) > 0.05) return false;
    if (std::abs(lo.value.value() - brute_lower) > 0.05) return false;
  }

  // restricted_extremes against dense direction sampling inside U.
  for (int d : {2, 3}) {
    auto s = make_random_bounded(d, 90 + d, 0.5);
    const long m = 3, n = 40;
    for (int ju = 1; ju <= 2; ++ju) {
      if (ju > d) continue;
      auto u = sample_uniform(d, ju, 1, 91 + d).front();
      auto ext = restricted_extremes(s, u, m, n);
      Subspace q = evolve_subspace(s, u, m);
      ScaledMatrix phi = transition(s, m, n);
      std::mt19937_64 rng(92 + d + ju);
      std::normal_distribution<double> gauss;
      double smax = -std::numeric_limits<double>::infinity();
      double smin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 10000; ++i) {
        VectorXd c(ju);
        for (int r = 0; r < ju; ++r) c(r) = gauss(rng);
        c.normalize();
        double ln = phi.factor_log + std::log((phi.body * (q.basis * c)).norm());
        smax = std::max(smax, ln);
        smin = std::min(smin, ln);
      }
      if (std::abs(smax - ext.log_sigma_max) > 0.01) return false;
      if (std::abs(smin - ext.log_sigma_min) > 0.01) return false;
    }
  }
  return true;
}

bool criterion_9() {
  auto grid = WindowGrid::standard(128);
  std::mt19937_64 rng(900);
  for (int i = 0; i < 100; ++i) {
    int d = 1 + static_cast<int>(rng() % 3);
    auto s = make_random_bounded(d, 1000 + i, 0.9);
    int ju = 1 + static_cast<int>(rng() % d);
    auto u = sample_uniform(d, ju, 1, 2000 + i).front();
    auto pair = bohl_both(s, u, grid);
    auto bounds = empirical_bounds(s, 128);
    if (!exponent_bounds_check(s, pair.upper, bounds, 0.01)) return false;
    if (!exponent_bounds_check(s, pair.lower, bounds, 0.01)) return false;
  }
  return true;
}

bool criterion_10() {
  auto grid = WindowGrid::standard(128);
  {
    MatrixXd a(1, 1);
    a << 2.0;
    auto s = make_constant(a, TimeDomain::OneSided);
    auto bounds = empirical_bounds(s, 32);
    auto u = Subspace::full(1);
    double c = 1.0;
    for (long m0 = 0; m0 <= 5; ++m0) {
      double got = tail_to_global_constant(s, std::log(2.0), u, m0, 1.0, bounds, grid);
      if (got != c) return false;  // exact arithmetic: one /a^2 per step
      c /= 4.0;
    }
  }
  for (int i = 0; i < 20; ++i) {
    auto s = make_random_block_dichotomous(2, 1, 0.5, 1.0, 1050 + i, MatrixXd::Identity(2, 2));
    auto bounds = empirical_bounds(s, 128);
    auto u = Subspace::span(Vector2d(0, 1));  // the growing axis
    double gamma = 0.3;
    auto tail = check_d2(s, gamma, u, grid);
    double c = tail_to_global_constant(s, gamma, u, 4, tail.constant, bounds, grid);
    auto global = check_d2(s, gamma, u, grid);
    if (!global.holds || global.constant < c) return false;
  }
  return true;
}

bool criterion_11() {
  for (int i = 0; i < 20; ++i) {
    int d = i < 14 ? 2 : 3;
    int k = d == 2 ? 1 : 1 + (i % 2);  // dim L1 in {1, d-1}
    long t = d == 2 ? 128 : 96;
    auto grid = WindowGrid::standard(t);
    auto cfg = budgets(4, 4, 2, 1100 + i);
    MatrixXd p = random_orthogonal(d, 1200 + i);
    auto s = make_random_block_dichotomous(d, k, 0.6, 1.2, 1300 + i, p);
    Subspace l1 = orthonormalize(p.leftCols(k));

    std::vector<Subspace> complements;
    std::uint64_t cs = 1400 + i;
    while (complements.size() < 10) {
      auto cand = sample_uniform(d, d - k, 4, cs++);
      for (const auto& c : cand)
        if (complements.size() < 10 && is_splitting(l1, c, 1e-2)) complements.push_back(c);
    }
    int u1_ref = -1, u2_ref = -1;
    for (const auto& l2 : complements) {
      auto [u1, u2] = maximal_uniformity(s, {l1, l2}, grid, cfg);
      if (u1_ref < 0) {
        u1_ref = u1;
        u2_ref = u2;
      }
      if (u1 != u1_ref || u2 != u2_ref) return false;
    }
  }
  return true;
}

bool criterion_12() {
  const std::string dir = "acceptance_out";
  std::ofstream cfg_file(dir + ".json");
  cfg_file << R"({"system": {"generator": "random-bounded", "d": 2, "log_rate_max": 0.6},
                 "domain": "two-sided", "horizon": 128, "J": "ed", "seed": 7,
                 "budgets": {"outer_starts": 4, "inner_samples": 4, "refine_rounds": 2},
                 "output_dir": ")" +
              dir + R"("})";
  cfg_file.close();

  auto strip_timestamp = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
      if (line.find("\"timestamp\"") == std::string::npos) out << line << "\n";
    return out.str();
  };

  auto cfg = load_config(dir + ".json");
  if (cmd_spectrum(cfg) != kExitOk) return false;
  std::string first = strip_timestamp(dir + "/spectrum_report.json");
  if (cmd_spectrum(cfg) != kExitOk) return false;
  std::string second = strip_timestamp(dir + "/spectrum_report.json");
  return !first.empty() && first == second;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<bool()> run;
  };
  const std::vector<Criterion> criteria = {
      {"01 constant diagonal oracle (spectrum, filtration, decomposition)", criterion_1},
      {"02 identity spectrum is [0,0] for both canonical J, d = 1..3", criterion_2},
      {"03 dyadic switching yields the interval [-1,1]", criterion_3},
      {"04 periodic systems match the monodromy oracle", criterion_4},
      {"05 shift equivariance of the spectrum", criterion_5},
      {"06 interlacing of limiting exponents", criterion_6},
      {"07 BD spectrum contained in dilated ED spectrum", criterion_7},
      {"08 search agrees with brute-force scans", criterion_8},
      {"09 Bohl exponents respect the coefficient norm bounds", criterion_9},
      {"10 tail constant propagates to a valid global constant", criterion_10},
      {"11 uniformity dimensions independent of the complement", criterion_11},
      {"12 byte-identical reports modulo timestamp", criterion_12},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s [%.1fs]%s\n", ok ? "PASS" : "FAIL", c.name, secs, note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
