#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dspec/bohl.hpp"
#include "dspec/grassmann.hpp"
#include "dspec/spectrum.hpp"
#include "dspec/systems.hpp"

namespace dspec {

inline constexpr double kSlopeTol = 0.005;      // drift threshold for D1/D2 slope test
inline constexpr double kUniformityMargin = 0.05;  // exponent margin for u1/u2

/// Outcome of a D1 or D2 estimate check: the extreme constant found and the
/// least-squares drift slope over the longest windows.
struct CheckResult {
  bool holds = false;
  double constant = 0.0;
  double slope = 0.0;
};

/// D1(gamma, U): sup over windows of the decay-normalized growth stays
/// bounded. holds iff the log running-sup has slope <= slope_tol over the
/// largest quartile of window lengths; constant is the sup found.
CheckResult check_d1(const CoefficientSequence& system, double gamma, const Subspace& u,
                     const WindowGrid& grid);

/// D2(gamma, U): mirror with the inf staying bounded away from 0.
CheckResult check_d2(const CoefficientSequence& system, double gamma, const Subspace& u,
                     const WindowGrid& grid);

enum class Verdict { Holds, FailsD1, FailsD2, Inconclusive };

std::string verdict_name(Verdict v);

struct DichotomyCertificate {
  double gamma = 0.0;
  double alpha = 0.0;
  Splitting splitting;
  int j1 = 0;
  int j2 = 0;
  double c1_max = 0.0;  // largest D1 constant over sampled U in G_j1(L1)
  double c2_min = 0.0;  // smallest D2 constant over sampled U in G_j2(L2)
  int samples = 0;
  Verdict verdict = Verdict::Inconclusive;
};

/// Searches a geometric alpha grid (from the estimated gap half-width down to
/// gap_tol) for the largest rate margin such that every sampled
/// check_d1(gamma - alpha) on G_j1(L1) and check_d2(gamma + alpha) on
/// G_j2(L2) passes.
DichotomyCertificate certify_dichotomy(const CoefficientSequence& system, double gamma,
                                       const Splitting& splitting, int j1, int j2,
                                       const WindowGrid& grid, const SearchConfig& cfg);

/// Largest uniformity dimensions (u1, u2) for the splitting: u1 is the
/// largest j with sup over sampled U in G_j(L1) of the upper exponent below
/// -margin, u2 the mirror on L2. Throws NotDichotomous when the baseline
/// certificate at gamma = 0 with dims (1,1) fails.
std::pair<int, int> maximal_uniformity(const CoefficientSequence& system,
                                       const Splitting& splitting, const WindowGrid& grid,
                                       const SearchConfig& cfg,
                                       double margin = kUniformityMargin);

/// Propagates a tail D2 constant (valid for n >= m >= m0) to a global one:
/// C' = c_tail / a^{2 m0} with a = max of the coefficient sup-norms. Validates
/// the tail estimate and the resulting global estimate numerically; throws
/// TailEstimateInvalid when either fails.
double tail_to_global_constant(const CoefficientSequence& system, double gamma,
                               const Subspace& u, long m0, double c_tail,
                               const SystemBounds& bounds, const WindowGrid& grid);

struct UniformityIndependenceReport {
  std::vector<std::pair<int, int>> per_complement;  // (u1, u2) per L2
  std::pair<int, int> orthogonal;                   // for the orthogonal complement
  bool u1_consistent = true;
  bool orthogonal_u2_maximal = true;
  std::vector<std::string> findings;
};

/// Computes (u1, u2) across complements of l1 and reports violations of the
/// independence statements as findings (never as errors: the estimates are
/// numerical).
UniformityIndependenceReport uniformity_independence_check(
    const CoefficientSequence& system, const Subspace& l1,
    const std::vector<Subspace>& l2_list, const WindowGrid& grid,
    const SearchConfig& cfg);

struct ConjectureSearchConfig {
  int d = 2;
  int dim_l1 = 1;
  int num_systems = 4;
  int num_complements = 4;
  long horizon = 256;
  double alpha = 0.5;  // decay/growth rate band of the generated systems
  double b = 1.5;
  SearchConfig search;
  std::uint64_t seed = 0;
};

struct ConjectureFinding {
  std::uint64_t system_seed = 0;
  int complement_a = 0;
  int complement_b = 0;
  int u2_a = 0;
  int u2_b = 0;
  bool contradicts_remark = false;  // dim L1 in {1, d-1}: u2 should not depend on L2
};

/// Randomized sweep over dichotomous systems and complements looking for
/// splittings whose u2 differs at identical budgets.
std::vector<ConjectureFinding> conjecture_search(const ConjectureSearchConfig& cfg);

}  // namespace dspec
