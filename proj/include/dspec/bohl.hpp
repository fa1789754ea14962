#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dspec/extended.hpp"
#include "dspec/grassmann.hpp"
#include "dspec/propagation.hpp"
#include "dspec/systems.hpp"

namespace dspec {

inline constexpr double kConvTol = 0.02;  // floor-to-floor convergence tolerance

/// Finite-horizon discretization of the window limit: pairs (m, n) with
/// 0 <= m < n <= horizon, n - m > N for each floor N, start times subsampled
/// by window_stride.
struct WindowGrid {
  long horizon = 0;
  std::vector<long> window_floors;
  long window_stride = 1;
  double conv_tol = kConvTol;

  /// Floors {T/16, T/8, T/4, T/2}; stride 1 up to T = 512, logarithmic above.
  static WindowGrid standard(long horizon);
};

enum class BohlDirection { Upper, Lower };

/// Finite-horizon bracket of a Bohl exponent. per_floor lists (N, running
/// sup/inf over windows longer than N); the reported value sits at the last
/// floor of the longest prefix whose consecutive differences stay within
/// conv_tol, which discards trailing floors starved of long windows.
struct BohlEstimate {
  ExtReal value;
  std::vector<std::pair<long, ExtReal>> per_floor;
  BohlDirection direction = BohlDirection::Upper;
  bool converged = false;
  double spread = 0.0;
};

struct BohlPair {
  BohlEstimate upper;
  BohlEstimate lower;
};

struct SearchConfig {
  int outer_starts = 32;
  int inner_samples = 64;
  int refine_rounds = 20;
  std::uint64_t seed = 0;
};

/// Result of the nested Grassmannian search: the limiting exponent together
/// with the extremal outer subspace L and inner subspace U found.
struct LimitingEstimate {
  ExtReal value;
  Subspace witness_l;
  Subspace inner_witness;
  std::vector<std::pair<int, double>> search_trace;
  BohlEstimate estimate;
};

/// Extreme restricted log singular values by window length over the sampled
/// starts (the raw material of the exponent estimates and the D1/D2 checks).
/// Index = window length; index 0 holds the trivial window (both zero).
struct WindowProfile {
  std::vector<double> max_log_sigma;
  std::vector<double> min_log_sigma;
};

WindowProfile window_profile(const CoefficientSequence& system, const Subspace& u,
                             const WindowGrid& grid);

BohlEstimate upper_bohl(const CoefficientSequence& system, const Subspace& u,
                        const WindowGrid& grid);

BohlEstimate lower_bohl(const CoefficientSequence& system, const Subspace& u,
                        const WindowGrid& grid);

/// Both directions from one window sweep (the sweep dominates the cost).
BohlPair bohl_both(const CoefficientSequence& system, const Subspace& u,
                   const WindowGrid& grid);

/// beta-upper_{k,j} = inf over L in G_k of sup over U in G_j(L) of the upper
/// exponent. Requires 0 <= j <= k <= d; k = 0 gives -infinity.
LimitingEstimate limiting_upper(const CoefficientSequence& system, int k, int j,
                                const WindowGrid& grid, const SearchConfig& cfg);

/// beta-lower_{k,j} = sup over L in G_{d-k} of inf over U in G_j(L) of the
/// lower exponent. Requires 0 <= j <= d-k; k = d gives +infinity.
LimitingEstimate limiting_lower(const CoefficientSequence& system, int k, int j,
                                const WindowGrid& grid, const SearchConfig& cfg);

/// True iff the estimate lies in [-ln(norm_a_inv) - slack, ln(norm_a) + slack].
bool exponent_bounds_check(const CoefficientSequence& system, const BohlEstimate& estimate,
                           const SystemBounds& bounds, double slack = 0.0);

}  // namespace dspec
