#pragma once

#include <utility>
#include <vector>

#include "dspec/bohl.hpp"
#include "dspec/extended.hpp"
#include "dspec/grassmann.hpp"
#include "dspec/systems.hpp"

namespace dspec {

inline constexpr double kGapTol = 0.02;  // minimal numerically-credible gap width

/// Per-dimension choice (j1_k, j2_k), k = 0..d, of subspace dimensions on
/// which the dichotomy estimates must hold uniformly.
struct UniformityDimensions {
  std::vector<std::pair<int, int>> pairs;

  int d() const { return static_cast<int>(pairs.size()) - 1; }
};

/// k-admissibility: k=0 needs j1=0, j2 in 1..d; 1<=k<=d-1 needs j1 in 1..k and
/// j2 in 1..d-k; k=d needs j1 in 1..d, j2=0.
bool is_admissible(int d, int k, int j1, int j2);

/// Throws DimensionError unless every pair of j is k-admissible for dimension d.
void validate_dimensions(int d, const UniformityDimensions& j);

/// Bohl-dichotomy dimensions ((0,1),(1,1),...,(1,1),(1,0)).
UniformityDimensions j_bd(int d);

/// Exponential-dichotomy dimensions ((0,d),(1,d-1),...,(d,0)).
UniformityDimensions j_ed(int d);

/// Candidate resolvent gap at dimension k: the open interval between the
/// limiting exponents, empty when hi - lo <= gap_tol.
struct ResolventGap {
  int k = 0;
  ExtReal lo;  // limiting upper exponent at (k, j1_k); -inf at k = 0
  ExtReal hi;  // limiting lower exponent at (k, j2_k); +inf at k = d
  bool lo_converged = true;
  bool hi_converged = true;

  bool nonempty(double gap_tol) const;
};

std::vector<ResolventGap> resolvent_intervals(const CoefficientSequence& system,
                                              const UniformityDimensions& j,
                                              const WindowGrid& grid,
                                              const SearchConfig& cfg);

struct SpectralInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ExponentDiagnostic {
  int k = 0;
  bool upper = true;  // false: lower limiting exponent
  ExtReal value;
  bool converged = true;
};

struct SpectrumReport {
  std::vector<SpectralInterval> intervals;
  std::vector<ResolventGap> resolvent_gaps;  // the nonempty gaps, ordered
  std::vector<int> filtration_dims;          // k_0 < ... < k_l
  std::vector<Subspace> filtration;          // M at each nonempty gap
  std::vector<std::vector<double>> filtration_gammas;  // sample points per gap
  std::vector<Subspace> decomposition;       // TwoSided only, else empty
  std::vector<ExponentDiagnostic> diagnostics;
};

/// Spectral intervals via the gap iteration k_{i+1} = first n > k_i with a
/// nonempty gap; a_i and b_i are the bracketing limiting exponents. Populates
/// the filtration (and the decomposition for two-sided systems).
SpectrumReport compute_spectrum(const CoefficientSequence& system,
                                const UniformityDimensions& j, const WindowGrid& grid,
                                const SearchConfig& cfg, double gap_tol = kGapTol);

/// Forward-decay subspaces M, one per gap: for gamma inside the gap, the span
/// of right-singular directions of Phi(T,0) decaying against e^{gamma n}.
/// Throws UnstableDimension when the three gamma samples of a gap disagree.
std::vector<Subspace> extract_filtration(const CoefficientSequence& system,
                                         const std::vector<ResolventGap>& gaps,
                                         const WindowGrid& grid);

/// Two-sided spectral decomposition W_i = M_i intersected with the backward
/// decay space N_{i-1}. Throws DecompositionDefect when the dimensions do not
/// sum to d.
std::vector<Subspace> extract_decomposition(const CoefficientSequence& system,
                                            const std::vector<ResolventGap>& gaps,
                                            const WindowGrid& grid);

}  // namespace dspec
