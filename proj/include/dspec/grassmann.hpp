#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dspec/errors.hpp"

namespace dspec {

inline constexpr double kAngleTol = 1e-6;       // splitting transversality, rad
inline constexpr double kRankTol = 1e-10;       // relative rank threshold
inline constexpr double kContainTol = 1e-8;     // max principal angle for containment

/// A linear subspace of R^d given by an orthonormal basis (d x j). j = 0
/// denotes {0}. Immutable by convention; all operations return new values.
struct Subspace {
  int ambient_dim = 0;
  Eigen::MatrixXd basis;  // d x j, orthonormal columns

  int dim() const { return static_cast<int>(basis.cols()); }
  bool is_zero() const { return basis.cols() == 0; }

  static Subspace zero(int d) { return Subspace{d, Eigen::MatrixXd(d, 0)}; }
  static Subspace full(int d) { return Subspace{d, Eigen::MatrixXd::Identity(d, d)}; }
  static Subspace span(const Eigen::VectorXd& v);
};

struct Splitting {
  Subspace l1;
  Subspace l2;
};

/// Orthonormal basis with the same column span. Throws RankDeficient when the
/// columns are not independent at relative tolerance kRankTol.
Subspace orthonormalize(const Eigen::MatrixXd& matrix);

std::vector<Subspace> sample_uniform(int d, int j, int count, std::uint64_t seed);

/// Random j-dimensional subspaces of L.
std::vector<Subspace> sample_in(const Subspace& l, int j, int count, std::uint64_t seed);

/// Subspaces at principal-angle distance O(step) from u.
std::vector<Subspace> perturb(const Subspace& u, double step, int count,
                              std::uint64_t seed);

/// Principal angles in [0, pi/2], nondecreasing (nonincreasing cosines).
std::vector<double> principal_angles(const Subspace& u, const Subspace& v);

bool is_splitting(const Subspace& l1, const Subspace& l2, double angle_tol = kAngleTol);

/// All C(d, j) coordinate spans; exhaustive oracle for diagonal systems, d <= 8.
std::vector<Subspace> coordinate_subspaces(int d, int j);

/// Oblique projection pi_{L_i}[V] along the complementary space of the
/// splitting. The dimension may drop.
Subspace project_onto(const Splitting& splitting, const Subspace& v, int which);

/// V contained in U up to principal-angle tolerance.
bool contains(const Subspace& u, const Subspace& v, double tol = kContainTol);

/// Intersection via principal vectors with angle below tol.
Subspace intersect(const Subspace& u, const Subspace& v, double tol = kAngleTol);

/// Orthogonal complement within R^d.
Subspace orthogonal_complement(const Subspace& u);

}  // namespace dspec
