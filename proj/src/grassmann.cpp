#include "dspec/grassmann.hpp"

#include <algorithm>
#include <cmath>

#include "dspec/rng.hpp"

namespace dspec {

Subspace Subspace::span(const Eigen::VectorXd& v) {
  double n = v.norm();
  if (n == 0.0) throw ZeroSubspace("Subspace::span of the zero vector");
  Eigen::MatrixXd b(v.size(), 1);
  b.col(0) = v / n;
  return Subspace{static_cast<int>(v.size()), b};
}

Subspace orthonormalize(const Eigen::MatrixXd& matrix) {
  int d = static_cast<int>(matrix.rows());
  int j = static_cast<int>(matrix.cols());
  if (j == 0) return Subspace::zero(d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s(j - 1) < kRankTol * std::max(1.0, s(0)))
    throw RankDeficient("orthonormalize: columns not independent");
  return Subspace{d, svd.matrixU()};
}

std::vector<Subspace> sample_uniform(int d, int j, int count, std::uint64_t seed) {
  if (j < 0 || j > d) throw DimensionError("sample_uniform: need 0 <= j <= d");
  std::vector<Subspace> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    if (j == 0) {
      out.push_back(Subspace::zero(d));
      continue;
    }
    auto rng = make_rng(seed, static_cast<std::uint64_t>(c));
    out.push_back(orthonormalize(gaussian_matrix(d, j, rng)));
  }
  return out;
}

std::vector<Subspace> sample_in(const Subspace& l, int j, int count, std::uint64_t seed) {
  if (j > l.dim()) throw DimensionError("sample_in: j exceeds dim L");
  std::vector<Subspace> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    if (j == 0) {
      out.push_back(Subspace::zero(l.ambient_dim));
      continue;
    }
    if (j == l.dim()) {
      out.push_back(l);
      continue;
    }
    auto rng = make_rng(seed, static_cast<std::uint64_t>(c));
    Eigen::MatrixXd coeff = gaussian_matrix(l.dim(), j, rng);
    out.push_back(orthonormalize(l.basis * coeff));
  }
  return out;
}

std::vector<Subspace> perturb(const Subspace& u, double step, int count,
                              std::uint64_t seed) {
  std::vector<Subspace> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    if (u.is_zero() || step == 0.0) {
      out.push_back(u);
      continue;
    }
    auto rng = make_rng(seed, static_cast<std::uint64_t>(c));
    Eigen::MatrixXd noise = gaussian_matrix(u.ambient_dim, u.dim(), rng);
    out.push_back(orthonormalize(u.basis + step * noise));
  }
  return out;
}

std::vector<double> principal_angles(const Subspace& u, const Subspace& v) {
  if (u.is_zero() || v.is_zero())
    throw ZeroSubspace("principal_angles: zero subspace");
  Eigen::MatrixXd m = u.basis.transpose() * v.basis;
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(m);
  // Small angles via the projection residual (sine values): acos alone loses
  // half the digits near 0.
  Eigen::MatrixXd r = v.basis - u.basis * m;
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(r);
  const int k = static_cast<int>(cos_svd.singularValues().size());
  const int js = static_cast<int>(sin_svd.singularValues().size());
  std::vector<double> angles;
  for (int i = 0; i < k; ++i) {
    double c = std::clamp(cos_svd.singularValues()(i), 0.0, 1.0);
    double s = std::clamp(sin_svd.singularValues()(js - 1 - i), 0.0, 1.0);
    angles.push_back(c * c > 0.5 ? std::asin(s) : std::acos(c));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

bool is_splitting(const Subspace& l1, const Subspace& l2, double angle_tol) {
  int d = l1.ambient_dim;
  if (l2.ambient_dim != d) return false;
  if (l1.dim() + l2.dim() != d) return false;
  if (l1.is_zero() || l2.is_zero()) return true;  // {0} + R^d
  auto angles = principal_angles(l1, l2);
  return angles.front() > angle_tol;
}

std::vector<Subspace> coordinate_subspaces(int d, int j) {
  if (j < 0 || j > d || d > 8)
    throw DimensionError("coordinate_subspaces: need 0 <= j <= d <= 8");
  std::vector<Subspace> out;
  std::vector<int> pick(j);
  // iterate over j-combinations of {0..d-1}
  for (int i = 0; i < j; ++i) pick[i] = i;
  while (true) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, j);
    for (int i = 0; i < j; ++i) b(pick[i], i) = 1.0;
    out.push_back(Subspace{d, b});
    int i = j - 1;
    while (i >= 0 && pick[i] == d - j + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int t = i + 1; t < j; ++t) pick[t] = pick[t - 1] + 1;
  }
  if (j == 0) out.assign(1, Subspace::zero(d));
  return out;
}

Subspace project_onto(const Splitting& splitting, const Subspace& v, int which) {
  int d = splitting.l1.ambient_dim;
  if (v.is_zero()) return Subspace::zero(d);
  int k = splitting.l1.dim();
  Eigen::MatrixXd b(d, d);
  b << splitting.l1.basis, splitting.l2.basis;
  // pi_{L1} x = B1 c1 where [B1 B2][c1; c2] = x
  Eigen::MatrixXd coords = b.colPivHouseholderQr().solve(v.basis);
  Eigen::MatrixXd img;
  if (which == 1)
    img = splitting.l1.basis * coords.topRows(k);
  else
    img = splitting.l2.basis * coords.bottomRows(d - k);
  // drop numerically null columns, then orthonormalize the rest
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(img, Eigen::ComputeThinU);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9) ++rank;
  if (rank == 0) return Subspace::zero(d);
  return Subspace{d, svd.matrixU().leftCols(rank)};
}

bool contains(const Subspace& u, const Subspace& v, double tol) {
  if (v.is_zero()) return true;
  if (u.is_zero()) return false;
  if (v.dim() > u.dim()) return false;
  auto angles = principal_angles(u, v);
  return angles.back() < tol;
}

Subspace intersect(const Subspace& u, const Subspace& v, double tol) {
  int d = u.ambient_dim;
  if (u.is_zero() || v.is_zero()) return Subspace::zero(d);
  Eigen::MatrixXd m = u.basis.transpose() * v.basis;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0)) < tol) ++r;
  if (r == 0) return Subspace::zero(d);
  return orthonormalize(u.basis * svd.matrixU().leftCols(r));
}

Subspace orthogonal_complement(const Subspace& u) {
  int d = u.ambient_dim;
  if (u.is_zero()) return Subspace::full(d);
  if (u.dim() == d) return Subspace::zero(d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(u.basis, Eigen::ComputeFullU);
  return Subspace{d, svd.matrixU().rightCols(d - u.dim())};
}

}  // namespace dspec
