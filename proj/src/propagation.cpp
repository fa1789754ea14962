#include "dspec/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dspec {

namespace detail {

namespace {

constexpr double kGapSplit = 30.0;  // log gap above which scale blocks decouple

// SVD of one scale block B = diag(exp(ell - ell(p))) * N_block. The smallest
// singular value is recomputed from B^{-1} when the block spans more than a
// few decades, since the plain SVD only guarantees absolute accuracy.
void block_svd(const Eigen::VectorXd& ell_shifted, const Eigen::MatrixXd& n_block,
               Eigen::MatrixXd& u, Eigen::VectorXd& log_sigma, Eigen::MatrixXd& v) {
  const int sz = static_cast<int>(ell_shifted.size());
  Eigen::MatrixXd b = ell_shifted.array().exp().matrix().asDiagonal() * n_block;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  u = svd.matrixU();
  v = svd.matrixV();
  Eigen::VectorXd sigma = svd.singularValues();

  double spread = ell_shifted(0) - ell_shifted(sz - 1);
  if (sz > 1 && spread > 20.0) {
    // b^{-1} = n_block^{-1} * diag(exp(-ell_shifted)); entries stay bounded by
    // cond(n_block) * exp(spread), representable for spread < ~700.
    Eigen::MatrixXd n_inv = n_block.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(sz, sz));
    Eigen::MatrixXd b_inv =
        n_inv * (-ell_shifted.array()).exp().matrix().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> inv_svd(
        b_inv, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double smax_inv = inv_svd.singularValues()(0);
    if (smax_inv > 0 && std::isfinite(smax_inv)) {
      sigma(sz - 1) = 1.0 / smax_inv;
      // top triple of b^{-1} = V S^{-1} U^T is (v_min, 1/s_min, u_min) of b
      u.col(sz - 1) = inv_svd.matrixV().col(0);
      v.col(sz - 1) = inv_svd.matrixU().col(0);
    }
  }

  log_sigma.resize(sz);
  for (int i = 0; i < sz; ++i) {
    double s = sigma(i);
    log_sigma(i) = (s > 0 && std::isfinite(s)) ? std::log(s) : -745.0;
  }
}

}  // namespace

void graded_triangular_svd(const Eigen::VectorXd& ell, const Eigen::MatrixXd& n_tri,
                           Eigen::MatrixXd& u_out, Eigen::VectorXd& ell_out,
                           Eigen::MatrixXd& v_out) {
  const int k = static_cast<int>(ell.size());
  u_out = Eigen::MatrixXd::Zero(k, k);
  v_out = Eigen::MatrixXd::Zero(k, k);
  ell_out.resize(k);

  int p = 0;
  while (p < k) {
    int q = p;
    while (q + 1 < k && ell(q) - ell(q + 1) < kGapSplit) ++q;
    const int sz = q - p + 1;
    Eigen::VectorXd shift = ell.segment(p, sz).array() - ell(p);
    Eigen::MatrixXd u_b, v_b;
    Eigen::VectorXd ls;
    block_svd(shift, n_tri.block(p, p, sz, sz), u_b, ls, v_b);
    u_out.block(p, p, sz, sz) = u_b;
    v_out.block(p, p, sz, sz) = v_b;
    ell_out.segment(p, sz) = ls.array() + ell(p);
    p = q + 1;
  }

  // restore the nonincreasing order (blocks can overlap by O(log cond))
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ell_out(a) > ell_out(b); });
  Eigen::VectorXd ell_sorted(k);
  Eigen::MatrixXd u_sorted(k, k), v_sorted(k, k);
  for (int i = 0; i < k; ++i) {
    ell_sorted(i) = ell_out(order[i]);
    u_sorted.col(i) = u_out.col(order[i]);
    v_sorted.col(i) = v_out.col(order[i]);
  }
  ell_out = ell_sorted;
  u_out = u_sorted;
  v_out = v_sorted;
}

}  // namespace detail

SvdState svd_state_init(const Subspace& q) {
  if (q.is_zero()) throw ZeroSubspace("svd_state_init: zero subspace");
  SvdState s;
  s.u = q.basis;
  s.log_sv = Eigen::VectorXd::Zero(q.dim());
  s.v = Eigen::MatrixXd::Identity(q.dim(), q.dim());
  return s;
}

void svd_state_step(SvdState& state, const Eigen::MatrixXd& a) {
  const int j = state.dim();
  Eigen::MatrixXd b = a * state.u;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), j);
  Eigen::MatrixXd s =
      qr.matrixQR().topRows(j).triangularView<Eigen::Upper>();
  for (int i = 0; i < j; ++i) {
    if (s(i, i) < 0) {
      s.row(i) = -s.row(i);
      q.col(i) = -q.col(i);
    }
  }

  // SVD of s * diag(exp(log_sv)) = diag(exp(log_sv)) * n with
  // n(i,l) = s(i,l) * exp(log_sv(l) - log_sv(i)), an upper triangular factor
  // whose entries and inverse stay bounded by those of s.
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(j, j);
  for (int i = 0; i < j; ++i)
    for (int l = i; l < j; ++l)
      n(i, l) = s(i, l) * std::exp(state.log_sv(l) - state.log_sv(i));

  Eigen::MatrixXd u_f, v_f;
  Eigen::VectorXd ell;
  detail::graded_triangular_svd(state.log_sv, n, u_f, ell, v_f);
  state.u = q * u_f;
  state.v = state.v * v_f;
  state.log_sv = ell;
}

ScaledMatrix transition(const CoefficientSequence& system, long m, long n) {
  const int d = system.dim();
  ScaledMatrix p{0.0, Eigen::MatrixXd::Identity(d, d)};
  auto renorm = [&p]() {
    double s = p.body.norm();
    if (s < 0.5 || s > 2.0) {
      p.factor_log += std::log(s);
      p.body /= s;
    }
  };
  if (n > m) {
    for (long t = m; t < n; ++t) {
      p.body = system.eval(t) * p.body;
      renorm();
    }
  } else {
    for (long t = m - 1; t >= n; --t) {
      p.body = system.eval_inv(t) * p.body;
      renorm();
    }
  }
  return p;
}

SvdState transition_svd(const CoefficientSequence& system, long m, long n) {
  SvdState state = svd_state_init(Subspace::full(system.dim()));
  if (n > m) {
    for (long t = m; t < n; ++t) svd_state_step(state, system.eval(t));
  } else {
    for (long t = m - 1; t >= n; --t) svd_state_step(state, system.eval_inv(t));
  }
  return state;
}

double cocycle_check(const CoefficientSequence& system, long m, long k, long n) {
  ScaledMatrix a = transition(system, k, n);
  ScaledMatrix b = transition(system, m, k);
  ScaledMatrix c = transition(system, m, n);
  double f_prod = a.factor_log + b.factor_log;
  Eigen::MatrixXd body_prod = a.body * b.body;
  double ref = std::max(f_prod, c.factor_log);
  Eigen::MatrixXd lhs = std::exp(f_prod - ref) * body_prod;
  Eigen::MatrixXd rhs = std::exp(c.factor_log - ref) * c.body;
  double scale = std::max(lhs.norm(), rhs.norm());
  if (scale == 0.0) return 0.0;
  return (lhs - rhs).norm() / scale;
}

Subspace evolve_subspace(const CoefficientSequence& system, const Subspace& u, long m) {
  if (u.is_zero()) throw ZeroSubspace("evolve_subspace: zero subspace");
  if (m == 0) return u;
  Eigen::MatrixXd f = u.basis;
  auto reorth = [&f]() {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
    f = qr.householderQ() * Eigen::MatrixXd::Identity(f.rows(), f.cols());
  };
  if (m > 0) {
    for (long t = 0; t < m; ++t) {
      f = system.eval(t) * f;
      reorth();
    }
  } else {
    for (long t = -1; t >= m; --t) {
      f = system.eval_inv(t) * f;
      reorth();
    }
  }
  return Subspace{u.ambient_dim, f};
}

RestrictedExtremes restricted_extremes(const CoefficientSequence& system,
                                       const Subspace& u, long m, long n) {
  if (u.is_zero()) throw ZeroSubspace("restricted_extremes: zero subspace");
  if (n < m) throw OutOfHorizon("restricted_extremes: need n >= m");
  Subspace q_m = evolve_subspace(system, u, m);
  SvdState state = svd_state_init(q_m);
  for (long t = m; t < n; ++t) svd_state_step(state, system.eval(t));
  return RestrictedExtremes{state.log_sv(0), state.log_sv(state.dim() - 1), m, n,
                            u.dim()};
}

}  // namespace dspec
