#pragma once

#include <Eigen/Dense>

#include "dspec/errors.hpp"
#include "dspec/grassmann.hpp"
#include "dspec/systems.hpp"

namespace dspec {

/// Log-scaled matrix: represents e^{factor_log} * body with the body's norm
/// renormalized into [1/2, 2] after every product step.
struct ScaledMatrix {
  double factor_log = 0.0;
  Eigen::MatrixXd body;

  double log_norm() const { return factor_log + std::log(body.norm()); }
};

/// Extreme singular values (natural log) of Phi(n,m) restricted to the evolved
/// subspace, i.e. of Phi(n,m) * Q_m with Q_m an orthonormal basis of
/// Phi(m,0)[U].
struct RestrictedExtremes {
  double log_sigma_max = 0.0;
  double log_sigma_min = 0.0;
  long m = 0;
  long n = 0;
  int subspace_dim = 0;
};

/// Running product in factored form U diag(e^{log_sv}) V^T with orthonormal
/// U (d x j), orthogonal V (j x j) and log_sv sorted nonincreasing. Keeps the
/// full singular-value profile of long products without overflow or underflow.
struct SvdState {
  Eigen::MatrixXd u;
  Eigen::VectorXd log_sv;
  Eigen::MatrixXd v;

  int dim() const { return static_cast<int>(u.cols()); }
};

SvdState svd_state_init(const Subspace& q);

/// Folds one coefficient matrix into the product: state <- a * state.
void svd_state_step(SvdState& state, const Eigen::MatrixXd& a);

/// Transition matrix Phi(n,m) as a renormalized scaled product.
/// Phi(m,m) = I, Phi(n,m) = A(n-1)...A(m) for n > m and inverse products for
/// n < m.
ScaledMatrix transition(const CoefficientSequence& system, long m, long n);

/// Full transition in SVD form (all log singular values and singular bases).
SvdState transition_svd(const CoefficientSequence& system, long m, long n);

/// Relative consistency defect || Phi(n,k) Phi(k,m) - Phi(n,m) ||, log-scaled.
double cocycle_check(const CoefficientSequence& system, long m, long k, long n);

/// Orthonormal basis of Phi(m,0)[U].
Subspace evolve_subspace(const CoefficientSequence& system, const Subspace& u, long m);

RestrictedExtremes restricted_extremes(const CoefficientSequence& system,
                                       const Subspace& u, long m, long n);

namespace detail {

/// SVD of diag(exp(ell)) * n_tri where ell is sorted nonincreasing and n_tri is
/// upper triangular with moderate condition number. Returns (u, ell_out, v)
/// with diag(exp(ell)) * n_tri = u * diag(exp(ell_out)) * v^T and ell_out
/// sorted nonincreasing. Scale blocks separated by a log gap above the split
/// threshold are decoupled; the smallest singular value of each block is
/// recomputed from the inverse for relative accuracy.
void graded_triangular_svd(const Eigen::VectorXd& ell, const Eigen::MatrixXd& n_tri,
                           Eigen::MatrixXd& u_out, Eigen::VectorXd& ell_out,
                           Eigen::MatrixXd& v_out);

}  // namespace detail

}  // namespace dspec
