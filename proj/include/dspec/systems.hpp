#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dspec/errors.hpp"

namespace dspec {

enum class TimeDomain { OneSided, TwoSided };

inline constexpr double kTolInv = 1e-10;  // relative invertibility tolerance

/// The coefficient sequence A(n) of x(n+1) = A(n) x(n), together with its
/// inverses. Immutable after construction; eval/eval_inv are pure and safe to
/// call from parallel workers.
class CoefficientSequence {
 public:
  CoefficientSequence(int dim, TimeDomain domain, std::string label,
                      std::function<Eigen::MatrixXd(long)> eval,
                      std::function<Eigen::MatrixXd(long)> eval_inv)
      : dim_(dim),
        domain_(domain),
        label_(std::move(label)),
        eval_(std::move(eval)),
        eval_inv_(std::move(eval_inv)) {}

  int dim() const { return dim_; }
  TimeDomain domain() const { return domain_; }
  const std::string& label() const { return label_; }

  Eigen::MatrixXd eval(long n) const {
    check_time(n);
    return eval_(n);
  }
  Eigen::MatrixXd eval_inv(long n) const {
    check_time(n);
    return eval_inv_(n);
  }

 private:
  void check_time(long n) const {
    if (domain_ == TimeDomain::OneSided && n < 0)
      throw OutOfHorizon("one-sided system evaluated at n = " + std::to_string(n));
  }

  int dim_;
  TimeDomain domain_;
  std::string label_;
  std::function<Eigen::MatrixXd(long)> eval_;
  std::function<Eigen::MatrixXd(long)> eval_inv_;
};

/// Empirical sup norms of A and A^{-1} over the sampled horizon.
struct SystemBounds {
  double norm_a = 0.0;
  double norm_a_inv = 0.0;
  long horizon = 0;
};

CoefficientSequence make_constant(const Eigen::MatrixXd& matrix,
                                  TimeDomain domain = TimeDomain::TwoSided);

CoefficientSequence make_periodic(const std::vector<Eigen::MatrixXd>& period_matrices,
                                  TimeDomain domain = TimeDomain::TwoSided);

/// One block of a piecewise-constant diagonal log-rate schedule; the rate
/// vector rates[rate_index] applies on [begin, end).
struct RateSegment {
  long begin = 0;
  long end = 0;
  int rate_index = 0;
};

/// Diagonal system A(n) = diag(exp(r(n))) with piecewise-constant rates.
/// Segments may overlap the fallback; fallback_index < 0 means no fallback and
/// the segments must cover [-coverage_horizon, coverage_horizon] (resp. the
/// nonnegative part for one-sided time) or ScheduleGap is thrown.
CoefficientSequence make_block_switching(const std::vector<Eigen::VectorXd>& rates,
                                         const std::vector<RateSegment>& schedule,
                                         int fallback_index, TimeDomain domain,
                                         long coverage_horizon);

/// Scalar-per-axis dyadic switching: rate on_rate on the blocks
/// [2^{2k}, 2^{2k+1}), k >= 0, and off_rate elsewhere.
CoefficientSequence make_dyadic_switching(const Eigen::VectorXd& on_rate,
                                          const Eigen::VectorXd& off_rate,
                                          TimeDomain domain = TimeDomain::OneSided);

/// A(n) drawn per time step as rotation * diag(exp(r)) with |r_i| <= log_rate_max.
/// Deterministic in (seed, n); bounded with bounded inverse by construction.
CoefficientSequence make_random_bounded(int d, std::uint64_t seed, double log_rate_max,
                                        TimeDomain domain = TimeDomain::TwoSided);

/// Random block system with a known dichotomy: in the coordinates of a fixed
/// similarity P, the first k axes carry rates in [-b, -alpha] and the rest in
/// [alpha, b]. The stable space is P * span{e_1..e_k}.
CoefficientSequence make_random_block_dichotomous(int d, int k, double alpha, double b,
                                                  std::uint64_t seed,
                                                  const Eigen::MatrixXd& similarity,
                                                  TimeDomain domain = TimeDomain::OneSided);

CoefficientSequence load_sequence(const std::string& path);

/// Writes the window [begin, end) of A in the matrix-sequence file format with
/// the given extension rule ("periodic" or "constant-tail").
void save_sequence(const CoefficientSequence& system, long begin, long end,
                   const std::string& extension, const std::string& path);

CoefficientSequence shifted(const CoefficientSequence& system, double gamma);

SystemBounds empirical_bounds(const CoefficientSequence& system, long horizon);

}  // namespace dspec
