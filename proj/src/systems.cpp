#include "dspec/systems.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "dspec/rng.hpp"
#include "json.hpp"

namespace dspec {

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const std::string& what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(m.rows() - 1);
  if (smax == 0.0 || smin / smax < kTolInv)
    throw SingularMatrix(what + ": smallest singular value below tolerance");
  return m.inverse();
}

long positive_mod(long n, long p) { return ((n % p) + p) % p; }

}  // namespace

CoefficientSequence make_constant(const Eigen::MatrixXd& matrix, TimeDomain domain) {
  if (matrix.rows() != matrix.cols())
    throw DimensionMismatch("make_constant: matrix must be square");
  auto a = std::make_shared<Eigen::MatrixXd>(matrix);
  auto ainv = std::make_shared<Eigen::MatrixXd>(checked_inverse(matrix, "make_constant"));
  int d = static_cast<int>(matrix.rows());
  return CoefficientSequence(
      d, domain, "constant", [a](long) { return *a; }, [ainv](long) { return *ainv; });
}

CoefficientSequence make_periodic(const std::vector<Eigen::MatrixXd>& period_matrices,
                                  TimeDomain domain) {
  if (period_matrices.empty()) throw EmptyPeriod("make_periodic: empty period");
  int d = static_cast<int>(period_matrices[0].rows());
  auto mats = std::make_shared<std::vector<Eigen::MatrixXd>>(period_matrices);
  auto invs = std::make_shared<std::vector<Eigen::MatrixXd>>();
  for (const auto& m : period_matrices) {
    if (m.rows() != d || m.cols() != d)
      throw DimensionMismatch("make_periodic: inconsistent matrix sizes");
    invs->push_back(checked_inverse(m, "make_periodic"));
  }
  long p = static_cast<long>(mats->size());
  return CoefficientSequence(
      d, domain, "periodic",
      [mats, p](long n) { return (*mats)[positive_mod(n, p)]; },
      [invs, p](long n) { return (*invs)[positive_mod(n, p)]; });
}

CoefficientSequence make_block_switching(const std::vector<Eigen::VectorXd>& rates,
                                         const std::vector<RateSegment>& schedule,
                                         int fallback_index, TimeDomain domain,
                                         long coverage_horizon) {
  if (rates.empty()) throw DimensionError("make_block_switching: no rate vectors");
  int d = static_cast<int>(rates[0].size());
  for (const auto& r : rates) {
    if (r.size() != d)
      throw DimensionMismatch("make_block_switching: inconsistent rate dimensions");
    if (!r.allFinite()) throw DimensionError("make_block_switching: non-finite rate");
  }
  for (const auto& seg : schedule)
    if (seg.rate_index < 0 || seg.rate_index >= static_cast<int>(rates.size()))
      throw DimensionError("make_block_switching: rate index out of range");

  auto rate_at = [rates, schedule, fallback_index](long n) -> Eigen::VectorXd {
    for (const auto& seg : schedule)
      if (n >= seg.begin && n < seg.end) return rates[seg.rate_index];
    if (fallback_index >= 0) return rates[fallback_index];
    throw ScheduleGap("make_block_switching: n = " + std::to_string(n) + " uncovered");
  };

  long lo = (domain == TimeDomain::OneSided) ? 0 : -coverage_horizon;
  for (long n = lo; n <= coverage_horizon; ++n) rate_at(n);  // ScheduleGap check

  return CoefficientSequence(
      d, domain, "block_switching",
      [rate_at](long n) {
        return Eigen::MatrixXd(rate_at(n).array().exp().matrix().asDiagonal());
      },
      [rate_at](long n) {
        return Eigen::MatrixXd((-rate_at(n).array()).exp().matrix().asDiagonal());
      });
}

CoefficientSequence make_dyadic_switching(const Eigen::VectorXd& on_rate,
                                          const Eigen::VectorXd& off_rate,
                                          TimeDomain domain) {
  if (on_rate.size() != off_rate.size())
    throw DimensionMismatch("make_dyadic_switching: rate dimensions differ");
  int d = static_cast<int>(on_rate.size());
  auto on = std::make_shared<Eigen::VectorXd>(on_rate);
  auto off = std::make_shared<Eigen::VectorXd>(off_rate);
  auto rate_at = [on, off](long n) -> const Eigen::VectorXd& {
    if (n >= 1) {
      // n is in a block [2^{2k}, 2^{2k+1}) iff floor(log2 n) is even
      int e = 0;
      long m = n;
      while (m > 1) {
        m >>= 1;
        ++e;
      }
      if (e % 2 == 0) return *on;
    }
    return *off;
  };
  return CoefficientSequence(
      d, domain, "dyadic_switching",
      [rate_at](long n) {
        return Eigen::MatrixXd(rate_at(n).array().exp().matrix().asDiagonal());
      },
      [rate_at](long n) {
        return Eigen::MatrixXd((-rate_at(n).array()).exp().matrix().asDiagonal());
      });
}

CoefficientSequence make_random_bounded(int d, std::uint64_t seed, double log_rate_max,
                                        TimeDomain domain) {
  auto at = [d, seed, log_rate_max](long n) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(n) * 2 + (n < 0 ? 1 : 0));
    Eigen::MatrixXd q = random_orthogonal(d, rng);
    std::uniform_real_distribution<double> unif(-log_rate_max, log_rate_max);
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r(i) = unif(rng);
    return std::make_pair(q, r);
  };
  return CoefficientSequence(
      d, domain, "random_bounded:" + std::to_string(seed),
      [at](long n) {
        auto [q, r] = at(n);
        return Eigen::MatrixXd(q * r.array().exp().matrix().asDiagonal());
      },
      [at](long n) {
        auto [q, r] = at(n);
        return Eigen::MatrixXd((-r.array()).exp().matrix().asDiagonal() * q.transpose());
      });
}

CoefficientSequence make_random_block_dichotomous(int d, int k, double alpha, double b,
                                                  std::uint64_t seed,
                                                  const Eigen::MatrixXd& similarity,
                                                  TimeDomain domain) {
  if (k < 0 || k > d) throw DimensionError("make_random_block_dichotomous: bad k");
  if (!(0 < alpha && alpha <= b))
    throw DimensionError("make_random_block_dichotomous: need 0 < alpha <= b");
  Eigen::MatrixXd p = similarity;
  if (p.size() == 0) p = Eigen::MatrixXd::Identity(d, d);
  if (p.rows() != d || p.cols() != d)
    throw DimensionMismatch("make_random_block_dichotomous: similarity size");
  auto pinv = std::make_shared<Eigen::MatrixXd>(checked_inverse(p, "similarity"));
  auto pm = std::make_shared<Eigen::MatrixXd>(p);
  auto rate_at = [d, k, alpha, b, seed](long n) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(n) * 2 + (n < 0 ? 1 : 0));
    std::uniform_real_distribution<double> unif(alpha, b);
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r(i) = (i < k) ? -unif(rng) : unif(rng);
    return r;
  };
  return CoefficientSequence(
      d, domain, "random_block_dichotomous:" + std::to_string(seed),
      [rate_at, pm, pinv](long n) {
        return Eigen::MatrixXd(*pm * rate_at(n).array().exp().matrix().asDiagonal() *
                               *pinv);
      },
      [rate_at, pm, pinv](long n) {
        return Eigen::MatrixXd(*pm * (-rate_at(n).array()).exp().matrix().asDiagonal() *
                               *pinv);
      });
}

namespace {

using nlohmann::json;

CoefficientSequence sequence_from_json(const json& doc, const std::string& origin) {
  for (const char* field : {"dim", "domain", "extension", "matrices"})
    if (!doc.contains(field))
      throw ParseError(origin + ": missing field \"" + std::string(field) + "\"");
  int d = doc["dim"].get<int>();
  if (d <= 0) throw ParseError(origin + ": dim must be positive");
  std::string dom = doc["domain"].get<std::string>();
  TimeDomain domain;
  if (dom == "one-sided")
    domain = TimeDomain::OneSided;
  else if (dom == "two-sided")
    domain = TimeDomain::TwoSided;
  else
    throw ParseError(origin + ": bad domain \"" + dom + "\"");
  std::string ext = doc["extension"].get<std::string>();
  if (ext != "periodic" && ext != "constant-tail")
    throw ParseError(origin + ": bad extension \"" + ext + "\"");

  std::vector<Eigen::MatrixXd> window;
  for (const auto& jm : doc["matrices"]) {
    Eigen::MatrixXd m(d, d);
    if (static_cast<int>(jm.size()) != d)
      throw DimensionMismatch(origin + ": matrix with wrong row count");
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(jm[i].size()) != d)
        throw DimensionMismatch(origin + ": row with wrong length");
      for (int j = 0; j < d; ++j) m(i, j) = jm[i][j].get<double>();
    }
    window.push_back(m);
  }
  if (window.empty()) throw ParseError(origin + ": empty matrix list");

  if (ext == "periodic") return make_periodic(window, domain);

  // constant tail: stored window at n = 0..w-1, clamped outside
  auto mats = std::make_shared<std::vector<Eigen::MatrixXd>>(window);
  auto invs = std::make_shared<std::vector<Eigen::MatrixXd>>();
  for (const auto& m : window) invs->push_back(checked_inverse(m, origin));
  long w = static_cast<long>(window.size());
  auto clamp = [w](long n) { return n < 0 ? 0 : (n >= w ? w - 1 : n); };
  return CoefficientSequence(
      d, domain, "file:constant-tail",
      [mats, clamp](long n) { return (*mats)[clamp(n)]; },
      [invs, clamp](long n) { return (*invs)[clamp(n)]; });
}

}  // namespace

CoefficientSequence load_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_sequence: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("load_sequence: " + path + ": " + e.what());
  }
  return sequence_from_json(doc, path);
}

void save_sequence(const CoefficientSequence& system, long begin, long end,
                   const std::string& extension, const std::string& path) {
  if (end <= begin) throw DimensionError("save_sequence: empty window");
  json doc;
  doc["dim"] = system.dim();
  doc["domain"] = system.domain() == TimeDomain::OneSided ? "one-sided" : "two-sided";
  doc["extension"] = extension;
  json mats = json::array();
  for (long n = begin; n < end; ++n) {
    Eigen::MatrixXd a = system.eval(n);
    json jm = json::array();
    for (int i = 0; i < a.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
      jm.push_back(row);
    }
    mats.push_back(jm);
  }
  doc["matrices"] = mats;
  std::ofstream out(path);
  if (!out) throw IoError("save_sequence: cannot open " + path);
  out << doc.dump(2) << "\n";
}

CoefficientSequence shifted(const CoefficientSequence& system, double gamma) {
  double down = std::exp(-gamma);
  double up = std::exp(gamma);
  CoefficientSequence base = system;
  return CoefficientSequence(
      system.dim(), system.domain(), system.label() + "|shift",
      [base, down](long n) { return Eigen::MatrixXd(down * base.eval(n)); },
      [base, up](long n) { return Eigen::MatrixXd(up * base.eval_inv(n)); });
}

SystemBounds empirical_bounds(const CoefficientSequence& system, long horizon) {
  if (horizon < 1) throw DimensionError("empirical_bounds: horizon must be >= 1");
  SystemBounds b;
  b.horizon = horizon;
  long lo = system.domain() == TimeDomain::OneSided ? 0 : -horizon;
  for (long n = lo; n <= horizon; ++n) {
    b.norm_a = std::max(b.norm_a, system.eval(n).operatorNorm());
    b.norm_a_inv = std::max(b.norm_a_inv, system.eval_inv(n).operatorNorm());
  }
  return b;
}

}  // namespace dspec
