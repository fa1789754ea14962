#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "dspec/systems.hpp"

using namespace dspec;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MatrixXd diag2(double a, double b) {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

MatrixXd scalar(double a) {
  MatrixXd m(1, 1);
  m(0, 0) = a;
  return m;
}

}  // namespace

TEST_CASE("make_constant evaluates to the given matrix everywhere") {
  auto s = make_constant(MatrixXd::Identity(2, 2));
  CHECK(s.eval(0).isIdentity(1e-14));
  CHECK(s.eval(7).isIdentity(1e-14));

  auto e = make_constant(diag2(std::exp(1.0), std::exp(-1.0)));
  for (long n : {0L, 5L, -3L}) {
    CHECK(e.eval(n)(0, 0) == doctest::Approx(std::exp(1.0)));
    CHECK(e.eval(n)(1, 1) == doctest::Approx(std::exp(-1.0)));
  }
}

TEST_CASE("make_constant rejects singular matrices") {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(0, 0) = 1.0;
  CHECK_THROWS_AS(make_constant(m), SingularMatrix);
}

TEST_CASE("make_periodic alternates and handles negative indices") {
  auto s = make_periodic({scalar(2.0), scalar(0.5)});
  CHECK(s.eval(0)(0, 0) == doctest::Approx(2.0));
  CHECK(s.eval(1)(0, 0) == doctest::Approx(0.5));
  CHECK(s.eval(2)(0, 0) == doctest::Approx(2.0));
  CHECK(s.eval(-1)(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("make_periodic with one matrix equals make_constant") {
  MatrixXd m = diag2(2.0, 3.0);
  auto p = make_periodic({m});
  auto c = make_constant(m);
  for (long n = -4; n <= 4; ++n) CHECK((p.eval(n) - c.eval(n)).norm() < 1e-14);
}

TEST_CASE("make_periodic rejects empty and singular input") {
  CHECK_THROWS_AS(make_periodic({}), EmptyPeriod);
  CHECK_THROWS_AS(make_periodic({MatrixXd::Zero(2, 2)}), SingularMatrix);
}

TEST_CASE("block switching covers identity and constant special cases") {
  VectorXd zero1 = VectorXd::Zero(1);
  auto id = make_block_switching({zero1}, {}, 0, TimeDomain::OneSided, 16);
  CHECK(id.eval(3)(0, 0) == doctest::Approx(1.0));

  Vector2d r(1.0, -1.0);
  auto c = make_block_switching({r}, {}, 0, TimeDomain::TwoSided, 8);
  CHECK(c.eval(-2)(0, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(c.eval(5)(1, 1) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("block switching reports schedule gaps") {
  VectorXd r = VectorXd::Ones(1);
  std::vector<RateSegment> sched = {{0, 4, 0}};
  CHECK_THROWS_AS(make_block_switching({r}, sched, -1, TimeDomain::OneSided, 8),
                  ScheduleGap);
}

TEST_CASE("dyadic switching follows the dyadic block pattern") {
  VectorXd on = VectorXd::Ones(1), off = -VectorXd::Ones(1);
  auto s = make_dyadic_switching(on, off);
  auto rate = [&](long n) { return std::log(s.eval(n)(0, 0)); };
  CHECK(rate(0) == doctest::Approx(-1.0));
  CHECK(rate(1) == doctest::Approx(1.0));   // [1,2)
  CHECK(rate(2) == doctest::Approx(-1.0));  // [2,4)
  CHECK(rate(4) == doctest::Approx(1.0));   // [4,8)
  CHECK(rate(7) == doctest::Approx(1.0));
  CHECK(rate(8) == doctest::Approx(-1.0));  // [8,16)
  CHECK(rate(1024) == doctest::Approx(1.0));
  CHECK(rate(2047) == doctest::Approx(1.0));
}

TEST_CASE("one-sided systems refuse negative times") {
  auto s = make_constant(scalar(2.0), TimeDomain::OneSided);
  CHECK_THROWS_AS(s.eval(-1), OutOfHorizon);
}

TEST_CASE("shifted scales by exp(-gamma) and composes additively") {
  auto s = make_periodic({scalar(2.0), scalar(0.5)});
  auto s0 = shifted(s, 0.0);
  for (long n = -3; n <= 3; ++n) CHECK((s0.eval(n) - s.eval(n)).norm() < 1e-14);

  auto half = shifted(make_constant(MatrixXd::Identity(3, 3)), std::log(2.0));
  CHECK(half.eval(5)(0, 0) == doctest::Approx(0.5));
  CHECK(half.eval(5)(2, 2) == doctest::Approx(0.5));

  auto ab = shifted(shifted(s, 0.7), -0.3);
  auto once = shifted(s, 0.4);
  for (long n = -3; n <= 3; ++n) {
    CHECK((ab.eval(n) - once.eval(n)).norm() < 1e-12);
    CHECK((ab.eval_inv(n) - once.eval_inv(n)).norm() < 1e-12);
  }
}

TEST_CASE("empirical_bounds matches hand values") {
  auto id = make_constant(MatrixXd::Identity(2, 2));
  auto b = empirical_bounds(id, 10);
  CHECK(b.norm_a == doctest::Approx(1.0));
  CHECK(b.norm_a_inv == doctest::Approx(1.0));

  auto e = make_constant(diag2(std::exp(1.0), std::exp(-1.0)));
  auto be = empirical_bounds(e, 5);
  CHECK(be.norm_a == doctest::Approx(std::exp(1.0)));
  CHECK(be.norm_a_inv == doctest::Approx(std::exp(1.0)));

  auto p = make_periodic({scalar(2.0), scalar(0.5)});
  auto bp = empirical_bounds(p, 5);
  CHECK(bp.norm_a == doctest::Approx(2.0));
  CHECK(bp.norm_a_inv == doctest::Approx(2.0));
}

TEST_CASE("eval_inv is the inverse of eval for every generator") {
  auto check_inv = [](const CoefficientSequence& s, long lo, long hi) {
    for (long n = lo; n <= hi; ++n) {
      MatrixXd prod = s.eval_inv(n) * s.eval(n);
      CHECK((prod - MatrixXd::Identity(s.dim(), s.dim())).norm() < 1e-10);
    }
  };
  check_inv(make_random_bounded(3, 42, 1.0), -20, 20);
  check_inv(make_periodic({diag2(2, 0.5), diag2(0.25, 3)}), -10, 10);
  Eigen::MatrixXd p(2, 2);
  p << 1, 1, 0, 1;
  check_inv(make_random_block_dichotomous(2, 1, 0.5, 1.5, 7, p), 0, 20);
}

TEST_CASE("sequence files round-trip") {
  std::string path = std::string(DSPEC_TEST_DATA_DIR) + "/roundtrip.json";
  auto s = make_periodic({scalar(2.0), scalar(0.5)});
  save_sequence(s, 0, 2, "periodic", path);
  auto loaded = load_sequence(path);
  CHECK(loaded.dim() == 1);
  for (long n = -6; n <= 6; ++n)
    CHECK(loaded.eval(n)(0, 0) == doctest::Approx(s.eval(n)(0, 0)));
}

TEST_CASE("load_sequence rejects malformed documents") {
  std::string path = std::string(DSPEC_TEST_DATA_DIR) + "/bad.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"dim\": 2, \"domain\": \"two-sided\", \"extension\": \"periodic\","
               "\"matrices\": [[[1, 0], [0]]]}",
               f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_sequence(path), DimensionMismatch);
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("not json", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_sequence(path), ParseError);
  CHECK_THROWS_AS(load_sequence("/nonexistent/nope.json"), IoError);
}
