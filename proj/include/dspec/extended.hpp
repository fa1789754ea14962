#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "dspec/errors.hpp"

namespace dspec {

/// Extended real value: finite double or an explicit +/- infinity sentinel.
/// Interval logic never feeds the sentinels into tolerance arithmetic; callers
/// must branch on finiteness first (value() throws on a sentinel).
class ExtReal {
 public:
  ExtReal() : kind_(0), v_(0.0) {}

  static ExtReal finite(double v) {
    ExtReal x;
    x.kind_ = 0;
    x.v_ = v;
    return x;
  }
  static ExtReal neg_inf() {
    ExtReal x;
    x.kind_ = -1;
    return x;
  }
  static ExtReal pos_inf() {
    ExtReal x;
    x.kind_ = 1;
    return x;
  }

  bool is_finite() const { return kind_ == 0; }
  bool is_neg_inf() const { return kind_ < 0; }
  bool is_pos_inf() const { return kind_ > 0; }

  double value() const {
    if (kind_ != 0) throw Error("ExtReal: value() on an infinite sentinel");
    return v_;
  }

  /// Finite stand-in for interval truncation: sentinels clamp to the bound.
  double truncated(double lo, double hi) const {
    if (kind_ < 0) return lo;
    if (kind_ > 0) return hi;
    return v_;
  }

  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    if (a.kind_ != 0) return false;
    return a.v_ < b.v_;
  }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return !(b < a); }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return !(a < b); }
  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    return a.kind_ == b.kind_ && (a.kind_ != 0 || a.v_ == b.v_);
  }

  std::string str() const {
    if (kind_ < 0) return "-inf";
    if (kind_ > 0) return "+inf";
    return std::to_string(v_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
    return os << x.str();
  }

 private:
  int kind_;  // -1, 0, +1
  double v_;
};

}  // namespace dspec
