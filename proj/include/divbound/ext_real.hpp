#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace divbound {

// Extended real value with explicit infinity tags.
//
// Arithmetic follows the conventions of convex analysis over the extended
// reals: (+inf) + (-inf) = +inf and 0 * (+-inf) = 0. No operation produces
// NaN; NaN inputs are rejected at construction.
class ExtReal {
 public:
  constexpr ExtReal() : tag_(Tag::Finite), v_(0.0) {}

  // Implicit from double; IEEE infinities map to the tagged infinities.
  ExtReal(double x) {  // NOLINT(google-explicit-constructor)
    assert(!std::isnan(x) && "ExtReal cannot hold NaN");
    if (x == std::numeric_limits<double>::infinity()) {
      tag_ = Tag::PosInf;
      v_ = 0.0;
    } else if (x == -std::numeric_limits<double>::infinity()) {
      tag_ = Tag::NegInf;
      v_ = 0.0;
    } else {
      tag_ = Tag::Finite;
      v_ = x;
    }
  }

  static constexpr ExtReal pos_inf() { return ExtReal(Tag::PosInf); }
  static constexpr ExtReal neg_inf() { return ExtReal(Tag::NegInf); }

  constexpr bool is_finite() const { return tag_ == Tag::Finite; }
  constexpr bool is_pos_inf() const { return tag_ == Tag::PosInf; }
  constexpr bool is_neg_inf() const { return tag_ == Tag::NegInf; }

  // Finite payload; only meaningful when is_finite().
  constexpr double value() const {
    assert(is_finite());
    return v_;
  }

  // IEEE representation, infinities included. Handy for printing and interop.
  constexpr double as_double() const {
    switch (tag_) {
      case Tag::PosInf: return std::numeric_limits<double>::infinity();
      case Tag::NegInf: return -std::numeric_limits<double>::infinity();
      default: return v_;
    }
  }

  friend ExtReal operator-(ExtReal a) {
    if (a.is_pos_inf()) return neg_inf();
    if (a.is_neg_inf()) return pos_inf();
    return ExtReal(-a.v_);
  }

  // (+inf) + (-inf) = +inf.
  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_pos_inf() || b.is_pos_inf()) return pos_inf();
    if (a.is_neg_inf() || b.is_neg_inf()) return neg_inf();
    return ExtReal(a.v_ + b.v_);
  }

  friend ExtReal operator-(ExtReal a, ExtReal b) { return a + (-b); }

  // 0 * (+-inf) = 0.
  friend ExtReal operator*(ExtReal a, ExtReal b) {
    if (a.is_finite() && a.v_ == 0.0) return ExtReal(0.0);
    if (b.is_finite() && b.v_ == 0.0) return ExtReal(0.0);
    if (!a.is_finite() || !b.is_finite()) {
      const bool a_neg = a.is_neg_inf() || (a.is_finite() && a.v_ < 0.0);
      const bool b_neg = b.is_neg_inf() || (b.is_finite() && b.v_ < 0.0);
      return (a_neg == b_neg) ? pos_inf() : neg_inf();
    }
    return ExtReal(a.v_ * b.v_);
  }

  ExtReal& operator+=(ExtReal b) { return *this = *this + b; }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    return a.tag_ == b.tag_ && (a.tag_ != Tag::Finite || a.v_ == b.v_);
  }
  friend constexpr bool operator!=(ExtReal a, ExtReal b) { return !(a == b); }
  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (a.tag_ == b.tag_) return a.tag_ == Tag::Finite && a.v_ < b.v_;
    return rank(a.tag_) < rank(b.tag_);
  }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return !(b < a); }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return !(a < b); }

  friend std::ostream& operator<<(std::ostream& os, ExtReal a) {
    if (a.is_pos_inf()) return os << "inf";
    if (a.is_neg_inf()) return os << "-inf";
    return os << a.v_;
  }

 private:
  enum class Tag { NegInf, Finite, PosInf };

  explicit constexpr ExtReal(Tag t) : tag_(t), v_(0.0) {}

  static constexpr int rank(Tag t) {
    return t == Tag::NegInf ? 0 : (t == Tag::Finite ? 1 : 2);
  }

  Tag tag_;
  double v_;
};

inline ExtReal min(ExtReal a, ExtReal b) { return a < b ? a : b; }
inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

}  // namespace divbound
