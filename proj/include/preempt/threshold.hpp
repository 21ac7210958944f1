#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <optional>
#include <string>

#include "preempt/error.hpp"

namespace preempt {

/// An investment threshold on the state axis: a positive level or +inf
/// ("never"). Infinity is a distinct state of the type, so callers must ask
/// for it explicitly before extracting a finite level.
class Threshold {
 public:
  constexpr Threshold() = default;  // +inf

  static constexpr Threshold infinite() noexcept { return Threshold{}; }

  static Threshold at(double level) {
    if (!std::isfinite(level) || level < 0.0) {
      throw InvalidThreshold("threshold level must be finite and >= 0, got " +
                             std::to_string(level));
    }
    Threshold t;
    t.level_ = level;
    return t;
  }

  /// +inf maps to infinite(); NaN is rejected.
  static Threshold from_double(double level) {
    if (std::isinf(level) && level > 0) return infinite();
    return at(level);
  }

  constexpr bool is_finite() const noexcept { return level_.has_value(); }
  constexpr bool is_infinite() const noexcept { return !level_.has_value(); }

  double value() const {
    if (!level_) throw InvalidThreshold("threshold is +inf");
    return *level_;
  }

  /// IEEE view for arithmetic and comparisons: +inf when infinite.
  constexpr double as_double() const noexcept {
    return level_ ? *level_ : std::numeric_limits<double>::infinity();
  }

  std::string to_string() const {
    if (!level_) return "inf";
    return std::to_string(*level_);
  }

  friend constexpr bool operator==(const Threshold& a, const Threshold& b) noexcept {
    return a.as_double() == b.as_double();
  }
  friend constexpr std::partial_ordering operator<=>(const Threshold& a,
                                                     const Threshold& b) noexcept {
    return a.as_double() <=> b.as_double();
  }
  friend constexpr bool operator==(const Threshold& a, double b) noexcept {
    return a.as_double() == b;
  }
  friend constexpr std::partial_ordering operator<=>(const Threshold& a, double b) noexcept {
    return a.as_double() <=> b;
  }

 private:
  std::optional<double> level_;
};

inline Threshold min(const Threshold& a, const Threshold& b) { return b < a ? b : a; }
inline Threshold max(const Threshold& a, const Threshold& b) { return a < b ? b : a; }

}  // namespace preempt
