#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ropsketch/error.hpp"

namespace ropsketch {

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Dense real vector of length n. Images are stored flattened row-major, with
/// the original shape kept alongside.
class Signal {
 public:
  Signal() = default;

  explicit Signal(std::vector<double> values) : values_(std::move(values)) { check_finite(); }

  Signal(std::vector<double> values, ImageShape shape) : values_(std::move(values)), shape_(shape) {
    if (shape.height * shape.width != values_.size()) {
      throw DimensionError("image shape " + std::to_string(shape.height) + "x" + std::to_string(shape.width) +
                           " does not match " + std::to_string(values_.size()) + " values");
    }
    check_finite();
  }

  static Signal zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const std::optional<ImageShape>& shape() const noexcept { return shape_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] double squared_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
  }
  [[nodiscard]] double norm() const noexcept { return std::sqrt(squared_norm()); }

  [[nodiscard]] Signal scaled(double alpha) const {
    Signal out = *this;
    for (double& v : out.values_) v *= alpha;
    out.check_finite();
    return out;
  }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  void check_finite() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw DataError("signal entry " + std::to_string(i) + " is not finite");
    }
  }

  std::vector<double> values_;
  std::optional<ImageShape> shape_;
};

inline double inner(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("inner product of vectors with different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inner(const Signal& a, const Signal& b) { return inner(a.values(), b.values()); }

/// x / ||x||. Zero-norm input is a data error.
inline Signal normalized(const Signal& x) {
  const double norm = x.norm();
  if (!(norm > 0.0)) throw DataError("cannot normalize a zero-norm signal");
  std::vector<double> v(x.values().begin(), x.values().end());
  for (double& e : v) e /= norm;
  return x.shape() ? Signal(std::move(v), *x.shape()) : Signal(std::move(v));
}

}  // namespace ropsketch
