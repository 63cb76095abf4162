#pragma once

// Sign-product-embedding estimation in the DROP domain.
//
// For a unit pattern u and a signal x sketched by the same operator,
//
//   (kappa / m) * <sign(drop(u)), drop(x)>,   kappa = pi / 4,
//
// has expectation <u, x>^2 and concentrates around it at rate m^{-1/2}. Only the
// one-bit pattern sign(drop(u)) is needed, never u itself.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ropsketch/error.hpp"
#include "ropsketch/sketch.hpp"

namespace ropsketch {

/// E|a - b||a + b| = 4/pi for independent standard normals a, b; kappa undoes it.
inline constexpr double kSpeKappa = std::numbers::pi / 4.0;

class SignPattern {
 public:
  SignPattern(std::vector<std::int8_t> signs, SketchFingerprint fingerprint, std::optional<std::string> label = {})
      : signs_(std::move(signs)), fingerprint_(fingerprint), label_(std::move(label)) {
    if (fingerprint_.row_end - fingerprint_.row_begin != 2 * signs_.size()) {
      throw DimensionError("sign pattern length does not match its row range");
    }
    for (auto s : signs_) {
      if (s != 1 && s != -1) throw DataError("sign pattern components must be -1 or +1");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return signs_.size(); }
  [[nodiscard]] std::span<const std::int8_t> signs() const noexcept { return signs_; }
  [[nodiscard]] const SketchFingerprint& fingerprint() const noexcept { return fingerprint_; }
  [[nodiscard]] const std::optional<std::string>& label() const noexcept { return label_; }
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return signs_[i]; }

  friend bool operator==(const SignPattern&, const SignPattern&) = default;

 private:
  std::vector<std::int8_t> signs_;
  SketchFingerprint fingerprint_;
  std::optional<std::string> label_;
};

/// Componentwise sign with sign(0) = +1.
inline SignPattern sign_pattern(const DropSketch& s, std::optional<std::string> label = {}) {
  std::vector<std::int8_t> signs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) signs[i] = s[i] < 0.0 ? std::int8_t{-1} : std::int8_t{1};
  return SignPattern(std::move(signs), s.fingerprint(), std::move(label));
}

namespace detail {
inline void check_compatible(const SketchFingerprint& a, const SketchFingerprint& b, std::size_t len_a,
                             std::size_t len_b) {
  if (len_a != len_b) {
    throw DimensionError("length mismatch: " + std::to_string(len_a) + " vs " + std::to_string(len_b));
  }
  if (!(a == b)) throw FingerprintError("sketches come from different operators: " + to_string(a) + " vs " + to_string(b));
}
}  // namespace detail

/// (1/m) <p, s>, without the kappa correction.
inline double sign_correlation(const SignPattern& p, const DropSketch& s) {
  detail::check_compatible(p.fingerprint(), s.fingerprint(), p.size(), s.size());
  if (s.size() == 0) throw DimensionError("empty sketch");
  double acc = 0.0;
  const auto signs = p.signs();
  const auto values = s.values();
  for (std::size_t i = 0; i < values.size(); ++i) acc += signs[i] < 0 ? -values[i] : values[i];
  return acc / static_cast<double>(values.size());
}

/// Estimate of <u, x>^2 from p = sign(drop(u)) and s = drop(x). Returned raw:
/// it may be negative or exceed ||x||^2.
inline double spe_estimate(const SignPattern& p, const DropSketch& s) { return kSpeKappa * sign_correlation(p, s); }

/// <c, s> for two sketches of the same operator (unsigned DROP-domain similarity).
inline double sketch_inner(const DropSketch& c, const DropSketch& s) {
  detail::check_compatible(c.fingerprint(), s.fingerprint(), c.size(), s.size());
  return inner(c.values(), s.values());
}

/// S labelled patterns sharing one operator.
class PatternBank {
 public:
  PatternBank() = default;

  explicit PatternBank(std::vector<SignPattern> patterns) {
    for (auto& p : patterns) add(std::move(p));
  }

  void add(SignPattern p) {
    if (!patterns_.empty()) {
      detail::check_compatible(patterns_.front().fingerprint(), p.fingerprint(), patterns_.front().size(), p.size());
    }
    if (p.label()) {
      for (const auto& q : patterns_) {
        if (q.label() == p.label()) throw DataError("duplicate pattern label '" + *p.label() + "'");
      }
    }
    patterns_.push_back(std::move(p));
  }

  [[nodiscard]] std::size_t size() const noexcept { return patterns_.size(); }
  [[nodiscard]] bool empty() const noexcept { return patterns_.empty(); }
  [[nodiscard]] const SignPattern& operator[](std::size_t i) const noexcept { return patterns_[i]; }
  [[nodiscard]] std::span<const SignPattern> patterns() const noexcept { return patterns_; }

  [[nodiscard]] std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(patterns_.size());
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      out.push_back(patterns_[i].label().value_or(std::to_string(i)));
    }
    return out;
  }

 private:
  std::vector<SignPattern> patterns_;
};

/// spe_estimate against every pattern, in bank order.
inline std::vector<double> bank_estimates(const PatternBank& bank, const DropSketch& s) {
  std::vector<double> out;
  out.reserve(bank.size());
  for (const auto& p : bank.patterns()) out.push_back(spe_estimate(p, s));
  return out;
}

/// Index of the largest estimate; ties go to the lowest index.
inline std::size_t argmax_index(std::span<const double> estimates) {
  if (estimates.empty()) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (estimates[i] > estimates[best]) best = i;
  }
  return best;
}

template <class Label>
Label argmax_label(std::span<const double> estimates, std::span<const Label> labels) {
  if (estimates.size() != labels.size()) throw DimensionError("estimates and labels differ in length");
  return labels[argmax_index(estimates)];
}

template <class Label>
Label argmax_label(const std::vector<double>& estimates, const std::vector<Label>& labels) {
  return argmax_label(std::span<const double>(estimates), std::span<const Label>(labels));
}

}  // namespace ropsketch
