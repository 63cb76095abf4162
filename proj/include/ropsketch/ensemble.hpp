#pragma once

// Seeded Gaussian projection ensemble a_0, a_1, ... in R^n.
//
// Entry j of row i is draw i*n + j of the Philox-backed NormalStream for the
// ensemble seed, so rows are disjoint slices of one stream and each row can be
// generated on its own. Nothing is ever stored: at n = 16384 with 16384 rows the
// full matrix would be 2 GiB.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ropsketch/error.hpp"
#include "ropsketch/philox.hpp"
#include "ropsketch/signal.hpp"

namespace ropsketch {

/// Identity of an ensemble: two ensembles with equal fingerprints have equal rows.
struct EnsembleFingerprint {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t row_count = 0;

  friend bool operator==(const EnsembleFingerprint&, const EnsembleFingerprint&) = default;
};

class GaussianEnsemble {
 public:
  GaussianEnsemble(std::uint64_t seed, std::size_t n, std::size_t row_count)
      : seed_(seed), n_(n), row_count_(row_count), stream_(seed) {
    if (n == 0) throw DimensionError("ensemble dimension n must be positive");
    if (row_count == 0) throw DimensionError("ensemble row_count must be positive");
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t dim() const noexcept { return n_; }
  [[nodiscard]] std::size_t row_count() const noexcept { return row_count_; }
  [[nodiscard]] EnsembleFingerprint fingerprint() const noexcept { return {seed_, n_, row_count_}; }

  /// Writes row i into out[0..n). `out` may be longer; the tail is left untouched.
  void fill_row(std::size_t i, std::span<double> out) const {
    check_index(i);
    if (out.size() < n_) throw DimensionError("row buffer shorter than ensemble dimension");
    stream_.fill(static_cast<std::uint64_t>(i) * n_, out.first(n_));
  }

  [[nodiscard]] Signal row(std::size_t i) const {
    std::vector<double> values(n_);
    fill_row(i, values);
    return Signal(std::move(values));
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= row_count_) {
      throw IndexError("row index " + std::to_string(i) + " out of range (row_count " + std::to_string(row_count_) +
                       ")");
    }
  }

  std::uint64_t seed_;
  std::size_t n_;
  std::size_t row_count_;
  NormalStream stream_;
};

class SketchOracle;
namespace detail {
const GaussianEnsemble& ensemble_of(const SketchOracle& oracle) noexcept;
}

/// Apply-only view of an ensemble, standing in for an optical processing unit
/// whose projection vectors are fixed but not readable. It can only be handed to
/// the sketch functions (rop, drop); it has no row accessor.
class SketchOracle {
 public:
  explicit SketchOracle(GaussianEnsemble ensemble) : ensemble_(std::move(ensemble)) {}

  [[nodiscard]] EnsembleFingerprint fingerprint() const noexcept { return ensemble_.fingerprint(); }
  [[nodiscard]] std::size_t dim() const noexcept { return ensemble_.dim(); }
  [[nodiscard]] std::size_t row_count() const noexcept { return ensemble_.row_count(); }

 private:
  friend const GaussianEnsemble& detail::ensemble_of(const SketchOracle& oracle) noexcept;

  GaussianEnsemble ensemble_;
};

namespace detail {
inline const GaussianEnsemble& ensemble_of(const SketchOracle& oracle) noexcept { return oracle.ensemble_; }
}  // namespace detail

inline SketchOracle as_oracle(GaussianEnsemble ensemble) { return SketchOracle(std::move(ensemble)); }

}  // namespace ropsketch
