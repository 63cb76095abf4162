#pragma once

// Quadratic sketches of a signal x in R^n:
//
//   rop(x)_i  = (a_i^T x)^2                               i = 0 .. m_rop-1
//   drop(x)_i = (a_{2i}^T x)^2 - (a_{2i+1}^T x)^2          i = 0 .. m-1
//
// The debiased (DROP) sketch pairs rows zero-based and disjointly, so it consumes
// exactly 2m rows. Its squared norm over 4m is an unbiased estimate of ||x||^4,
// which the plain ROP sketch does not offer.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/kernel.hpp"
#include "ropsketch/signal.hpp"

namespace ropsketch {

/// The operator a sketch came from: ensemble identity plus the rows consumed.
struct SketchFingerprint {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t row_begin = 0;
  std::size_t row_end = 0;

  friend bool operator==(const SketchFingerprint&, const SketchFingerprint&) = default;
};

inline std::string to_string(const SketchFingerprint& fp) {
  return "seed=" + std::to_string(fp.seed) + " n=" + std::to_string(fp.n) + " rows=[" + std::to_string(fp.row_begin) +
         "," + std::to_string(fp.row_end) + ")";
}

/// Sketch ((a_i^T x)^2)_i, or (a_i^T X a_i)_i in lifted form. Components from
/// rop() are squares and hence nonnegative; a general symmetric X may give
/// negative lifted components.
class RopSketch {
 public:
  RopSketch(std::vector<double> values, SketchFingerprint fingerprint)
      : values_(std::move(values)), fingerprint_(fingerprint) {
    if (fingerprint_.row_end - fingerprint_.row_begin != values_.size()) {
      throw DimensionError("ROP sketch length does not match its row range");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw DataError("ROP sketch components must be finite");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const SketchFingerprint& fingerprint() const noexcept { return fingerprint_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const RopSketch&, const RopSketch&) = default;

 private:
  std::vector<double> values_;
  SketchFingerprint fingerprint_;
};

/// Debiased sketch; component i comes from rows 2i and 2i+1 of the fingerprint's range.
class DropSketch {
 public:
  DropSketch(std::vector<double> values, SketchFingerprint fingerprint)
      : values_(std::move(values)), fingerprint_(fingerprint) {
    if (fingerprint_.row_end - fingerprint_.row_begin != 2 * values_.size()) {
      throw DimensionError("DROP sketch length does not match its row range");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw DataError("DROP sketch components must be finite");
    }
  }

  /// Number of pairs m.
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const SketchFingerprint& fingerprint() const noexcept { return fingerprint_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// The sketch that drop(x, m) would produce on the same ensemble. Exact, since
  /// rows are consumed in order.
  [[nodiscard]] DropSketch prefix(std::size_t m) const {
    if (m > values_.size()) throw DimensionError("prefix longer than the sketch");
    if (fingerprint_.row_begin != 0) throw DimensionError("prefix of a sketch that does not start at row 0");
    return DropSketch(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(m)),
                      {fingerprint_.seed, fingerprint_.n, 0, 2 * m});
  }

  friend bool operator==(const DropSketch&, const DropSketch&) = default;

 private:
  std::vector<double> values_;
  SketchFingerprint fingerprint_;
};

namespace detail {

inline void check_dim(std::size_t n, std::span<const Signal> xs) {
  for (const auto& x : xs) {
    if (x.size() != n) {
      throw DimensionError("signal of length " + std::to_string(x.size()) + " does not match ensemble n = " +
                           std::to_string(n));
    }
  }
}

template <RowSource Rows>
std::vector<RopSketch> rop_batch(const Rows& e, std::span<const Signal> xs, std::size_t m_rop,
                                        unsigned workers) {
  check_dim(e.dim(), xs);
  if (m_rop == 0) throw DimensionError("m_rop must be positive");
  if (m_rop > e.row_count()) {
    throw DimensionError("m_rop = " + std::to_string(m_rop) + " exceeds row_count " + std::to_string(e.row_count()));
  }
  const SignalBlock block(xs, e.dim());
  const auto sq = squared_projections(e, block, 0, m_rop, workers);
  std::vector<RopSketch> out;
  out.reserve(xs.size());
  const SketchFingerprint fp{e.seed(), e.dim(), 0, m_rop};
  for (std::size_t j = 0; j < xs.size(); ++j) {
    out.emplace_back(std::vector<double>(sq.begin() + static_cast<std::ptrdiff_t>(j * m_rop),
                                         sq.begin() + static_cast<std::ptrdiff_t>((j + 1) * m_rop)),
                     fp);
  }
  return out;
}

template <RowSource Rows>
std::vector<DropSketch> drop_batch(const Rows& e, std::span<const Signal> xs, std::size_t m,
                                          unsigned workers) {
  check_dim(e.dim(), xs);
  if (m == 0) throw DimensionError("m must be positive");
  if (2 * m > e.row_count()) {
    throw DimensionError("DROP with m = " + std::to_string(m) + " needs " + std::to_string(2 * m) +
                         " rows, ensemble has " + std::to_string(e.row_count()));
  }
  const SignalBlock block(xs, e.dim());
  const std::size_t rows = 2 * m;
  const auto sq = squared_projections(e, block, 0, rows, workers);
  std::vector<DropSketch> out;
  out.reserve(xs.size());
  const SketchFingerprint fp{e.seed(), e.dim(), 0, rows};
  for (std::size_t j = 0; j < xs.size(); ++j) {
    std::vector<double> v(m);
    const double* r = sq.data() + j * rows;
    for (std::size_t i = 0; i < m; ++i) v[i] = r[2 * i] - r[2 * i + 1];
    out.emplace_back(std::move(v), fp);
  }
  return out;
}

}  // namespace detail

inline RopSketch rop(const SketchOracle& oracle, const Signal& x, std::size_t m_rop, unsigned workers = 1) {
  return std::move(detail::rop_batch(detail::ensemble_of(oracle), std::span(&x, 1), m_rop, workers).front());
}

inline std::vector<RopSketch> rop(const SketchOracle& oracle, std::span<const Signal> xs, std::size_t m_rop,
                                  unsigned workers = 1) {
  return detail::rop_batch(detail::ensemble_of(oracle), xs, m_rop, workers);
}

inline DropSketch drop(const SketchOracle& oracle, const Signal& x, std::size_t m, unsigned workers = 1) {
  return std::move(detail::drop_batch(detail::ensemble_of(oracle), std::span(&x, 1), m, workers).front());
}

/// Sketches a batch in one pass over the rows. Component values are identical to
/// sketching each signal on its own.
inline std::vector<DropSketch> drop(const SketchOracle& oracle, std::span<const Signal> xs, std::size_t m,
                                    unsigned workers = 1) {
  return detail::drop_batch(detail::ensemble_of(oracle), xs, m, workers);
}

/// Row-access overloads (same computation, for callers that own the rows, or
/// test doubles with hand-set rows).
template <detail::RowSource Rows>
RopSketch rop(const Rows& ensemble, const Signal& x, std::size_t m_rop) {
  return std::move(detail::rop_batch(ensemble, std::span(&x, 1), m_rop, 1).front());
}

template <detail::RowSource Rows>
DropSketch drop(const Rows& ensemble, const Signal& x, std::size_t m) {
  return std::move(detail::drop_batch(ensemble, std::span(&x, 1), m, 1).front());
}

/// Dense row-major n x n matrix, only used to state the lifted form of the sketch.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * n + c]; }

  static SquareMatrix outer(const Signal& x) {
    SquareMatrix m{x.size(), std::vector<double>(x.size() * x.size())};
    for (std::size_t r = 0; r < m.n; ++r) {
      for (std::size_t c = 0; c < m.n; ++c) m.data[r * m.n + c] = x[r] * x[c];
    }
    return m;
  }

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) m.data[i * n + i] = 1.0;
    return m;
  }
};

/// Rank-one projections <a_i a_i^T, X> = a_i^T X a_i of a symmetric matrix.
/// Needs row access, so it takes the ensemble itself rather than an oracle.
template <detail::RowSource Rows>
RopSketch lifted_rop(const Rows& ensemble, const SquareMatrix& X, std::size_t m_rop) {
  const std::size_t n = ensemble.dim();
  if (X.data.size() != X.n * X.n) throw DimensionError("matrix storage is not square");
  if (X.n != n) throw DimensionError("matrix dimension does not match ensemble n");
  if (m_rop == 0 || m_rop > ensemble.row_count()) throw DimensionError("m_rop out of range");
  double scale = 0.0;
  for (double v : X.data) scale = std::max(scale, std::abs(v));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      if (std::abs(X(r, c) - X(c, r)) > 1e-10 * scale) throw DimensionError("matrix is not symmetric");
    }
  }

  std::vector<double> values(m_rop);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < m_rop; ++i) {
    ensemble.fill_row(i, a);
    double q = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double xr = 0.0;
      for (std::size_t c = 0; c < n; ++c) xr += X(r, c) * a[c];
      q += a[r] * xr;
    }
    values[i] = q;
  }
  return RopSketch(std::move(values), {ensemble.seed(), n, 0, m_rop});
}

/// ||s||^2 / (4m): unbiased estimate of ||x||^4 from s = drop(x).
inline double drop_energy(const DropSketch& s) {
  if (s.size() == 0) throw DimensionError("empty DROP sketch");
  double sum = 0.0;
  for (double v : s.values()) sum += v * v;
  return sum / (4.0 * static_cast<double>(s.size()));
}

}  // namespace ropsketch
