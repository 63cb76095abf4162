#pragma once

// Blocked squared-projection kernel shared by every sketch path.
//
// Each (row, signal) dot product is accumulated in four interleaved lanes over
// zero-padded vectors and reduced as (l0 + l1) + (l2 + l3). The tile shape only
// decides how many products run side by side, never the arithmetic of a single
// product, so a signal sketched alone or inside a batch of 70 000 gives
// bit-identical components, whatever the worker count.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/parallel.hpp"
#include "ropsketch/signal.hpp"

namespace ropsketch::detail {

using v4d = double __attribute__((vector_size(32)));

inline constexpr std::size_t kLanes = 4;

constexpr std::size_t padded_length(std::size_t n) noexcept { return (n + kLanes - 1) / kLanes * kLanes; }

inline v4d load4(const double* p) noexcept {
  v4d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

/// R rows against S signals; out[r * S + s] = <row_r, signal_s>.
template <std::size_t R, std::size_t S>
inline void dot_tile(const double* const* rows, const double* const* signals, std::size_t stride,
                     double* out) noexcept {
  v4d acc[R][S] = {};
  for (std::size_t k = 0; k < stride; k += kLanes) {
    v4d a[R];
    v4d x[S];
    for (std::size_t r = 0; r < R; ++r) a[r] = load4(rows[r] + k);
    for (std::size_t s = 0; s < S; ++s) x[s] = load4(signals[s] + k);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t s = 0; s < S; ++s) acc[r][s] += a[r] * x[s];
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t s = 0; s < S; ++s) out[r * S + s] = (acc[r][s][0] + acc[r][s][1]) + (acc[r][s][2] + acc[r][s][3]);
  }
}

/// Signals copied into one zero-padded, contiguous buffer.
class SignalBlock {
 public:
  SignalBlock(std::span<const Signal> signals, std::size_t n)
      : count_(signals.size()), stride_(padded_length(n)), data_(count_ * stride_, 0.0) {
    for (std::size_t j = 0; j < count_; ++j) {
      if (signals[j].size() != n) {
        throw DimensionError("signal " + std::to_string(j) + " has length " + std::to_string(signals[j].size()) +
                             ", ensemble expects " + std::to_string(n));
      }
      std::copy(signals[j].values().begin(), signals[j].values().end(), data_.begin() + j * stride_);
    }
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] const double* signal(std::size_t j) const noexcept { return data_.data() + j * stride_; }

 private:
  std::size_t count_;
  std::size_t stride_;
  std::vector<double> data_;
};

/// Rows per generated block, sized to keep a block in L2. Depends on n only.
constexpr std::size_t rows_per_block(std::size_t stride) noexcept {
  constexpr std::size_t kTargetBytes = std::size_t{512} * 1024;
  const std::size_t rows = kTargetBytes / (stride * sizeof(double));
  return std::clamp<std::size_t>(rows / kLanes * kLanes, kLanes, 256);
}

template <std::size_t R>
inline void tile_rows(const double* const* rows, const SignalBlock& block, std::size_t row_offset,
                      std::size_t row_span, double* out) noexcept {
  const std::size_t stride = block.stride();
  double tile[R * 2];
  std::size_t s = 0;
  for (; s + 2 <= block.count(); s += 2) {
    const double* sig[2] = {block.signal(s), block.signal(s + 1)};
    dot_tile<R, 2>(rows, sig, stride, tile);
    for (std::size_t r = 0; r < R; ++r) {
      out[s * row_span + row_offset + r] = tile[r * 2] * tile[r * 2];
      out[(s + 1) * row_span + row_offset + r] = tile[r * 2 + 1] * tile[r * 2 + 1];
    }
  }
  if (s < block.count()) {
    const double* sig[1] = {block.signal(s)};
    dot_tile<R, 1>(rows, sig, stride, tile);
    for (std::size_t r = 0; r < R; ++r) out[s * row_span + row_offset + r] = tile[r] * tile[r];
  }
}

/// Anything that can produce row i of a projection ensemble on demand.
template <class T>
concept RowSource = requires(const T& rows, std::size_t i, std::span<double> out) {
  { rows.dim() } -> std::convertible_to<std::size_t>;
  { rows.row_count() } -> std::convertible_to<std::size_t>;
  { rows.seed() } -> std::convertible_to<std::uint64_t>;
  rows.fill_row(i, out);
};

/// Squared projections (a_i^T x_j)^2 for rows i in [row_begin, row_end) and all
/// signals in the block. Result is signal-major: out[j * (row_end - row_begin) + (i - row_begin)].
template <RowSource Rows>
std::vector<double> squared_projections(const Rows& ensemble, const SignalBlock& block,
                                               std::size_t row_begin, std::size_t row_end, unsigned workers) {
  if (row_end > ensemble.row_count() || row_begin > row_end) {
    throw IndexError("row range [" + std::to_string(row_begin) + ", " + std::to_string(row_end) +
                     ") exceeds ensemble row_count " + std::to_string(ensemble.row_count()));
  }
  const std::size_t row_span = row_end - row_begin;
  std::vector<double> out(block.count() * row_span);
  if (row_span == 0 || block.count() == 0) return out;

  const std::size_t stride = block.stride();
  const std::size_t per_block = rows_per_block(stride);
  const std::size_t n_blocks = (row_span + per_block - 1) / per_block;

  parallel_for(n_blocks, workers, [&](std::size_t b) {
    const std::size_t first = b * per_block;
    const std::size_t count = std::min(per_block, row_span - first);
    std::vector<double> rows(count * stride, 0.0);
    for (std::size_t r = 0; r < count; ++r) {
      ensemble.fill_row(row_begin + first + r, std::span<double>(rows).subspan(r * stride, stride));
    }
    std::size_t r = 0;
    for (; r + 4 <= count; r += 4) {
      const double* p[4] = {&rows[r * stride], &rows[(r + 1) * stride], &rows[(r + 2) * stride],
                            &rows[(r + 3) * stride]};
      tile_rows<4>(p, block, first + r, row_span, out.data());
    }
    for (; r < count; ++r) {
      const double* p[1] = {&rows[r * stride]};
      tile_rows<1>(p, block, first + r, row_span, out.data());
    }
  });
  return out;
}

}  // namespace ropsketch::detail
