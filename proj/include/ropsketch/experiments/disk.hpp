#pragma once

// Rotating-disk sequence and quadrant occupancy estimated from DROP sketches.
//
// Frame t shows a filled disk centred at the image centre plus
// orbit_radius * (cos theta_t, sin theta_t), theta_t = 2 pi t / frames, with x
// along columns and y along rows. Pixel (r, c) is lit when its centre
// (c + 0.5, r + 0.5) lies within disk_radius of the disk centre.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/sketch.hpp"
#include "ropsketch/spe.hpp"

namespace ropsketch::experiments {

struct DiskGeometry {
  std::size_t height = 128;
  std::size_t width = 128;
  double orbit_radius = 32.0;
  double disk_radius = 15.0;
  std::size_t frames = 24;
};

struct DiskSequence {
  DiskGeometry geometry;
  double intensity = 1.0;
  std::vector<Signal> frames;
};

inline void validate(const DiskGeometry& g) {
  if (g.height == 0 || g.width == 0) throw ConfigError("image dimensions must be positive");
  if (g.frames == 0) throw ConfigError("frame count must be positive");
  if (!(g.disk_radius > 0.0) || !(g.orbit_radius >= 0.0)) throw ConfigError("radii must be positive");
  const double half = 0.5 * static_cast<double>(std::min(g.height, g.width));
  if (g.orbit_radius + g.disk_radius > half) {
    throw ConfigError("disk leaves the frame: orbit " + std::to_string(g.orbit_radius) + " + radius " +
                      std::to_string(g.disk_radius) + " > " + std::to_string(half));
  }
}

inline std::vector<double> disk_mask(const DiskGeometry& g, std::size_t t) {
  const double theta = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(g.frames);
  const double cx = 0.5 * static_cast<double>(g.width) + g.orbit_radius * std::cos(theta);
  const double cy = 0.5 * static_cast<double>(g.height) + g.orbit_radius * std::sin(theta);
  const double r2 = g.disk_radius * g.disk_radius;
  std::vector<double> mask(g.height * g.width, 0.0);
  for (std::size_t r = 0; r < g.height; ++r) {
    const double dy = static_cast<double>(r) + 0.5 - cy;
    for (std::size_t c = 0; c < g.width; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - cx;
      if (dx * dx + dy * dy <= r2) mask[r * g.width + c] = 1.0;
    }
  }
  return mask;
}

/// With `unit_intensity`, the intensity is 1/sqrt(lit pixels of frame 0), which
/// makes ||x_0|| = 1 and every other frame unit norm up to rasterization.
/// Otherwise lit pixels are 1.
inline DiskSequence generate_disk_sequence(const DiskGeometry& g, bool unit_intensity = true) {
  validate(g);
  DiskSequence seq{g, 1.0, {}};
  std::vector<std::vector<double>> masks;
  masks.reserve(g.frames);
  for (std::size_t t = 0; t < g.frames; ++t) masks.push_back(disk_mask(g, t));
  if (unit_intensity) {
    double lit = 0.0;
    for (double v : masks.front()) lit += v;
    if (lit == 0.0) throw ConfigError("disk covers no pixel centre");
    seq.intensity = 1.0 / std::sqrt(lit);
  }
  for (auto& m : masks) {
    for (double& v : m) v *= seq.intensity;
    seq.frames.emplace_back(std::move(m), ImageShape{g.height, g.width});
  }
  return seq;
}

/// Indicator patterns of the four quadrants, unit norm. Order: top-left,
/// top-right, bottom-left, bottom-right (rows grow downwards).
inline std::array<Signal, 4> quadrant_patterns(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0 || height % 2 != 0 || width % 2 != 0) {
    throw ConfigError("quadrant patterns need even, positive image dimensions");
  }
  const double value = 2.0 / std::sqrt(static_cast<double>(height * width));
  std::array<Signal, 4> out;
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<double> v(height * width, 0.0);
    const std::size_t r0 = (j / 2) * (height / 2);
    const std::size_t c0 = (j % 2) * (width / 2);
    for (std::size_t r = r0; r < r0 + height / 2; ++r) {
      for (std::size_t c = c0; c < c0 + width / 2; ++c) v[r * width + c] = value;
    }
    out[j] = Signal(std::move(v), ImageShape{height, width});
  }
  return out;
}

struct OccupancyTrace {
  std::size_t m = 0;
  std::array<std::vector<double>, 4> q_true;
  std::array<std::vector<double>, 4> q_est;

  [[nodiscard]] std::size_t frames() const noexcept { return q_true[0].size(); }
};

/// One shared ensemble sketches the four patterns and every frame; q_est is the
/// SPE estimate against each quadrant pattern, q_true = <u_j, x_t>^2 exactly.
inline OccupancyTrace run_disk_experiment(const DiskSequence& seq, std::size_t m, std::uint64_t seed,
                                          unsigned workers = 1) {
  if (m == 0) throw ConfigError("m must be positive");
  const auto& g = seq.geometry;
  const auto patterns = quadrant_patterns(g.height, g.width);
  const std::size_t n = g.height * g.width;
  const auto oracle = as_oracle(GaussianEnsemble(seed, n, 2 * m));

  std::vector<Signal> batch(patterns.begin(), patterns.end());
  batch.insert(batch.end(), seq.frames.begin(), seq.frames.end());
  const auto sketches = drop(oracle, batch, m, workers);

  PatternBank bank;
  for (std::size_t j = 0; j < 4; ++j) bank.add(sign_pattern(sketches[j], "q" + std::to_string(j)));

  OccupancyTrace trace;
  trace.m = m;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const auto est = bank_estimates(bank, sketches[4 + t]);
    for (std::size_t j = 0; j < 4; ++j) {
      const double p = inner(patterns[j], seq.frames[t]);
      trace.q_true[j].push_back(p * p);
      trace.q_est[j].push_back(est[j]);
    }
  }
  return trace;
}

/// Fraction of frames where the quadrant maximizing q_est also maximizes q_true.
/// Frames where the disk straddles a boundary symmetrically have tied q_true
/// maxima (relative tolerance 1e-12); any of the tied quadrants counts as a match.
inline double argmax_agreement(const OccupancyTrace& trace) {
  const std::size_t frames = trace.frames();
  if (frames == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    std::array<double, 4> est{};
    double best_true = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      est[j] = trace.q_est[j][t];
      best_true = std::max(best_true, trace.q_true[j][t]);
    }
    const std::size_t j_est = argmax_index(est);
    if (trace.q_true[j_est][t] >= best_true * (1.0 - 1e-12)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(frames);
}

inline double occupancy_rmse(const OccupancyTrace& trace) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t t = 0; t < trace.frames(); ++t) {
      const double d = trace.q_est[j][t] - trace.q_true[j][t];
      sum += d * d;
      ++count;
    }
  }
  return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

}  // namespace ropsketch::experiments
