#pragma once

// Empirical SPE distortion: for unit x and a unit u orthogonal to x the true
// value <u, x>^2 is zero, so |spe_estimate| over random trials measures delta(m).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/parallel.hpp"
#include "ropsketch/philox.hpp"
#include "ropsketch/sketch.hpp"
#include "ropsketch/spe.hpp"

namespace ropsketch::experiments {

struct DeltaPoint {
  std::size_t m = 0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
  std::size_t trials = 0;
};

struct DeltaCurve {
  std::size_t n = 0;
  std::vector<DeltaPoint> points;
};

/// Uniform point on the unit sphere.
inline Signal random_unit_vector(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  NormalStream(seed).fill(0, v);
  return normalized(Signal(std::move(v)));
}

/// Unit vector uniform on the great sphere orthogonal to x (Gram-Schmidt of a fresh draw).
inline Signal random_orthogonal_unit_vector(const Signal& x, std::uint64_t seed) {
  std::vector<double> v(x.size());
  NormalStream(seed).fill(0, v);
  const double xx = x.squared_norm();
  const double proj = inner(std::span<const double>(v), x.values()) / xx;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * x[i];
  return normalized(Signal(std::move(v)));
}

/// Seeds used by trial t: signal, orthogonal pattern, ensemble.
struct TrialSeeds {
  std::uint64_t signal;
  std::uint64_t pattern;
  std::uint64_t ensemble;
};

inline TrialSeeds delta_trial_seeds(std::uint64_t seed, std::size_t trial) {
  return {mix_seed(seed, 3 * trial), mix_seed(seed, 3 * trial + 1), mix_seed(seed, 3 * trial + 2)};
}

/// |spe_estimate(sign(drop(u)), drop(x))| for every m in the grid, one trial.
/// All grid points use nested prefixes of one fresh ensemble with 2 * max(m) rows.
inline std::vector<double> delta_trial(std::size_t n, const std::vector<std::size_t>& m_grid, std::uint64_t seed,
                                       std::size_t trial) {
  const auto seeds = delta_trial_seeds(seed, trial);
  const Signal x = random_unit_vector(n, seeds.signal);
  const Signal u = random_orthogonal_unit_vector(x, seeds.pattern);
  const std::size_t m_max = m_grid.back();
  const auto oracle = as_oracle(GaussianEnsemble(seeds.ensemble, n, 2 * m_max));
  const std::vector<Signal> pair{x, u};
  const auto sketches = drop(oracle, pair, m_max);
  std::vector<double> out;
  out.reserve(m_grid.size());
  for (std::size_t m : m_grid) {
    const auto bx = sketches[0].prefix(m);
    const auto pu = sign_pattern(sketches[1].prefix(m));
    out.push_back(std::abs(spe_estimate(pu, bx)));
  }
  return out;
}

inline void validate_grid(const std::vector<std::size_t>& m_grid) {
  if (m_grid.empty()) throw ConfigError("m grid is empty");
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] == 0) throw ConfigError("m values must be positive");
    if (i > 0 && m_grid[i] <= m_grid[i - 1]) throw ConfigError("m grid must be strictly increasing");
  }
}

inline DeltaCurve estimate_delta(std::size_t n, const std::vector<std::size_t>& m_grid, std::size_t trials,
                                 std::uint64_t seed, unsigned workers = 1) {
  if (trials == 0) throw ConfigError("trials must be at least 1");
  if (n < 2) throw ConfigError("n must be at least 2 to draw an orthogonal pair");
  validate_grid(m_grid);

  std::vector<std::vector<double>> per_trial(trials);
  parallel_for(trials, workers, [&](std::size_t t) { per_trial[t] = delta_trial(n, m_grid, seed, t); });

  DeltaCurve curve{n, {}};
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    DeltaPoint p{m_grid[g], 0.0, 0.0, trials};
    for (std::size_t t = 0; t < trials; ++t) {
      p.mean_abs += per_trial[t][g];
      p.max_abs = std::max(p.max_abs, per_trial[t][g]);
    }
    p.mean_abs /= static_cast<double>(trials);
    curve.points.push_back(p);
  }
  return curve;
}

/// Least-squares slope of log(mean_abs) against log(m).
inline double loglog_slope(const DeltaCurve& curve) {
  const auto k = static_cast<double>(curve.points.size());
  if (curve.points.size() < 2) throw ConfigError("slope needs at least two grid points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : curve.points) {
    const double lx = std::log(static_cast<double>(p.m));
    const double ly = std::log(p.mean_abs);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

/// Parses "start:stop:logK" (K log-spaced values, rounded, deduplicated) or a
/// comma-separated list "100,200,400".
inline std::vector<std::size_t> parse_m_grid(const std::string& spec) {
  std::vector<std::size_t> grid;
  auto to_size = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad m grid value '" + s + "' in '" + spec + "'");
    }
    if (pos != s.size() || v == 0) throw ConfigError("bad m grid value '" + s + "' in '" + spec + "'");
    return static_cast<std::size_t>(v);
  };

  if (spec.find(':') != std::string::npos) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("m grid '" + spec + "' must be start:stop:logK");
    const std::size_t start = to_size(spec.substr(0, a));
    const std::size_t stop = to_size(spec.substr(a + 1, b - a - 1));
    const std::string tail = spec.substr(b + 1);
    if (tail.rfind("log", 0) != 0) throw ConfigError("m grid '" + spec + "' must be start:stop:logK");
    const std::size_t count = to_size(tail.substr(3));
    if (stop <= start || count < 2) throw ConfigError("m grid '" + spec + "' needs stop > start and K >= 2");
    const double l0 = std::log(static_cast<double>(start));
    const double l1 = std::log(static_cast<double>(stop));
    for (std::size_t i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      const auto m = static_cast<std::size_t>(std::llround(std::exp(l0 + t * (l1 - l0))));
      if (grid.empty() || m > grid.back()) grid.push_back(m);
    }
    grid.front() = start;
    grid.back() = stop;
  } else {
    std::size_t begin = 0;
    while (begin <= spec.size()) {
      const auto end = std::min(spec.find(',', begin), spec.size());
      grid.push_back(to_size(spec.substr(begin, end - begin)));
      begin = end + 1;
    }
  }
  validate_grid(grid);
  return grid;
}

}  // namespace ropsketch::experiments
