#pragma once

// Nearest-centroid digit classification in the pixel domain and in the DROP
// sketch domain.
//
//   direct     argmax_j <u_j, x>^2                        u_j = c_j / ||c_j||
//   sk         argmax_j (kappa/m) <sign(drop(u_j)), drop(x)>
//   drop       argmax_j <c^B_j, drop(x)>                  c^B_j = class mean of drop(x_k)
//   drop-sign  argmax_j <sign(c^B_j), drop(x)>
//
// c^B_j averages sketches of the training images either at their pixel
// intensity (pixels / 255, the default) or after unit normalization.
//
// Each trial redraws both the train/test split and the ensemble.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/io/idx.hpp"
#include "ropsketch/philox.hpp"
#include "ropsketch/sketch.hpp"
#include "ropsketch/spe.hpp"

namespace ropsketch::experiments {

inline constexpr std::size_t kClasses = 10;

enum class Pipeline { kDirect, kSketched, kDropCentroid, kDropSignCentroid };

inline std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kDirect:
      return "direct";
    case Pipeline::kSketched:
      return "sk";
    case Pipeline::kDropCentroid:
      return "drop";
    case Pipeline::kDropSignCentroid:
      return "drop-sign";
  }
  return "?";
}

inline Pipeline parse_pipeline(const std::string& name) {
  for (auto p : {Pipeline::kDirect, Pipeline::kSketched, Pipeline::kDropCentroid, Pipeline::kDropSignCentroid}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown pipeline '" + name + "' (expected direct, sk, drop or drop-sign)");
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Fisher-Yates shuffle of [0, total) with SplitMix64; first train_size indices train,
/// next test_size test.
inline Split random_split(std::size_t total, std::size_t train_size, std::size_t test_size, std::uint64_t seed) {
  if (train_size + test_size > total) {
    throw ConfigError("split " + std::to_string(train_size) + "/" + std::to_string(test_size) + " exceeds " +
                      std::to_string(total) + " samples");
  }
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = total; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_size));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_size),
                idx.begin() + static_cast<std::ptrdiff_t>(train_size + test_size));
  return s;
}

/// Unit-norm class directions u_j = c_j / ||c_j||, c_j the mean of class j.
inline std::vector<Signal> compute_pixel_centroids(const io::LabelledDataset& data, std::span<const std::size_t> train,
                                                   std::size_t classes = kClasses) {
  if (data.size() == 0) throw DataError("empty dataset");
  const std::size_t n = data.signals.front().size();
  std::vector<std::vector<double>> sums(classes, std::vector<double>(n, 0.0));
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t k : train) {
    const auto label = static_cast<std::size_t>(data.labels[k]);
    if (label >= classes) throw DataError("label " + std::to_string(label) + " out of range");
    const auto x = data.signals[k].values();
    for (std::size_t i = 0; i < n; ++i) sums[label][i] += x[i];
    ++counts[label];
  }
  std::vector<Signal> out;
  out.reserve(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    if (counts[j] == 0) throw DataError("class " + std::to_string(j) + " has no training sample");
    for (double& v : sums[j]) v /= static_cast<double>(counts[j]);
    out.push_back(normalized(Signal(std::move(sums[j]))));
  }
  return out;
}

/// Rows sketched per batch when streaming a large dataset through the oracle.
inline constexpr std::size_t kSketchChunk = 4096;

/// Sketches data.signals[indices] in chunks, calling sink(position, sketch) in order.
template <class Sink>
void sketch_indices(const SketchOracle& oracle, const io::LabelledDataset& data, std::span<const std::size_t> indices,
                    std::size_t m, unsigned workers, Sink&& sink) {
  for (std::size_t begin = 0; begin < indices.size(); begin += kSketchChunk) {
    const std::size_t end = std::min(indices.size(), begin + kSketchChunk);
    std::vector<Signal> batch;
    batch.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p) batch.push_back(data.signals[indices[p]]);
    auto sketches = drop(oracle, batch, m, workers);
    for (std::size_t p = begin; p < end; ++p) sink(p, std::move(sketches[p - begin]));
  }
}

enum class CentroidInput { kIntensity, kUnitNorm };

inline std::string to_string(CentroidInput c) { return c == CentroidInput::kIntensity ? "intensity" : "unit"; }

inline CentroidInput parse_centroid_input(const std::string& name) {
  if (name == "intensity") return CentroidInput::kIntensity;
  if (name == "unit") return CentroidInput::kUnitNorm;
  throw ConfigError("unknown centroid input '" + name + "' (expected intensity or unit)");
}

/// Per-class mean of DROP sketches of the training images (the means themselves are not normalized).
/// kIntensity weights each unit-norm sketch by ||x||^2 of the intensity image, using homogeneity of drop.
inline std::vector<DropSketch> compute_drop_centroids(const io::LabelledDataset& data,
                                                      std::span<const std::size_t> train, const SketchOracle& oracle,
                                                      std::size_t m, unsigned workers = 1,
                                                      CentroidInput input = CentroidInput::kIntensity,
                                                      std::size_t classes = kClasses) {
  const bool weighted = input == CentroidInput::kIntensity;
  if (weighted && data.intensity_norms.size() != data.size()) {
    throw DataError("intensity centroids need the pixel norms of every image");
  }
  std::vector<std::vector<double>> sums(classes, std::vector<double>(m, 0.0));
  std::vector<std::size_t> counts(classes, 0);
  SketchFingerprint fp;
  sketch_indices(oracle, data, train, m, workers, [&](std::size_t p, DropSketch s) {
    const auto label = static_cast<std::size_t>(data.labels[train[p]]);
    if (label >= classes) throw DataError("label " + std::to_string(label) + " out of range");
    const auto v = s.values();
    const double r = weighted ? data.intensity_norms[train[p]] : 1.0;
    const double w = r * r;
    for (std::size_t i = 0; i < m; ++i) sums[label][i] += w * v[i];
    ++counts[label];
    fp = s.fingerprint();
  });
  std::vector<DropSketch> out;
  out.reserve(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    if (counts[j] == 0) throw DataError("class " + std::to_string(j) + " has no training sample");
    for (double& v : sums[j]) v /= static_cast<double>(counts[j]);
    out.emplace_back(std::move(sums[j]), fp);
  }
  return out;
}

inline double percent(std::size_t hits, std::size_t total) {
  return total ? 100.0 * static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

inline std::size_t predict_direct(const std::vector<Signal>& centroids, const Signal& x) {
  std::vector<double> scores;
  scores.reserve(centroids.size());
  for (const auto& u : centroids) {
    const double p = inner(u, x);
    scores.push_back(p * p);
  }
  return argmax_index(scores);
}

/// Accuracy in percent of argmax_j <u_j, x>^2.
inline double classify_direct(const io::LabelledDataset& data, std::span<const std::size_t> test,
                              const std::vector<Signal>& centroids) {
  std::size_t hits = 0;
  for (std::size_t k : test) {
    if (predict_direct(centroids, data.signals[k]) == static_cast<std::size_t>(data.labels[k])) ++hits;
  }
  return percent(hits, test.size());
}

/// Bank of sign(drop(u_j)) labelled "0".."9".
inline PatternBank centroid_pattern_bank(const SketchOracle& oracle, const std::vector<Signal>& centroids,
                                         std::size_t m, unsigned workers = 1) {
  const auto sketches = drop(oracle, centroids, m, workers);
  PatternBank bank;
  for (std::size_t j = 0; j < sketches.size(); ++j) bank.add(sign_pattern(sketches[j], std::to_string(j)));
  return bank;
}

inline double classify_sketched(std::span<const DropSketch> test_sketches, std::span<const int> test_labels,
                                const PatternBank& bank) {
  if (test_sketches.size() != test_labels.size()) throw DimensionError("sketch and label counts differ");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < test_sketches.size(); ++k) {
    if (argmax_index(bank_estimates(bank, test_sketches[k])) == static_cast<std::size_t>(test_labels[k])) ++hits;
  }
  return percent(hits, test_sketches.size());
}

/// Sketches the test images on the oracle, then classifies them against the
/// centroid sign patterns.
inline double classify_sketched(const io::LabelledDataset& data, std::span<const std::size_t> test,
                                const std::vector<Signal>& centroids, const SketchOracle& oracle, std::size_t m,
                                unsigned workers = 1) {
  const auto bank = centroid_pattern_bank(oracle, centroids, m, workers);
  std::size_t hits = 0;
  sketch_indices(oracle, data, test, m, workers, [&](std::size_t p, const DropSketch& s) {
    if (argmax_index(bank_estimates(bank, s)) == static_cast<std::size_t>(data.labels[test[p]])) ++hits;
  });
  return percent(hits, test.size());
}

inline std::size_t predict_drop_centroid(const std::vector<DropSketch>& centroids,
                                         const std::vector<SignPattern>& signed_centroids, const DropSketch& s,
                                         bool use_sign) {
  std::vector<double> scores;
  if (use_sign) {
    for (const auto& p : signed_centroids) scores.push_back(sign_correlation(p, s));
  } else {
    for (const auto& c : centroids) scores.push_back(sketch_inner(c, s));
  }
  return argmax_index(scores);
}

inline double classify_drop_centroid(std::span<const DropSketch> test_sketches, std::span<const int> test_labels,
                                     const std::vector<DropSketch>& centroids, bool use_sign) {
  if (test_sketches.size() != test_labels.size()) throw DimensionError("sketch and label counts differ");
  std::vector<SignPattern> signed_centroids;
  if (use_sign) {
    for (const auto& c : centroids) signed_centroids.push_back(sign_pattern(c));
  }
  std::size_t hits = 0;
  for (std::size_t k = 0; k < test_sketches.size(); ++k) {
    if (predict_drop_centroid(centroids, signed_centroids, test_sketches[k], use_sign) ==
        static_cast<std::size_t>(test_labels[k])) {
      ++hits;
    }
  }
  return percent(hits, test_sketches.size());
}

inline double classify_drop_centroid(const io::LabelledDataset& data, std::span<const std::size_t> test,
                                     const std::vector<DropSketch>& centroids, const SketchOracle& oracle,
                                     std::size_t m, bool use_sign, unsigned workers = 1) {
  std::vector<SignPattern> signed_centroids;
  if (use_sign) {
    for (const auto& c : centroids) signed_centroids.push_back(sign_pattern(c));
  }
  std::size_t hits = 0;
  sketch_indices(oracle, data, test, m, workers, [&](std::size_t p, const DropSketch& s) {
    if (predict_drop_centroid(centroids, signed_centroids, s, use_sign) ==
        static_cast<std::size_t>(data.labels[test[p]])) {
      ++hits;
    }
  });
  return percent(hits, test.size());
}

struct MnistConfig {
  std::size_t m = 800;
  std::size_t trials = 5;
  std::size_t train_size = 60000;
  std::size_t test_size = 10000;
  std::vector<Pipeline> pipelines{Pipeline::kDirect, Pipeline::kSketched, Pipeline::kDropCentroid,
                                  Pipeline::kDropSignCentroid};
  CentroidInput drop_centroid_input = CentroidInput::kIntensity;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct TrialAccuracy {
  Pipeline pipeline;
  std::size_t trial;
  double accuracy;
};

struct PipelineStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (0 for a single trial)
};

struct MnistRun {
  MnistConfig config;
  std::vector<TrialAccuracy> accuracies;  // ordered by trial, then pipeline order of the config

  [[nodiscard]] std::vector<double> of(Pipeline p) const {
    std::vector<double> out;
    for (const auto& a : accuracies) {
      if (a.pipeline == p) out.push_back(a.accuracy);
    }
    return out;
  }

  [[nodiscard]] PipelineStats stats(Pipeline p) const {
    const auto v = of(p);
    PipelineStats s;
    if (v.empty()) return s;
    for (double a : v) s.mean += a;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double a : v) ss += (a - s.mean) * (a - s.mean);
      s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
  }
};

/// Split seed and ensemble seed of trial t.
inline std::uint64_t mnist_split_seed(std::uint64_t seed, std::size_t trial) { return mix_seed(seed, 2 * trial); }
inline std::uint64_t mnist_ensemble_seed(std::uint64_t seed, std::size_t trial) {
  return mix_seed(seed, 2 * trial + 1);
}

inline std::vector<TrialAccuracy> run_mnist_trial(const io::LabelledDataset& data, const MnistConfig& cfg,
                                                  std::size_t trial) {
  const auto split = random_split(data.size(), cfg.train_size, cfg.test_size, mnist_split_seed(cfg.seed, trial));
  auto wants = [&](Pipeline p) { return std::find(cfg.pipelines.begin(), cfg.pipelines.end(), p) != cfg.pipelines.end(); };
  const bool any_sketch =
      wants(Pipeline::kSketched) || wants(Pipeline::kDropCentroid) || wants(Pipeline::kDropSignCentroid);
  const bool any_pixel = wants(Pipeline::kDirect) || wants(Pipeline::kSketched);

  std::vector<Signal> pixel_centroids;
  if (any_pixel) pixel_centroids = compute_pixel_centroids(data, split.train);

  std::map<Pipeline, double> acc;
  if (wants(Pipeline::kDirect)) acc[Pipeline::kDirect] = classify_direct(data, split.test, pixel_centroids);

  if (any_sketch) {
    const std::size_t n = data.signals.front().size();
    const auto oracle = as_oracle(GaussianEnsemble(mnist_ensemble_seed(cfg.seed, trial), n, 2 * cfg.m));
    std::vector<DropSketch> test_sketches;
    test_sketches.reserve(split.test.size());
    sketch_indices(oracle, data, split.test, cfg.m, cfg.workers,
                   [&](std::size_t, DropSketch s) { test_sketches.push_back(std::move(s)); });
    std::vector<int> test_labels;
    test_labels.reserve(split.test.size());
    for (std::size_t k : split.test) test_labels.push_back(data.labels[k]);

    if (wants(Pipeline::kSketched)) {
      const auto bank = centroid_pattern_bank(oracle, pixel_centroids, cfg.m, cfg.workers);
      acc[Pipeline::kSketched] = classify_sketched(test_sketches, test_labels, bank);
    }
    if (wants(Pipeline::kDropCentroid) || wants(Pipeline::kDropSignCentroid)) {
      const auto centroids = compute_drop_centroids(data, split.train, oracle, cfg.m, cfg.workers,
                                                    cfg.drop_centroid_input);
      if (wants(Pipeline::kDropCentroid)) {
        acc[Pipeline::kDropCentroid] = classify_drop_centroid(test_sketches, test_labels, centroids, false);
      }
      if (wants(Pipeline::kDropSignCentroid)) {
        acc[Pipeline::kDropSignCentroid] = classify_drop_centroid(test_sketches, test_labels, centroids, true);
      }
    }
  }

  std::vector<TrialAccuracy> out;
  for (auto p : cfg.pipelines) out.push_back({p, trial, acc.at(p)});
  return out;
}

/// Runs every trial in order. Sketching inside a trial is spread over cfg.workers.
inline MnistRun run_mnist(const io::LabelledDataset& data, const MnistConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("trials must be at least 1");
  if (cfg.m == 0) throw ConfigError("m must be positive");
  if (cfg.pipelines.empty()) throw ConfigError("no pipeline selected");
  if (cfg.train_size == 0 || cfg.test_size == 0) throw ConfigError("train and test sizes must be positive");
  MnistRun run{cfg, {}};
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    auto trial = run_mnist_trial(data, cfg, t);
    run.accuracies.insert(run.accuracies.end(), trial.begin(), trial.end());
  }
  return run;
}

}  // namespace ropsketch::experiments
