#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ropsketch/error.hpp"
#include "ropsketch/io/idx.hpp"
#include "ropsketch/philox.hpp"
#include "ropsketch/signal.hpp"

namespace test {

inline ropsketch::Signal random_signal(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  ropsketch::NormalStream(ropsketch::mix_seed(seed, 0xabcdef)).fill(0, v);
  return ropsketch::Signal(std::move(v));
}

inline ropsketch::Signal unit_signal(std::size_t n, std::uint64_t seed) {
  return ropsketch::normalized(random_signal(n, seed));
}

/// Hand-set rows satisfying the RowSource concept.
struct StubRows {
  std::size_t n = 0;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t dim() const { return n; }
  [[nodiscard]] std::size_t row_count() const { return rows.size(); }
  [[nodiscard]] std::uint64_t seed() const { return 0; }
  void fill_row(std::size_t i, std::span<double> out) const {
    if (i >= rows.size()) throw ropsketch::IndexError("stub row out of range");
    for (std::size_t j = 0; j < n; ++j) out[j] = rows[i][j];
    for (std::size_t j = n; j < out.size(); ++j) out[j] = 0.0;
  }
};

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Ten-class toy digits on a side x side grid: class j lights a bar whose
/// position depends on j, over uniform background noise. Labels cycle 0..9.
struct ToyDigits {
  ropsketch::io::IdxImages images;
  std::vector<std::uint8_t> labels;
};

inline ToyDigits toy_digits(std::size_t count, std::uint64_t seed, std::size_t side = 8) {
  ToyDigits out{{count, side, side, std::vector<std::uint8_t>(count * side * side)}, {}};
  ropsketch::SplitMix64 rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t label = k % 10;
    out.labels.push_back(static_cast<std::uint8_t>(label));
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const bool on = label < 5 ? r == (label * side) / 5 : c == ((label - 5) * side) / 5;
        const auto noise = static_cast<std::uint8_t>(1 + rng.below(on ? 60 : 90));
        out.images.pixels[k * side * side + r * side + c] = static_cast<std::uint8_t>(on ? 190 + noise : noise);
      }
    }
  }
  return out;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ropsketch_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
