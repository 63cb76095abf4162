#pragma once

// IDX (MNIST) reader/writer and dataset normalization.
// Headers are big-endian: magic 2051 (images: count, rows, cols) or 2049 (labels: count).

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ropsketch/error.hpp"
#include "ropsketch/signal.hpp"

namespace ropsketch::io {

inline constexpr std::uint32_t kIdxImagesMagic = 2051;
inline constexpr std::uint32_t kIdxLabelsMagic = 2049;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image

  [[nodiscard]] std::size_t image_size() const noexcept { return rows * cols; }
  [[nodiscard]] std::uint8_t at(std::size_t image, std::size_t r, std::size_t c) const noexcept {
    return pixels[image * image_size() + r * cols + c];
  }
};

namespace detail {

inline std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

inline void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                              static_cast<char>(v)};
  out.write(b.data(), 4);
}

/// FNV-1a 64-bit digest, recorded as dataset provenance.
inline std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string provenance(const std::filesystem::path& path) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(read_all(path))));
  return path.string() + " fnv1a64=" + hex;
}

}  // namespace detail

inline IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto bytes = detail::read_all(path);
  if (bytes.size() < 16) throw DataError("'" + path.string() + "': truncated IDX image header");
  const auto magic = detail::be32(bytes, 0);
  if (magic != kIdxImagesMagic) {
    throw DataError("'" + path.string() + "': bad IDX image magic " + std::to_string(magic));
  }
  IdxImages out;
  out.count = detail::be32(bytes, 4);
  out.rows = detail::be32(bytes, 8);
  out.cols = detail::be32(bytes, 12);
  if (out.rows == 0 || out.cols == 0) throw DataError("'" + path.string() + "': zero image dimension");
  const std::size_t need = out.count * out.rows * out.cols;
  if (bytes.size() - 16 < need) {
    throw DataError("'" + path.string() + "': truncated, header declares " + std::to_string(out.count) + " images");
  }
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return out;
}

inline std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_all(path);
  if (bytes.size() < 8) throw DataError("'" + path.string() + "': truncated IDX label header");
  const auto magic = detail::be32(bytes, 0);
  if (magic != kIdxLabelsMagic) {
    throw DataError("'" + path.string() + "': bad IDX label magic " + std::to_string(magic));
  }
  const std::size_t count = detail::be32(bytes, 4);
  if (bytes.size() - 8 < count) {
    throw DataError("'" + path.string() + "': truncated, header declares " + std::to_string(count) + " labels");
  }
  std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) throw DataError("'" + path.string() + "': label " + std::to_string(labels[i]) + " at " +
                                       std::to_string(i) + " is outside 0..9");
  }
  return labels;
}

inline void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw DimensionError("IDX image buffer does not match its header");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  detail::put_be32(out, kIdxImagesMagic);
  detail::put_be32(out, static_cast<std::uint32_t>(images.count));
  detail::put_be32(out, static_cast<std::uint32_t>(images.rows));
  detail::put_be32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  detail::put_be32(out, kIdxLabelsMagic);
  detail::put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Unit-norm images with digit labels.
struct LabelledDataset {
  std::vector<Signal> signals;
  std::vector<int> labels;
  std::vector<double> intensity_norms;  // ||pixels / 255|| before scaling; empty if signals were built directly
  std::vector<std::string> sources;  // "path fnv1a64=<digest>" per input file

  [[nodiscard]] std::size_t size() const noexcept { return signals.size(); }
};

/// Pixels / 255, flattened row-major, scaled to unit L2 norm.
inline LabelledDataset normalize_dataset(const IdxImages& images, const std::vector<std::uint8_t>& labels) {
  if (images.count != labels.size()) {
    throw DataError("image count " + std::to_string(images.count) + " does not match label count " +
                    std::to_string(labels.size()));
  }
  LabelledDataset out;
  out.signals.reserve(images.count);
  out.labels.reserve(images.count);
  out.intensity_norms.reserve(images.count);
  const std::size_t size = images.image_size();
  for (std::size_t k = 0; k < images.count; ++k) {
    std::vector<double> v(size);
    for (std::size_t p = 0; p < size; ++p) v[p] = images.pixels[k * size + p] / 255.0;
    const Signal raw(std::move(v), ImageShape{images.rows, images.cols});
    if (raw.squared_norm() == 0.0) throw DataError("image " + std::to_string(k) + " is all zero");
    out.signals.push_back(normalized(raw));
    out.labels.push_back(labels[k]);
    out.intensity_norms.push_back(raw.norm());
  }
  return out;
}

/// Concatenates datasets (e.g. the official train and test files before re-splitting).
inline LabelledDataset concatenate(std::vector<LabelledDataset> parts) {
  LabelledDataset out;
  for (auto& p : parts) {
    for (auto& s : p.signals) out.signals.push_back(std::move(s));
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.intensity_norms.insert(out.intensity_norms.end(), p.intensity_norms.begin(), p.intensity_norms.end());
    out.sources.insert(out.sources.end(), p.sources.begin(), p.sources.end());
  }
  if (out.intensity_norms.size() != out.signals.size()) out.intensity_norms.clear();
  return out;
}

inline LabelledDataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto ds = normalize_dataset(read_idx_images(images), read_idx_labels(labels));
  ds.sources = {detail::provenance(images), detail::provenance(labels)};
  return ds;
}

}  // namespace ropsketch::io
