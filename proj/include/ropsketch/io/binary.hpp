#pragma once

// Little-endian binary containers.
//
//   ROPE  ensemble dump:  "ROPE" u32 version, u64 n, u64 row_count, u64 seed,
//                         then row_count * n f64 (row-major)
//   ROPS  sketch:         "ROPS" u32 version, u32 kind (0 = rop, 1 = drop),
//                         u64 seed, u64 n, u64 row_begin, u64 row_end, u64 length,
//                         then length f64
//   ROPP  sign pattern:   "ROPP" u32 version, u64 seed, u64 n, u64 row_begin,
//                         u64 row_end, u64 length, u32 label bytes (0xFFFFFFFF = no label),
//                         label, then length bytes (0x00 = -1, 0x01 = +1)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/sketch.hpp"
#include "ropsketch/spe.hpp"

namespace ropsketch::io {

inline constexpr std::uint32_t kBinaryVersion = 1;

namespace detail {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
  }

  void magic(std::string_view m) { out_.write(m.data(), 4); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void byte(std::uint8_t b) { out_.put(static_cast<char>(b)); }

  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  }

 private:
  template <class T>
  void le(T v) {
    std::array<char, sizeof(T)> b;
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(b.data(), b.size());
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  [[nodiscard]] std::string peek_magic() const { return data_.size() >= 4 ? data_.substr(0, 4) : std::string(); }

  void expect_magic(std::string_view m) {
    need(4);
    if (std::string_view(data_).substr(pos_, 4) != m) {
      throw DataError("'" + path_.string() + "': expected magic " + std::string(m));
    }
    pos_ += 4;
    if (const auto v = u32(); v != kBinaryVersion) {
      throw DataError("'" + path_.string() + "': unsupported version " + std::to_string(v));
    }
  }

  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::uint8_t byte() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::string bytes(std::size_t count) {
    need(count);
    auto s = data_.substr(pos_, count);
    pos_ += count;
    return s;
  }
  void expect_end() const {
    if (pos_ != data_.size()) throw DataError("'" + path_.string() + "': trailing bytes");
  }

 private:
  void need(std::size_t count) const {
    if (data_.size() - pos_ < count) throw DataError("'" + path_.string() + "': truncated file");
  }

  template <class T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= T{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::filesystem::path path_;
  std::string data_;
  std::size_t pos_ = 0;
};

inline void write_fingerprint(Writer& w, const SketchFingerprint& fp) {
  w.u64(fp.seed);
  w.u64(fp.n);
  w.u64(fp.row_begin);
  w.u64(fp.row_end);
}

inline SketchFingerprint read_fingerprint(Reader& r) {
  SketchFingerprint fp;
  fp.seed = r.u64();
  fp.n = r.u64();
  fp.row_begin = r.u64();
  fp.row_end = r.u64();
  return fp;
}

}  // namespace detail

/// Debug dump of every row of an ensemble.
inline void write_ensemble(const GaussianEnsemble& e, const std::filesystem::path& path) {
  detail::Writer w(path);
  w.magic("ROPE");
  w.u32(kBinaryVersion);
  w.u64(e.dim());
  w.u64(e.row_count());
  w.u64(e.seed());
  std::vector<double> row(e.dim());
  for (std::size_t i = 0; i < e.row_count(); ++i) {
    e.fill_row(i, row);
    for (double v : row) w.f64(v);
  }
  w.finish();
}

struct EnsembleDump {
  EnsembleFingerprint fingerprint;
  std::vector<double> rows;  // row_count * n
};

inline EnsembleDump read_ensemble(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ROPE");
  EnsembleDump d;
  d.fingerprint.n = r.u64();
  d.fingerprint.row_count = r.u64();
  d.fingerprint.seed = r.u64();
  d.rows.resize(d.fingerprint.n * d.fingerprint.row_count);
  for (double& v : d.rows) v = r.f64();
  r.expect_end();
  return d;
}

enum class SketchKind : std::uint32_t { kRop = 0, kDrop = 1 };

namespace detail {
inline void write_sketch_values(const std::filesystem::path& path, SketchKind kind, const SketchFingerprint& fp,
                                std::span<const double> values) {
  Writer w(path);
  w.magic("ROPS");
  w.u32(kBinaryVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  write_fingerprint(w, fp);
  w.u64(values.size());
  for (double v : values) w.f64(v);
  w.finish();
}
}  // namespace detail

inline void write_sketch(const RopSketch& s, const std::filesystem::path& path) {
  detail::write_sketch_values(path, SketchKind::kRop, s.fingerprint(), s.values());
}

inline void write_sketch(const DropSketch& s, const std::filesystem::path& path) {
  detail::write_sketch_values(path, SketchKind::kDrop, s.fingerprint(), s.values());
}

using AnySketch = std::variant<RopSketch, DropSketch>;

inline AnySketch read_sketch(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ROPS");
  const auto kind = r.u32();
  const auto fp = detail::read_fingerprint(r);
  const auto length = r.u64();
  if (length > (std::uint64_t{1} << 40)) throw DataError("'" + path.string() + "': implausible sketch length");
  std::vector<double> values(length);
  for (double& v : values) v = r.f64();
  r.expect_end();
  switch (kind) {
    case static_cast<std::uint32_t>(SketchKind::kRop):
      return RopSketch(std::move(values), fp);
    case static_cast<std::uint32_t>(SketchKind::kDrop):
      return DropSketch(std::move(values), fp);
    default:
      throw DataError("'" + path.string() + "': unknown sketch kind " + std::to_string(kind));
  }
}

inline void write_pattern(const SignPattern& p, const std::filesystem::path& path) {
  detail::Writer w(path);
  w.magic("ROPP");
  w.u32(kBinaryVersion);
  detail::write_fingerprint(w, p.fingerprint());
  w.u64(p.size());
  if (p.label()) {
    w.u32(static_cast<std::uint32_t>(p.label()->size()));
    w.bytes(*p.label());
  } else {
    w.u32(0xFFFFFFFFu);
  }
  for (auto s : p.signs()) w.byte(s > 0 ? 0x01 : 0x00);
  w.finish();
}

inline SignPattern read_pattern(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic("ROPP");
  const auto fp = detail::read_fingerprint(r);
  const auto length = r.u64();
  if (length > (std::uint64_t{1} << 40)) throw DataError("'" + path.string() + "': implausible pattern length");
  std::optional<std::string> label;
  if (const auto label_size = r.u32(); label_size != 0xFFFFFFFFu) label = r.bytes(label_size);
  std::vector<std::int8_t> signs(length);
  for (auto& s : signs) {
    const auto b = r.byte();
    if (b > 1) throw DataError("'" + path.string() + "': pattern byte must be 0x00 or 0x01");
    s = b ? std::int8_t{1} : std::int8_t{-1};
  }
  r.expect_end();
  return SignPattern(std::move(signs), fp, std::move(label));
}

/// Magic of a binary file, or "" for anything else (e.g. a text vector).
inline std::string sniff_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char m[4] = {};
  in.read(m, 4);
  if (in.gcount() != 4) return {};
  const std::string s(m, 4);
  return (s == "ROPE" || s == "ROPS" || s == "ROPP") ? s : std::string();
}

}  // namespace ropsketch::io
