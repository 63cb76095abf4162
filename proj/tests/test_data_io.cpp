#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "ropsketch/experiments/mnist.hpp"
#include "ropsketch/io/binary.hpp"
#include "ropsketch/io/csv.hpp"
#include "ropsketch/io/idx.hpp"
#include "test_support.hpp"

using namespace ropsketch;
using namespace ropsketch::io;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("hand-built IDX image file parses", "[io][idx]") {
  test::TempDir dir("idx");
  write_bytes(dir / "img", {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2, 3});
  const auto img = read_idx_images(dir / "img");
  CHECK(img.count == 1);
  CHECK(img.rows == 2);
  CHECK(img.cols == 2);
  CHECK(img.at(0, 0, 0) == 0);
  CHECK(img.at(0, 0, 1) == 1);
  CHECK(img.at(0, 1, 0) == 2);
  CHECK(img.at(0, 1, 1) == 3);
}

TEST_CASE("hand-built IDX label file parses", "[io][idx]") {
  test::TempDir dir("idx");
  write_bytes(dir / "lab", {0, 0, 8, 1, 0, 0, 0, 3, 0, 5, 9});
  CHECK(read_idx_labels(dir / "lab") == std::vector<std::uint8_t>{0, 5, 9});
}

TEST_CASE("malformed IDX files are rejected", "[io][idx][errors]") {
  test::TempDir dir("idx");
  // 9999 = 0x0000270F
  write_bytes(dir / "magic", {0, 0, 0x27, 0x0F, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 7});
  CHECK_THROWS_AS(read_idx_images(dir / "magic"), DataError);
  write_bytes(dir / "short", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2, 3});
  CHECK_THROWS_AS(read_idx_images(dir / "short"), DataError);
  write_bytes(dir / "header", {0, 0, 8, 3, 0});
  CHECK_THROWS_AS(read_idx_images(dir / "header"), DataError);
  write_bytes(dir / "lab_short", {0, 0, 8, 1, 0, 0, 0, 4, 1, 2});
  CHECK_THROWS_AS(read_idx_labels(dir / "lab_short"), DataError);
  write_bytes(dir / "lab_range", {0, 0, 8, 1, 0, 0, 0, 2, 1, 10});
  CHECK_THROWS_AS(read_idx_labels(dir / "lab_range"), DataError);
  write_bytes(dir / "lab_magic", {0, 0, 8, 3, 0, 0, 0, 1, 1});
  CHECK_THROWS_AS(read_idx_labels(dir / "lab_magic"), DataError);
  CHECK_THROWS_AS(read_idx_labels(dir / "missing"), IoError);
  CHECK_THROWS_AS(read_idx_images(dir / "missing"), IoError);
}

TEST_CASE("IDX files round-trip byte for byte", "[io][idx]") {
  test::TempDir dir("idx");
  IdxImages img{3, 4, 5, {}};
  SplitMix64 rng(1);
  for (std::size_t i = 0; i < 60; ++i) img.pixels.push_back(static_cast<std::uint8_t>(rng.below(256)));
  write_idx_images(dir / "img", img);
  const auto bytes = read_bytes(dir / "img");
  const auto back = read_idx_images(dir / "img");
  CHECK(back.pixels == img.pixels);
  CHECK(back.rows == 4);
  CHECK(back.cols == 5);
  write_idx_images(dir / "img2", back);
  CHECK(read_bytes(dir / "img2") == bytes);

  const std::vector<std::uint8_t> labels{9, 0, 3};
  write_idx_labels(dir / "lab", labels);
  CHECK(read_idx_labels(dir / "lab") == labels);
}

TEST_CASE("normalize_dataset produces unit vectors", "[io][normalize]") {
  IdxImages img{2, 28, 28, std::vector<std::uint8_t>(2 * 784, 0)};
  for (std::size_t p = 0; p < 784; ++p) img.pixels[p] = 200;
  for (std::size_t p = 0; p < 784; ++p) img.pixels[784 + p] = static_cast<std::uint8_t>((p * 37) % 256);
  const auto ds = normalize_dataset(img, {4, 7});
  REQUIRE(ds.size() == 2);
  CHECK(ds.labels == std::vector<int>{4, 7});
  for (std::size_t p = 0; p < 784; ++p) REQUIRE(ds.signals[0][p] == Catch::Approx(1.0 / 28.0).epsilon(1e-14));
  for (const auto& s : ds.signals) {
    CHECK(std::abs(s.norm() - 1.0) <= 1e-10);
    REQUIRE(s.shape().has_value());
    CHECK(*s.shape() == ImageShape{28, 28});
  }
  const auto again = normalized(ds.signals[1]);
  for (std::size_t p = 0; p < 784; ++p) REQUIRE(std::abs(again[p] - ds.signals[1][p]) <= 1e-15);

  REQUIRE(ds.intensity_norms.size() == 2);
  CHECK(ds.intensity_norms[0] == Catch::Approx(28.0 * 200.0 / 255.0).epsilon(1e-14));
  double ss = 0.0;
  for (std::size_t p = 0; p < 784; ++p) ss += std::pow(img.pixels[784 + p] / 255.0, 2);
  CHECK(ds.intensity_norms[1] == Catch::Approx(std::sqrt(ss)).epsilon(1e-14));

  const auto both = concatenate({ds, ds});
  CHECK(both.intensity_norms.size() == 4);
  LabelledDataset bare;
  bare.signals.push_back(ds.signals[0]);
  bare.labels.push_back(1);
  CHECK(concatenate({ds, bare}).intensity_norms.empty());
}

TEST_CASE("normalize_dataset rejects bad input", "[io][normalize][errors]") {
  IdxImages img{2, 2, 2, {1, 2, 3, 4, 0, 0, 0, 0}};
  CHECK_THROWS_AS(normalize_dataset(img, {1, 2}), DataError);
  CHECK_THROWS_AS(normalize_dataset(img, {1}), DataError);
}

TEST_CASE("random split is deterministic and disjoint", "[io][split]") {
  const auto a = experiments::random_split(70000, 60000, 10000, 5);
  const auto b = experiments::random_split(70000, 60000, 10000, 5);
  const auto c = experiments::random_split(70000, 60000, 10000, 6);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK_FALSE(a.test == c.test);
  REQUIRE(a.train.size() == 60000);
  REQUIRE(a.test.size() == 10000);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 70000);
  CHECK(*all.rbegin() == 69999);
  CHECK_THROWS_AS(experiments::random_split(10, 8, 3, 1), ConfigError);
}

TEST_CASE("CSV writes a header and round-trips doubles", "[io][csv]") {
  test::TempDir dir("csv");
  write_csv({}, {"m", "mean_abs"}, dir / "empty.csv");
  const auto empty = read_csv(dir / "empty.csv");
  CHECK(empty.header == std::vector<std::string>{"m", "mean_abs"});
  CHECK(empty.rows.empty());

  std::vector<CsvRow> rows;
  std::vector<double> values;
  SplitMix64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const double v = std::ldexp(static_cast<double>(rng.next() >> 11), -53) * std::pow(10.0, i % 9 - 4) * (i % 2 ? -1 : 1);
    values.push_back(v);
    rows.push_back({std::int64_t{i}, v, std::string(i % 7 == 0 ? "a,\"b\"" : "plain")});
  }
  write_csv(rows, {"i", "value", "label"}, dir / "vals.csv");
  const auto table = read_csv(dir / "vals.csv");
  REQUIRE(table.rows.size() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(table.rows[i][0] == std::to_string(i));
    const double back = parse_double(table.rows[i][1]);
    CHECK(back == values[i]);
    CHECK(test::relative_error(back, values[i]) <= 1e-12);
    CHECK(table.rows[i][2] == (i % 7 == 0 ? "a,\"b\"" : "plain"));
  }
  CHECK_THROWS_AS(write_csv({{std::int64_t{1}}}, {"a", "b"}, dir / "bad.csv"), DimensionError);
  CHECK_THROWS_AS(write_csv({}, {"a"}, dir / "no_such_dir" / "x.csv"), IoError);
}

TEST_CASE("summary JSON echoes its config", "[io][json]") {
  test::TempDir dir("json");
  nlohmann::ordered_json config{{"seed", 7}, {"n", 1000}, {"m", 800}, {"trials", 5}};
  nlohmann::ordered_json results{{"slope", -0.5}};
  write_summary_json(config, results, dir / "s.json");
  std::ifstream in(dir / "s.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["config"]["seed"] == 7);
  CHECK(doc["config"]["trials"] == 5);
  CHECK(doc["results"]["slope"] == -0.5);
}

TEST_CASE("binary sketch, pattern and ensemble files round-trip", "[io][binary]") {
  test::TempDir dir("bin");
  const GaussianEnsemble e(12, 9, 20);
  const auto oracle = as_oracle(e);
  const Signal x = test::random_signal(9, 1);
  const auto r = rop(oracle, x, 20);
  const auto d = drop(oracle, x, 10);
  const auto p = sign_pattern(d, "digit-3");
  const auto q = sign_pattern(d);

  write_sketch(r, dir / "r.bin");
  write_sketch(d, dir / "d.bin");
  write_pattern(p, dir / "p.bin");
  write_pattern(q, dir / "q.bin");
  write_ensemble(e, dir / "e.bin");

  CHECK(std::get<RopSketch>(read_sketch(dir / "r.bin")) == r);
  CHECK(std::get<DropSketch>(read_sketch(dir / "d.bin")) == d);
  CHECK(read_pattern(dir / "p.bin") == p);
  CHECK(read_pattern(dir / "q.bin") == q);
  const auto dump = read_ensemble(dir / "e.bin");
  CHECK(dump.fingerprint == e.fingerprint());
  for (std::size_t i = 0; i < 20; ++i) {
    const auto row = e.row(i);
    for (std::size_t j = 0; j < 9; ++j) REQUIRE(dump.rows[i * 9 + j] == row[j]);
  }
  CHECK(sniff_magic(dir / "d.bin") == "ROPS");
  CHECK(sniff_magic(dir / "p.bin") == "ROPP");
  CHECK(sniff_magic(dir / "e.bin") == "ROPE");

  // One byte per sign after the header.
  const auto bytes = read_bytes(dir / "q.bin");
  CHECK(bytes.size() == 4 + 4 + 5 * 8 + 4 + 10);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "ROPP");
  for (std::size_t i = 0; i < 10; ++i) CHECK(bytes[bytes.size() - 10 + i] == (q[i] > 0 ? 1 : 0));

  auto truncated = read_bytes(dir / "d.bin");
  truncated.pop_back();
  write_bytes(dir / "t.bin", truncated);
  CHECK_THROWS_AS(read_sketch(dir / "t.bin"), DataError);
  CHECK_THROWS_AS(read_pattern(dir / "d.bin"), DataError);
  CHECK_THROWS_AS(read_sketch(dir / "missing.bin"), IoError);
}
