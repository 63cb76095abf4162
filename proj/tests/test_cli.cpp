#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ropsketch/io/binary.hpp"
#include "ropsketch/io/csv.hpp"
#include "ropsketch/io/idx.hpp"
#include "ropsketch/ropsketch.hpp"
#include "test_support.hpp"

using namespace ropsketch;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + ROPSKETCH_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> data_lines(const std::filesystem::path& csv) {
  std::vector<std::string> out;
  std::ifstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

void write_text_vector(const std::filesystem::path& p, const std::vector<double>& v) {
  std::ofstream out(p);
  out << "# test vector\n";
  for (double e : v) out << io::format_double(e) << '\n';
}

}  // namespace

TEST_CASE("cli help and usage errors", "[cli]") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("delta --trials 0 --n 20 --m-grid 5,10") == 1);
  CHECK(run("delta --n 1 --m-grid 5,10 --trials 2") == 1);
  CHECK(run("delta --n 20 --m-grid 10,5 --trials 2") == 1);
  CHECK(run("delta --n abc") == 1);
}

TEST_CASE("cli delta writes the grid and is reproducible", "[cli][delta]") {
  test::TempDir dir("cli");
  const std::string args = "delta --n 1000 --m-grid 100:10000:log10 --trials 2 --seed 5";
  REQUIRE(run(args + " --out " + q(dir / "a") + " --workers 1") == 0);
  REQUIRE(run(args + " --out " + q(dir / "b") + " --workers 3") == 0);
  const auto lines = data_lines(dir / "a" / "delta.csv");
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "m,mean_abs,max_abs,trials");
  CHECK(lines[1].rfind("100,", 0) == 0);
  CHECK(lines[10].rfind("10000,", 0) == 0);
  CHECK(slurp(dir / "a" / "delta.csv") == slurp(dir / "b" / "delta.csv"));
  CHECK(slurp(dir / "a" / "delta.json") == slurp(dir / "b" / "delta.json"));

  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "delta.json"));
  CHECK(summary["config"]["seed"] == 5);
  CHECK(summary["config"]["n"] == 1000);
  CHECK(summary["config"]["trials"] == 2);
  CHECK(summary["config"]["m_grid"].size() == 10);
}

TEST_CASE("cli honours the output directory variable", "[cli]") {
  test::TempDir dir("cli");
  REQUIRE(run("delta --n 10 --m-grid 4,8 --trials 2", "ROPSKETCH_OUT_DIR=" + q(dir / "env")) == 0);
  CHECK(std::filesystem::exists(dir / "env" / "delta.csv"));
  CHECK(std::filesystem::exists(dir / "env" / "delta.json"));
}

TEST_CASE("cli disk writes 24 x 4 rows", "[cli][disk]") {
  test::TempDir dir("cli");
  REQUIRE(run("disk --m 256 --seed 2 --out " + q(dir / "a")) == 0);
  const auto lines = data_lines(dir / "a" / "disk.csv");
  REQUIRE(lines.size() == 97);
  CHECK(lines[0] == "t,j,q_true,q_est");
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "disk.json"));
  CHECK(summary["config"]["n"] == 16384);
  CHECK(summary["config"]["m"] == 256);

  CHECK(run("disk --m 256 --orbit-radius 60 --out " + q(dir / "bad")) == 1);
  CHECK(run("disk --m 0 --out " + q(dir / "bad")) == 1);
}

TEST_CASE("cli mnist pipelines on toy IDX files", "[cli][mnist]") {
  test::TempDir dir("cli");
  const auto train = test::toy_digits(300, 1);
  const auto test_set = test::toy_digits(100, 2);
  io::write_idx_images(dir / "train-img", train.images);
  io::write_idx_labels(dir / "train-lbl", train.labels);
  io::write_idx_images(dir / "test-img", test_set.images);
  io::write_idx_labels(dir / "test-lbl", test_set.labels);
  const std::string inputs = "--images " + q(dir / "train-img") + " " + q(dir / "test-img") + " --labels " +
                             q(dir / "train-lbl") + " " + q(dir / "test-lbl");
  const std::string args = "mnist " + inputs +
                           " --pipelines direct,sk,drop,drop-sign --m 50 --trials 5 --train-size 300 --test-size 100";
  REQUIRE(run(args + " --out " + q(dir / "a") + " --workers 1") == 0);
  REQUIRE(run(args + " --out " + q(dir / "b") + " --workers 2") == 0);
  const auto lines = data_lines(dir / "a" / "mnist.csv");
  REQUIRE(lines.size() == 21);
  CHECK(lines[0] == "pipeline,m,trial,accuracy");
  CHECK(lines[1].rfind("direct,50,0,", 0) == 0);
  CHECK(lines[20].rfind("drop-sign,50,4,", 0) == 0);
  CHECK(slurp(dir / "a" / "mnist.csv") == slurp(dir / "b" / "mnist.csv"));
  CHECK(slurp(dir / "a" / "mnist.json") == slurp(dir / "b" / "mnist.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "a" / "mnist.json"))["config"]["drop_centroids"] == "intensity");
  REQUIRE(run(args + " --drop-centroids unit --out " + q(dir / "u")) == 0);
  CHECK(data_lines(dir / "u" / "mnist.csv").size() == 21);

  CHECK(run("mnist --images " + q(dir / "train-img") + " --labels " + q(dir / "nope") + " --train-size 200 "
            "--test-size 50 --out " + q(dir / "c")) == 2);
  CHECK(run("mnist " + inputs + " --pipelines svm --out " + q(dir / "c")) == 1);
  CHECK(run("mnist " + inputs + " --drop-centroids raw --out " + q(dir / "c")) == 1);
  CHECK(run("mnist " + inputs + " --train-size 390 --test-size 20 --out " + q(dir / "c")) == 1);
  CHECK(run("mnist --images " + q(dir / "train-img") + " --labels " + q(dir / "test-lbl") + " --out " +
            q(dir / "c")) == 2);
}

TEST_CASE("cli sketch modes", "[cli][sketch]") {
  test::TempDir dir("cli");
  write_text_vector(dir / "zero.txt", std::vector<double>(12, 0.0));
  REQUIRE(run("sketch --in " + q(dir / "zero.txt") + " --m 20 --seed 3 --mode rop --out " + q(dir / "zero.csv")) == 0);
  const auto zero = data_lines(dir / "zero.csv");
  REQUIRE(zero.size() == 21);
  for (std::size_t i = 1; i < zero.size(); ++i) CHECK(zero[i] == "0");

  const Signal x = test::random_signal(12, 4);
  write_text_vector(dir / "x.txt", {x.values().begin(), x.values().end()});
  REQUIRE(run("sketch --in " + q(dir / "x.txt") + " --m 30 --seed 3 --mode drop --out " + q(dir / "x.rops")) == 0);
  REQUIRE(run("sketch --in " + q(dir / "x.rops") + " --mode sign --out " + q(dir / "x.ropp")) == 0);
  REQUIRE(run("sketch --in " + q(dir / "x.txt") + " --m 30 --seed 3 --mode sign --out " + q(dir / "direct.ropp")) == 0);
  REQUIRE(run("sketch --in " + q(dir / "x.txt") + " --m 30 --seed 3 --mode drop --out " + q(dir / "x.csv")) == 0);

  const auto oracle = as_oracle(GaussianEnsemble(3, 12, 60));
  const auto expected = sign_pattern(drop(oracle, x, 30));
  CHECK(io::read_pattern(dir / "x.ropp") == expected);
  CHECK(io::read_pattern(dir / "direct.ropp") == expected);
  CHECK(std::get<DropSketch>(io::read_sketch(dir / "x.rops")) == drop(oracle, x, 30));
  const auto csv = data_lines(dir / "x.csv");
  REQUIRE(csv.size() == 31);
  for (std::size_t i = 0; i < 30; ++i) CHECK(io::parse_double(csv[i + 1]) == drop(oracle, x, 30)[i]);

  CHECK(run("sketch --in " + q(dir / "x.txt") + " --m 30 --mode square") == 1);
  CHECK(run("sketch --in " + q(dir / "x.txt") + " --m 0 --mode rop --out " + q(dir / "o.bin")) == 1);
  CHECK(run("sketch --in " + q(dir / "missing.txt") + " --m 3 --mode rop --out " + q(dir / "o.bin")) == 2);
  std::ofstream(dir / "bad.txt") << "1.0 2.0 banana\n";
  CHECK(run("sketch --in " + q(dir / "bad.txt") + " --m 3 --mode rop --out " + q(dir / "o.bin")) == 2);
  CHECK(run("sketch --in " + q(dir / "x.rops") + " --mode drop --out " + q(dir / "o.bin")) == 1);
}
