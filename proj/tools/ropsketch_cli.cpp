// ropsketch: experiments and sketch utilities.
//
//   ropsketch delta  --n 1000 --m-grid 100:10000:log10 --trials 100 --seed 1
//   ropsketch disk   --m 8192 --seed 1
//   ropsketch mnist  --images train.idx test.idx --labels train.lbl test.lbl --m 800
//   ropsketch sketch --in x.txt --m 256 --seed 1 --mode drop --out x.rops
//
// Outputs go to --out (default $ROPSKETCH_OUT_DIR, else the working directory).
// Exit status: 0 ok, 1 configuration error, 2 I/O or data error, 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ropsketch/experiments/delta.hpp"
#include "ropsketch/experiments/disk.hpp"
#include "ropsketch/experiments/mnist.hpp"
#include "ropsketch/io/binary.hpp"
#include "ropsketch/io/csv.hpp"
#include "ropsketch/io/idx.hpp"
#include "ropsketch/parallel.hpp"
#include "ropsketch/ropsketch.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ropsketch;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kIo = 2, kInternal = 3 };

fs::path default_out_dir() {
  if (const char* env = std::getenv("ROPSKETCH_OUT_DIR"); env && *env) return env;
  return ".";
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

struct DeltaArgs {
  std::size_t n = 1000;
  std::string m_grid = "100:10000:log10";
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  fs::path out;
  unsigned workers = 0;
};

int run_delta(const DeltaArgs& a) {
  const auto grid = experiments::parse_m_grid(a.m_grid);
  const auto curve = experiments::estimate_delta(a.n, grid, a.trials, a.seed, a.workers);
  const auto dir = prepare_dir(a.out);

  std::vector<io::CsvRow> rows;
  for (const auto& p : curve.points) {
    rows.push_back({static_cast<std::int64_t>(p.m), p.mean_abs, p.max_abs, static_cast<std::int64_t>(p.trials)});
  }
  io::write_csv(rows, {"m", "mean_abs", "max_abs", "trials"}, dir / "delta.csv");

  ordered_json config{{"command", "delta"}, {"n", a.n}, {"m_grid", grid}, {"trials", a.trials}, {"seed", a.seed}};
  ordered_json results;
  if (curve.points.size() >= 2) results["loglog_slope"] = experiments::loglog_slope(curve);
  results["points"] = ordered_json::array();
  for (const auto& p : curve.points) {
    results["points"].push_back({{"m", p.m}, {"mean_abs", p.mean_abs}, {"max_abs", p.max_abs}});
  }
  io::write_summary_json(config, results, dir / "delta.json");

  for (const auto& p : curve.points) std::cout << "m=" << p.m << " mean=" << p.mean_abs << " max=" << p.max_abs << '\n';
  return kOk;
}

struct DiskArgs {
  std::size_t m = 8192;
  std::uint64_t seed = 0;
  fs::path out;
  experiments::DiskGeometry geometry;
  unsigned workers = 0;
};

int run_disk(const DiskArgs& a) {
  const auto seq = experiments::generate_disk_sequence(a.geometry);
  const auto trace = experiments::run_disk_experiment(seq, a.m, a.seed, a.workers);
  const auto dir = prepare_dir(a.out);

  std::vector<io::CsvRow> rows;
  for (std::size_t t = 0; t < trace.frames(); ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      rows.push_back({static_cast<std::int64_t>(t), static_cast<std::int64_t>(j), trace.q_true[j][t],
                      trace.q_est[j][t]});
    }
  }
  io::write_csv(rows, {"t", "j", "q_true", "q_est"}, dir / "disk.csv");

  const auto& g = a.geometry;
  ordered_json config{{"command", "disk"},           {"n", g.height * g.width},
                      {"m", a.m},                    {"seed", a.seed},
                      {"height", g.height},          {"width", g.width},
                      {"orbit_radius", g.orbit_radius}, {"disk_radius", g.disk_radius},
                      {"frames", g.frames}};
  ordered_json results{{"intensity", seq.intensity},
                       {"argmax_agreement", experiments::argmax_agreement(trace)},
                       {"rmse", experiments::occupancy_rmse(trace)}};
  io::write_summary_json(config, results, dir / "disk.json");
  std::cout << "argmax agreement " << results["argmax_agreement"].get<double>() << ", rmse "
            << results["rmse"].get<double>() << '\n';
  return kOk;
}

struct MnistArgs {
  std::vector<std::string> images;
  std::vector<std::string> labels;
  std::size_t m = 800;
  std::size_t trials = 5;
  std::string pipelines = "direct,sk,drop,drop-sign";
  std::string drop_centroids = "intensity";
  std::uint64_t seed = 0;
  std::size_t train_size = 60000;
  std::size_t test_size = 10000;
  fs::path out;
  unsigned workers = 0;
};

std::vector<experiments::Pipeline> parse_pipelines(const std::string& list) {
  std::vector<experiments::Pipeline> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto p = experiments::parse_pipeline(name);
    if (std::find(out.begin(), out.end(), p) != out.end()) throw ConfigError("pipeline '" + name + "' listed twice");
    out.push_back(p);
  }
  if (out.empty()) throw ConfigError("no pipeline selected");
  return out;
}

int run_mnist(const MnistArgs& a) {
  if (a.images.size() != a.labels.size()) throw ConfigError("give one --labels file per --images file");
  experiments::MnistConfig cfg;
  cfg.m = a.m;
  cfg.trials = a.trials;
  cfg.pipelines = parse_pipelines(a.pipelines);
  cfg.drop_centroid_input = experiments::parse_centroid_input(a.drop_centroids);
  cfg.seed = a.seed;
  cfg.train_size = a.train_size;
  cfg.test_size = a.test_size;
  cfg.workers = a.workers;

  std::vector<io::LabelledDataset> parts;
  for (std::size_t i = 0; i < a.images.size(); ++i) parts.push_back(io::load_idx_dataset(a.images[i], a.labels[i]));
  const auto data = io::concatenate(std::move(parts));
  const auto run = experiments::run_mnist(data, cfg);
  const auto dir = prepare_dir(a.out);

  std::vector<io::CsvRow> rows;
  for (const auto& acc : run.accuracies) {
    rows.push_back({experiments::to_string(acc.pipeline), static_cast<std::int64_t>(cfg.m),
                    static_cast<std::int64_t>(acc.trial), acc.accuracy});
  }
  io::write_csv(rows, {"pipeline", "m", "trial", "accuracy"}, dir / "mnist.csv");

  ordered_json pipelines = ordered_json::array();
  for (auto p : cfg.pipelines) pipelines.push_back(experiments::to_string(p));
  ordered_json config{{"command", "mnist"},
                      {"n", data.signals.front().size()},
                      {"m", cfg.m},
                      {"trials", cfg.trials},
                      {"seed", cfg.seed},
                      {"train_size", cfg.train_size},
                      {"test_size", cfg.test_size},
                      {"pipelines", pipelines},
                      {"drop_centroids", experiments::to_string(cfg.drop_centroid_input)},
                      {"inputs", data.sources}};
  ordered_json results;
  for (auto p : cfg.pipelines) {
    const auto s = run.stats(p);
    results[experiments::to_string(p)] = {{"mean", s.mean}, {"stddev", s.stddev}};
    std::cout << experiments::to_string(p) << ": " << s.mean << " +- " << s.stddev << '\n';
  }
  io::write_summary_json(config, results, dir / "mnist.json");
  return kOk;
}

struct SketchArgs {
  fs::path in;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string mode;
  fs::path out;
  unsigned workers = 0;
};

// Whitespace- or comma-separated reals; '#' starts a comment.
Signal read_vector_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) {
      try {
        values.push_back(io::parse_double(token));
      } catch (const DataError&) {
        throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": not a number: '" + token + "'");
      }
    }
  }
  if (values.empty()) throw DataError("'" + path.string() + "' holds no values");
  return Signal(std::move(values));
}

bool wants_csv(const fs::path& out) { return out.extension() == ".csv"; }

void write_values_csv(const fs::path& out, const std::string& kind, const SketchFingerprint& fp,
                      const std::vector<io::CsvCell>& values) {
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out.string() + "'");
  f << "# " << kind << ' ' << to_string(fp) << "\nvalue\n";
  for (const auto& v : values) f << io::format_cell(v) << '\n';
  if (!f) throw IoError("write failed for '" + out.string() + "'");
}

int run_sketch(const SketchArgs& a) {
  fs::path out = a.out;
  if (out.empty()) out = prepare_dir(default_out_dir()) / (a.mode == "sign" ? "pattern.bin" : "sketch.bin");

  if (io::sniff_magic(a.in) == "ROPS") {
    if (a.mode != "sign") throw ConfigError("a sketch file can only be turned into a sign pattern (--mode sign)");
    auto any = io::read_sketch(a.in);
    const auto* s = std::get_if<DropSketch>(&any);
    if (!s) throw DataError("'" + a.in.string() + "' holds a ROP sketch; sign patterns need a DROP sketch");
    const auto p = sign_pattern(*s);
    if (wants_csv(out)) {
      std::vector<io::CsvCell> cells(p.signs().begin(), p.signs().end());
      write_values_csv(out, "sign", p.fingerprint(), cells);
    } else {
      io::write_pattern(p, out);
    }
    return kOk;
  }

  if (a.m == 0) throw ConfigError("--m must be positive");
  const Signal x = read_vector_text(a.in);
  const std::size_t rows = a.mode == "rop" ? a.m : 2 * a.m;
  const auto oracle = as_oracle(GaussianEnsemble(a.seed, x.size(), rows));
  if (a.mode == "rop") {
    const auto s = rop(oracle, x, a.m);
    if (wants_csv(out)) {
      write_values_csv(out, "rop", s.fingerprint(), {s.values().begin(), s.values().end()});
    } else {
      io::write_sketch(s, out);
    }
    return kOk;
  }
  const auto s = drop(oracle, x, a.m, a.workers);
  if (a.mode == "drop") {
    if (wants_csv(out)) {
      write_values_csv(out, "drop", s.fingerprint(), {s.values().begin(), s.values().end()});
    } else {
      io::write_sketch(s, out);
    }
    return kOk;
  }
  const auto p = sign_pattern(s);
  if (wants_csv(out)) {
    write_values_csv(out, "sign", p.fingerprint(), {p.signs().begin(), p.signs().end()});
  } else {
    io::write_pattern(p, out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic random sketching, DROP sketches and sign-product-embedding estimates"};
  app.require_subcommand(1);

  const fs::path out_default = default_out_dir();
  const unsigned workers_default = default_workers();

  DeltaArgs delta_args;
  delta_args.out = out_default;
  delta_args.workers = workers_default;
  auto* delta = app.add_subcommand("delta", "Empirical SPE distortion for orthogonal unit pairs");
  delta->add_option("--n", delta_args.n, "Signal dimension")->capture_default_str();
  delta->add_option("--m-grid", delta_args.m_grid, "start:stop:logK or comma list of m values")->capture_default_str();
  delta->add_option("--trials", delta_args.trials, "Trials per grid point")->capture_default_str();
  delta->add_option("--seed", delta_args.seed, "Base seed")->capture_default_str();
  delta->add_option("--out", delta_args.out, "Output directory");
  delta->add_option("--workers", delta_args.workers, "Worker threads")->check(CLI::PositiveNumber);

  DiskArgs disk_args;
  disk_args.out = out_default;
  disk_args.workers = workers_default;
  auto* disk = app.add_subcommand("disk", "Rotating-disk quadrant occupancy from DROP sketches");
  disk->add_option("--m", disk_args.m, "Number of DROP measurements")->capture_default_str();
  disk->add_option("--seed", disk_args.seed, "Ensemble seed")->capture_default_str();
  disk->add_option("--out", disk_args.out, "Output directory");
  disk->add_option("--orbit-radius", disk_args.geometry.orbit_radius, "Orbit radius in pixels")->capture_default_str();
  disk->add_option("--disk-radius", disk_args.geometry.disk_radius, "Disk radius in pixels")->capture_default_str();
  disk->add_option("--size", disk_args.geometry.height, "Image height and width in pixels")
      ->capture_default_str()
      ->each([&](const std::string&) { disk_args.geometry.width = disk_args.geometry.height; });
  disk->add_option("--frames", disk_args.geometry.frames, "Number of frames")->capture_default_str();
  disk->add_option("--workers", disk_args.workers, "Worker threads")->check(CLI::PositiveNumber);

  MnistArgs mnist_args;
  mnist_args.out = out_default;
  mnist_args.workers = workers_default;
  auto* mnist = app.add_subcommand("mnist", "Nearest-centroid classification in the pixel and sketch domains");
  mnist->add_option("--images", mnist_args.images, "IDX image files (train, test)")->required()->expected(1, 2);
  mnist->add_option("--labels", mnist_args.labels, "IDX label files (train, test)")->required()->expected(1, 2);
  mnist->add_option("--m", mnist_args.m, "Number of DROP measurements")->capture_default_str();
  mnist->add_option("--trials", mnist_args.trials, "Trials (each redraws split and ensemble)")->capture_default_str();
  mnist->add_option("--pipelines", mnist_args.pipelines, "Comma list of direct, sk, drop, drop-sign")
      ->capture_default_str();
  mnist->add_option("--drop-centroids", mnist_args.drop_centroids,
                    "Training images averaged into DROP centroids: intensity (pixels/255) or unit (normalized)")
      ->check(CLI::IsMember({"intensity", "unit"}))
      ->capture_default_str();
  mnist->add_option("--seed", mnist_args.seed, "Base seed")->capture_default_str();
  mnist->add_option("--train-size", mnist_args.train_size, "Training images per split")->capture_default_str();
  mnist->add_option("--test-size", mnist_args.test_size, "Test images per split")->capture_default_str();
  mnist->add_option("--out", mnist_args.out, "Output directory");
  mnist->add_option("--workers", mnist_args.workers, "Worker threads")->check(CLI::PositiveNumber);

  SketchArgs sketch_args;
  sketch_args.workers = workers_default;
  auto* sketch = app.add_subcommand("sketch", "Sketch one vector, or turn a DROP sketch into a sign pattern");
  sketch->add_option("--in", sketch_args.in, "Text vector file, or a ROPS DROP sketch for --mode sign")->required();
  sketch->add_option("--m", sketch_args.m, "Number of measurements (ROP rows or DROP pairs)");
  sketch->add_option("--seed", sketch_args.seed, "Ensemble seed")->capture_default_str();
  sketch->add_option("--mode", sketch_args.mode, "rop, drop or sign")
      ->required()
      ->check(CLI::IsMember({"rop", "drop", "sign"}));
  sketch->add_option("--out", sketch_args.out, "Output file; .csv gives text, anything else binary");
  sketch->add_option("--workers", sketch_args.workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (delta->parsed()) return run_delta(delta_args);
    if (disk->parsed()) return run_disk(disk_args);
    if (mnist->parsed()) return run_mnist(mnist_args);
    if (sketch->parsed()) return run_sketch(sketch_args);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << '\n';
    return kConfig;
  } catch (const FingerprintError& e) {
    std::cerr << "fingerprint error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
