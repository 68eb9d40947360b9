#include "rootdensity/cli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "rootdensity/approximator.hpp"
#include "rootdensity/batch_io.hpp"
#include "rootdensity/errors.hpp"
#include "rootdensity/parallel.hpp"
#include "rootdensity/pipeline_model.hpp"
#include "rootdensity/sweep.hpp"

namespace rootdensity::cli {

namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr std::size_t kBlock = 1 << 15;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool has_extension(const std::string& path, const char* ext) {
  return fs::path(path).extension() == ext;
}

/// Writes to <path>.partial and renames on commit; removes the partial file
/// if the run fails first.
class StagedOutput {
 public:
  explicit StagedOutput(std::string path) : final_(std::move(path)), staged_(final_ + ".partial") {}
  ~StagedOutput() {
    if (!committed_) {
      std::error_code ec;
      fs::remove(staged_, ec);
    }
  }
  const std::string& path() const noexcept { return staged_; }
  void commit() {
    std::error_code ec;
    fs::rename(staged_, final_, ec);
    if (ec) throw IoError("cannot move output into place at " + final_ + ": " + ec.message());
    committed_ = true;
  }

 private:
  std::string final_;
  std::string staged_;
  bool committed_ = false;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed on " + path);
}

void write_manifest(const RunManifest& m, const std::string& primary_output) {
  write_text_file(primary_output + ".manifest.json", m.to_json().dump(2) + "\n");
}

std::string precision_name(Precision p) { return p == Precision::kFp32 ? "fp32" : "fp64"; }

// ---------------------------------------------------------------------------

struct CommonOptions {
  std::string viewport = "-2,2,-2,2";
  std::string size = "512x512";
  std::string tone = "log1p";
  double gamma = 1.0;
  std::string palette = "grayscale";
  std::string precision = "fp64";
  int iterations = 10;
  unsigned workers = 1;
};

void add_solve_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--precision", o.precision, "fp32 or fp64")->capture_default_str();
  cmd->add_option("--iterations,-T", o.iterations, "QR iterations per level")->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)")->capture_default_str();
}

void add_image_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--viewport", o.viewport, "xmin,xmax,ymin,ymax")->capture_default_str();
  cmd->add_option("--size", o.size, "WxH pixels")->capture_default_str();
  cmd->add_option("--tone", o.tone, "linear or log1p")->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "tone-map gamma")->capture_default_str();
  cmd->add_option("--palette", o.palette, "grayscale, fire or ice")->capture_default_str();
}

SolveConfig solve_config(const CommonOptions& o) {
  SolveConfig cfg;
  cfg.iterations = o.iterations;
  cfg.precision = parse_precision(o.precision);
  cfg.validate();
  return cfg;
}

raster::ToneMap tone_map(const CommonOptions& o) {
  raster::ToneMap t;
  t.mode = raster::parse_tone_mode(o.tone);
  t.gamma = o.gamma;
  t.palette = raster::parse_palette(o.palette);
  t.validate();
  return t;
}

RunManifest base_manifest(const std::string& sub, const CommonOptions& o) {
  RunManifest m;
  m.subcommand = sub;
  m.tone = o.tone;
  m.gamma = o.gamma;
  m.palette = o.palette;
  m.precision = o.precision;
  m.iterations = o.iterations;
  m.workers = o.workers;
  return m;
}

// ---------------------------------------------------------------------------
// solve

template <typename T>
void solve_block(const std::vector<Polynomial<double>>& polys, const SolveConfig& cfg,
                 unsigned workers, std::vector<cd>& roots) {
  const std::size_t n = polys.empty() ? 0 : polys.front().degree();
  roots.assign(polys.size() * n, cd{});
  if constexpr (std::is_same_v<T, double>) {
    batch_solve_into<double>(polys, cfg, workers, roots);
  } else {
    std::vector<Polynomial<float>> narrow;
    narrow.reserve(polys.size());
    for (const auto& p : polys) narrow.push_back(p.cast<float>());
    std::vector<Complex<float>> out(roots.size());
    batch_solve_into<float>(narrow, cfg, workers, out);
    std::transform(out.begin(), out.end(), roots.begin(),
                   [](Complex<float> z) { return cd(z.real(), z.imag()); });
  }
}

class RootSink {
 public:
  RootSink(const std::string& path, std::uint32_t degree, bool text) : text_(text) {
    if (text_) {
      text_out_.open(path, std::ios::trunc);
      if (!text_out_) throw IoError("cannot open " + path + " for writing");
      degree_ = degree;
    } else {
      binary_.emplace(path, degree);
    }
  }
  void write(const std::vector<cd>& roots) {
    if (binary_) {
      binary_->write(roots);
      return;
    }
    for (std::size_t k = 0; k + degree_ <= roots.size(); k += degree_) {
      text_out_ << io::format_root_line(std::span<const cd>(roots).subspan(k, degree_)) << '\n';
      ++count_;
    }
    if (!text_out_) throw IoError("write failed on text roots output");
  }
  std::uint64_t close() {
    if (binary_) {
      binary_->close();
      return binary_->count();
    }
    text_out_.close();
    return count_;
  }

 private:
  bool text_;
  std::ofstream text_out_;
  std::optional<io::RootsWriter> binary_;
  std::uint32_t degree_ = 0;
  std::uint64_t count_ = 0;
};

int cmd_solve(const std::vector<std::string>& inputs, const std::string& family_path,
              const std::string& out_path, const CommonOptions& o, std::ostream& out) {
  if (inputs.empty() == family_path.empty()) {
    throw ConfigError("solve needs exactly one of --input or --family");
  }
  const SolveConfig cfg = solve_config(o);
  RunManifest manifest = base_manifest("solve", o);
  manifest.inputs = inputs;
  manifest.family = family_path;
  manifest.outputs = {out_path};
  manifest.validate();

  // Validate every input before any output exists.
  std::optional<std::uint32_t> degree;
  std::vector<std::vector<Polynomial<double>>> text_batches(inputs.size());
  std::optional<approx::ParametricFamily> family;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::uint32_t d = 0;
    if (has_extension(inputs[k], ".txt")) {
      text_batches[k] = io::read_text_batch(inputs[k]);
      if (text_batches[k].empty()) continue;
      d = static_cast<std::uint32_t>(text_batches[k].front().degree());
    } else {
      d = io::BatchReader(inputs[k]).header().degree;
    }
    if (degree && *degree != d) {
      throw MixedDegreeBatch("input " + inputs[k] + " has degree " + std::to_string(d) +
                             ", earlier inputs have degree " + std::to_string(*degree));
    }
    degree = d;
  }
  if (!family_path.empty()) {
    family = approx::load_family(family_path);
    degree = family->degree;
  }
  if (!degree) throw FormatError("inputs contain no polynomials");

  StagedOutput staged(out_path);
  RootSink sink(staged.path(), *degree, has_extension(out_path, ".txt"));
  std::uint64_t skipped = 0;
  auto solve_and_write = [&](const std::vector<Polynomial<double>>& polys) {
    std::vector<cd> roots;
    if (cfg.precision == Precision::kFp32) {
      solve_block<float>(polys, cfg, o.workers, roots);
    } else {
      solve_block<double>(polys, cfg, o.workers, roots);
    }
    sink.write(roots);
  };

  if (family) {
    const std::uint64_t total = family->sample_count();
    for (std::uint64_t b = 0; b < total; b += kBlock) {
      auto e = approx::enumerate_range(*family, b, std::min<std::uint64_t>(total, b + kBlock));
      skipped += e.skipped;
      solve_and_write(e.polys);
    }
  } else {
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (has_extension(inputs[k], ".txt")) {
        solve_and_write(text_batches[k]);
        continue;
      }
      io::BatchReader reader(inputs[k]);
      std::vector<Polynomial<double>> block;
      while (reader.remaining() > 0) {
        block.clear();
        reader.read(kBlock, block);
        solve_and_write(block);
      }
    }
  }
  const std::uint64_t count = sink.close();
  staged.commit();
  manifest.extra["polynomials"] = count;
  manifest.extra["degree"] = *degree;
  manifest.extra["skipped_samples"] = skipped;
  write_manifest(manifest, out_path);
  out << "solved " << count << " polynomials of degree " << *degree << " -> " << out_path << "\n";
  if (skipped) out << "skipped " << skipped << " samples with non-finite coefficients\n";
  return 0;
}

// ---------------------------------------------------------------------------
// render

int cmd_render(const std::string& input, const std::string& out_path, const CommonOptions& o,
               std::ostream& out) {
  const raster::Viewport vp = parse_viewport(o.viewport, o.size);
  const raster::ToneMap tone = tone_map(o);
  RunManifest manifest = base_manifest("render", o);
  manifest.inputs = {input};
  manifest.outputs = {out_path, out_path + ".stats"};
  manifest.viewport = vp;
  manifest.validate();

  raster::DensityGrid grid(vp);
  if (has_extension(input, ".txt")) {
    std::ifstream in(input);
    if (!in) throw IoError("cannot open " + input + " for reading");
    std::string line;
    std::vector<cd> roots;
    while (std::getline(in, line)) {
      roots.clear();
      std::istringstream tokens(line);
      std::string tok;
      while (tokens >> tok) {
        const auto z = io::parse_complex(tok);
        if (!z) throw FormatError(input + ": bad root '" + tok + "'");
        roots.push_back(*z);
      }
      raster::accumulate(grid, vp, roots);
    }
  } else {
    io::RootsReader reader(input);
    std::vector<cd> roots;
    for (;;) {
      roots.clear();
      if (reader.read(kBlock, roots) == 0) break;
      raster::accumulate(grid, vp, roots);
    }
  }
  const raster::Image img = raster::render(grid, tone);
  StagedOutput staged(out_path);
  raster::write_image(img, staged.path());
  staged.commit();
  const auto st = raster::stats(grid);
  write_text_file(out_path + ".stats", raster::format_stats(st));
  write_manifest(manifest, out_path);
  out << raster::format_stats(st);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& family_path, const std::string& out_path,
              const CommonOptions& o, std::ostream& out) {
  const raster::Viewport vp = parse_viewport(o.viewport, o.size);
  const raster::ToneMap tone = tone_map(o);
  const SolveConfig cfg = solve_config(o);
  RunManifest manifest = base_manifest("sweep", o);
  manifest.family = family_path;
  manifest.outputs = {out_path, out_path + ".stats"};
  manifest.viewport = vp;
  manifest.validate();

  const auto family = approx::load_family(family_path);
  SweepOptions opts{vp, cfg, o.workers};
  const SweepResult res = run_sweep(family, opts);
  const raster::Image img = raster::render(res.grid, tone);
  StagedOutput staged(out_path);
  raster::write_image(img, staged.path());
  staged.commit();
  const auto st = raster::stats(res.grid);
  const std::vector<std::string> extra{
      "samples=" + std::to_string(res.samples), "solved=" + std::to_string(res.solved),
      "skipped_samples=" + std::to_string(res.skipped)};
  write_text_file(out_path + ".stats", raster::format_stats(st, extra));
  manifest.extra["samples"] = res.samples;
  write_manifest(manifest, out_path);
  out << raster::format_stats(st, extra);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimOptions {
  unsigned degree = 6;
  unsigned iterations = 10;
  std::string variant = "wide";
  unsigned pipeline_depth = 16;
  double clock_hz = 100e6;
  std::uint64_t tasks = 0;  // 0: four pipeline windows
  unsigned fifo_depth = 16;
  unsigned fifo_drain = 1;
  unsigned cores = 1;
  std::string out;
};

int cmd_simulate(const SimOptions& s, std::ostream& out) {
  pipeline::PipelineConfig cfg;
  cfg.degree = s.degree;
  cfg.iterations = s.iterations;
  cfg.variant = pipeline::parse_variant(s.variant);
  cfg.pipeline_depth = s.pipeline_depth;
  cfg.clock_hz = s.clock_hz;
  cfg.fifo_depth = s.fifo_depth;
  cfg.fifo_drain_per_cycle = s.fifo_drain;
  cfg.core_count = s.cores;
  cfg.validate();
  const std::uint64_t tasks =
      s.tasks ? s.tasks : std::uint64_t{4} * cfg.pipeline_depth * cfg.core_count;
  const auto report = pipeline::simulate(cfg, tasks);
  const std::string text = pipeline::format_report(cfg, report) +
                           "model_throughput_per_s=" + fmt(pipeline::throughput_model(cfg)) + "\n";
  out << text;
  if (!s.out.empty()) {
    write_text_file(s.out, text);
    RunManifest m;
    m.subcommand = "simulate";
    m.outputs = {s.out};
    m.iterations = static_cast<int>(s.iterations);
    m.extra = {{"degree", s.degree},     {"variant", s.variant},
               {"pipeline_depth", s.pipeline_depth}, {"clock_hz", s.clock_hz},
               {"tasks", tasks},         {"fifo_depth", s.fifo_depth},
               {"fifo_drain", s.fifo_drain}, {"cores", s.cores}};
    write_manifest(m, s.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench

std::vector<Polynomial<double>> random_polys(std::uint64_t count, unsigned degree,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Polynomial<double>> polys;
  polys.reserve(count);
  std::vector<cd> roots(degree);
  for (std::uint64_t k = 0; k < count; ++k) {
    for (auto& r : roots) {
      do {
        r = cd(u(rng), u(rng));
      } while (std::abs(r) > 2.0);
    }
    polys.push_back(from_roots(roots));
  }
  return polys;
}

std::uint64_t checksum(const std::vector<cd>& roots) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& z : roots) {
    for (double v : {z.real(), z.imag()}) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
  }
  return h;
}

int cmd_bench(std::uint64_t batch, unsigned degree, std::uint64_t seed, const std::string& out_path,
              const CommonOptions& o, std::ostream& out) {
  const SolveConfig cfg = solve_config(o);
  if (degree < 1) throw ConfigError("degree must be >= 1");
  const unsigned workers = resolve_workers(o.workers);
  std::ostringstream rep;
  rep << "batch=" << batch << "\n"
      << "degree=" << degree << "\n"
      << "precision=" << precision_name(cfg.precision) << "\n"
      << "workers=" << workers << "\n"
      << "iterations=" << cfg.iterations << "\n";
  if (batch > 0) {
    const auto polys = random_polys(batch, degree, seed);
    FlopCounter flops;
    if (cfg.precision == Precision::kFp32) {
      solve_roots(polys.front().cast<float>(), cfg, &flops);
    } else {
      solve_roots(polys.front(), cfg, &flops);
    }
    std::vector<cd> roots;
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.precision == Precision::kFp32) {
      solve_block<float>(polys, cfg, workers, roots);
    } else {
      solve_block<double>(polys, cfg, workers, roots);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double per_s = secs > 0 ? static_cast<double>(batch) / secs : 0.0;
    rep << "seconds=" << fmt(secs) << "\n"
        << "throughput_per_s=" << fmt(per_s) << "\n"
        << "flop_per_poly=" << flops.flops << "\n"
        << "implied_gflops=" << fmt(per_s * static_cast<double>(flops.flops) / 1e9) << "\n"
        << "roots_checksum=" << std::hex << checksum(roots) << std::dec << "\n";
  }
  namespace ref = pipeline::reference;
  rep << "# reference figures (context only, not compared)\n"
      << "ref_fpga_throughput_per_s=" << fmt(ref::kFpgaThroughput) << "\n"
      << "ref_fpga_gflops=" << fmt(ref::kFpgaGflops) << "\n"
      << "ref_fpga_flop_per_poly=" << fmt(ref::kFpgaGflops * 1e9 / ref::kFpgaThroughput) << "\n"
      << "ref_cpu_throughput_per_s=" << fmt(ref::kCpuThroughput) << "\n"
      << "ref_cpu_gflops=" << fmt(ref::kCpuGflops) << "\n"
      << "ref_gpu_throughput_per_s=" << fmt(ref::kGpuThroughput) << "\n";
  out << rep.str();
  if (!out_path.empty()) {
    write_text_file(out_path, rep.str());
    RunManifest m = base_manifest("bench", o);
    m.seed = seed;
    m.outputs = {out_path};
    m.extra = {{"batch", batch}, {"degree", degree}};
    write_manifest(m, out_path);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// approximate

struct ApproxOptions {
  std::string function = "sin";
  std::string domain = "-4,4,-4,4";
  std::string cells = "16x16";
  unsigned degree = 5;
  unsigned oversample = 2;
  double eps = 1e-6;
  std::string out;
};

std::pair<unsigned, unsigned> parse_dims(const std::string& s, const char* what) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ConfigError(std::string(what) + " must look like WxH");
  unsigned a = 0, b = 0;
  const auto r1 = std::from_chars(s.data(), s.data() + x, a);
  const auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), b);
  if (r1.ec != std::errc{} || r1.ptr != s.data() + x || r2.ec != std::errc{} ||
      r2.ptr != s.data() + s.size() || a < 1 || b < 1) {
    throw ConfigError(std::string("bad ") + what + " '" + s + "'");
  }
  return {a, b};
}

int cmd_approximate(const ApproxOptions& a, const CommonOptions& o, std::ostream& out) {
  const raster::Viewport bounds = parse_viewport(a.domain, "1x1");
  const auto [cx, cy] = parse_dims(a.cells, "--cells");
  approx::DomainPartition part{{bounds.x_min, bounds.x_max, bounds.y_min, bounds.y_max}, cx, cy};
  part.validate();
  if (!(a.eps > 0)) throw ConfigError("--eps must be > 0");
  const auto f = approx::make_function(a.function);
  const auto fit = approx::approximate_domain(f, part, a.degree, a.oversample, a.eps, o.workers);

  RunManifest m = base_manifest("approximate", o);
  m.outputs = {a.out};
  m.extra = {{"function", a.function}, {"domain", a.domain}, {"cells", a.cells},
             {"degree", a.degree},     {"oversample", a.oversample}, {"eps", a.eps}};
  m.validate();
  StagedOutput staged(a.out);
  {
    io::BatchWriter w(staged.path(), a.degree, Precision::kFp64);
    for (const auto& r : fit.accepted) w.write(r.poly);
    w.close();
  }
  staged.commit();
  m.extra["accepted"] = fit.accepted.size();
  m.extra["rejected"] = fit.rejected;
  m.extra["degenerate"] = fit.degenerate;
  write_manifest(m, a.out);
  out << "accepted=" << fit.accepted.size() << "\nrejected=" << fit.rejected
      << "\ndegenerate=" << fit.degenerate << "\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

void RunManifest::validate() const {
  if (subcommand.empty()) throw ConfigError("manifest lacks a subcommand");
  viewport.validate();
  if (!(gamma > 0)) throw ConfigError("gamma must be > 0");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  parse_precision(precision);
  raster::parse_tone_mode(tone);
  raster::parse_palette(palette);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "rootdensity";
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["inputs"] = inputs;
  j["family"] = family;
  j["outputs"] = outputs;
  j["viewport"] = {{"x_min", viewport.x_min}, {"x_max", viewport.x_max},
                   {"y_min", viewport.y_min}, {"y_max", viewport.y_max}};
  j["size"] = {{"width", viewport.width}, {"height", viewport.height}};
  j["tone"] = tone;
  j["gamma"] = gamma;
  j["palette"] = palette;
  j["precision"] = precision;
  j["iterations"] = iterations;
  j["workers"] = workers;
  j["seed"] = seed;
  j["extra"] = extra;
  return j;
}

raster::Viewport parse_viewport(const std::string& bounds, const std::string& size) {
  raster::Viewport v;
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= bounds.size()) {
    const auto comma = bounds.find(',', start);
    const std::string tok =
        bounds.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double d = 0;
    const char* b = tok.data();
    if (!tok.empty() && tok.front() == '+') ++b;
    const auto res = std::from_chars(b, tok.data() + tok.size(), d);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ConfigError("bad viewport component '" + tok + "'");
    }
    vals.push_back(d);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (vals.size() != 4) throw ConfigError("viewport needs xmin,xmax,ymin,ymax");
  v.x_min = vals[0];
  v.x_max = vals[1];
  v.y_min = vals[2];
  v.y_max = vals[3];
  const auto [w, h] = parse_dims(size, "--size");
  v.width = w;
  v.height = h;
  v.validate();
  return v;
}

Precision parse_precision(const std::string& s) {
  if (s == "fp32") return Precision::kFp32;
  if (s == "fp64") return Precision::kFp64;
  throw ConfigError("unknown precision '" + s + "' (expected fp32 or fp64)");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Batch polynomial root solver and root-density plotter", "rootdensity"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<std::string> inputs;
  std::string family, out_path;

  auto* solve = app.add_subcommand("solve", "solve a polynomial batch or family into a roots file");
  solve->add_option("--input", inputs, "CPLY batch or .txt batch (repeatable)");
  solve->add_option("--family", family, "family definition file");
  solve->add_option("--out", out_path, "roots output (.txt for text, else CRTS)")->required();
  add_solve_options(solve, common);

  std::string render_input;
  auto* render = app.add_subcommand("render", "render a roots file as a density image");
  render->add_option("--input", render_input, "CRTS roots file or .txt roots")->required();
  render->add_option("--out", out_path, "PGM/PPM output")->required();
  add_image_options(render, common);

  auto* sweep = app.add_subcommand("sweep", "enumerate, solve and render a family in one pass");
  sweep->add_option("--family", family, "family definition file")->required();
  sweep->add_option("--out", out_path, "PGM/PPM output")->required();
  add_image_options(sweep, common);
  add_solve_options(sweep, common);

  SimOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run the pipeline cycle model");
  simulate->add_option("--degree,-n", sim.degree)->capture_default_str();
  simulate->add_option("--iterations,-T", sim.iterations)->capture_default_str();
  simulate->add_option("--variant", sim.variant, "wide or narrow")->capture_default_str();
  simulate->add_option("--pipeline-depth", sim.pipeline_depth)->capture_default_str();
  simulate->add_option("--clock-hz", sim.clock_hz)->capture_default_str();
  simulate->add_option("--tasks", sim.tasks, "tasks to stream (0 = 4 pipeline windows)");
  simulate->add_option("--fifo-depth", sim.fifo_depth)->capture_default_str();
  simulate->add_option("--fifo-drain", sim.fifo_drain)->capture_default_str();
  simulate->add_option("--cores", sim.cores)->capture_default_str();
  simulate->add_option("--out", sim.out, "also write the report here");

  std::uint64_t batch = 100000, seed = 1;
  unsigned bench_degree = 6;
  auto* bench = app.add_subcommand("bench", "measure host solver throughput");
  bench->add_option("--batch", batch)->capture_default_str();
  bench->add_option("--degree,-n", bench_degree)->capture_default_str();
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("--out", out_path, "also write the report here");
  add_solve_options(bench, common);

  ApproxOptions ap;
  auto* approximate = app.add_subcommand("approximate", "fit a function cell by cell into a CPLY batch");
  approximate->add_option("--function", ap.function, "built-in name or expression in z")->capture_default_str();
  approximate->add_option("--domain", ap.domain, "xmin,xmax,ymin,ymax")->capture_default_str();
  approximate->add_option("--cells", ap.cells, "CxR partition")->capture_default_str();
  approximate->add_option("--degree,-n", ap.degree)->capture_default_str();
  approximate->add_option("--oversample", ap.oversample)->capture_default_str();
  approximate->add_option("--eps", ap.eps)->capture_default_str();
  approximate->add_option("--out", ap.out, "CPLY output")->required();
  approximate->add_option("--workers", common.workers)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (solve->parsed()) return cmd_solve(inputs, family, out_path, common, out);
    if (render->parsed()) return cmd_render(render_input, out_path, common, out);
    if (sweep->parsed()) return cmd_sweep(family, out_path, common, out);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (bench->parsed()) return cmd_bench(batch, bench_degree, seed, out_path, common, out);
    if (approximate->parsed()) {
      ap.out = ap.out.empty() ? out_path : ap.out;
      return cmd_approximate(ap, common, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  }
  return static_cast<int>(ExitCode::kConfig);
}

}  // namespace rootdensity::cli
