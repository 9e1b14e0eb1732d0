// Batch CLI for clustered-multitask hyperspectral unmixing experiments.
// Subcommands: synth, cluster, unmix, eval, sweep, info.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/fcm.hpp"
#include "unmix/graph.hpp"
#include "unmix/init.hpp"
#include "unmix/io.hpp"
#include "unmix/kernels.hpp"
#include "unmix/metrics.hpp"
#include "unmix/parallel.hpp"
#include "unmix/rng.hpp"
#include "unmix/solver.hpp"
#include "unmix/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace unmix;

namespace {

constexpr const char* kVersion = "0.1.0";

#ifndef UNMIX_DATA_DIR
#define UNMIX_DATA_DIR "data"
#endif

std::string default_library_path() {
  if (const char* env = std::getenv("UNMIX_LIBRARY")) return env;
  return std::string(UNMIX_DATA_DIR) + "/standin_library.csv";
}

// ---------------------------------------------------------------- utilities

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash missing file " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_json_atomic(const std::string& path, const json& j) {
  io::write_text_atomic(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw unmix::ParseError(path + ": " + e.what());
  }
  return j;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
  return buf;
}

// Output directory: explicit -o wins, otherwise a timestamp+seed directory
// under $UNMIX_OUT_DIR (default ./runs).
std::string resolve_out_dir(const std::string& explicit_dir,
                            const std::string& command, std::uint64_t seed) {
  if (!explicit_dir.empty()) return explicit_dir;
  std::string root = "runs";
  if (const char* env = std::getenv("UNMIX_OUT_DIR")) root = env;
  return root + "/" + command + "-" + timestamp() + "-seed" +
         std::to_string(seed);
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) {
    throw ArgumentError("--size wants WIDTHxHEIGHT, got '" + s + "'");
  }
  try {
    const std::size_t w = std::stoul(s.substr(0, x));
    const std::size_t h = std::stoul(s.substr(x + 1));
    if (w == 0 || h == 0) throw ArgumentError("--size must be positive");
    return {w, h};
  } catch (const ArgumentError&) {
    throw;
  } catch (const std::exception&) {
    throw ArgumentError("--size wants WIDTHxHEIGHT, got '" + s + "'");
  }
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    if (cell == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      try {
        out.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ArgumentError("cannot parse number '" + cell + "'");
      }
    }
  }
  if (out.empty()) throw ArgumentError("empty list '" + s + "'");
  return out;
}

// "2:10" (inclusive) or "2,3,4".
std::vector<std::size_t> parse_range(const std::string& s) {
  std::vector<std::size_t> out;
  const auto colon = s.find(':');
  try {
    if (colon != std::string::npos) {
      const std::size_t lo = std::stoul(s.substr(0, colon));
      const std::size_t hi = std::stoul(s.substr(colon + 1));
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      std::stringstream ss(s);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(std::stoul(cell));
      }
    }
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse range '" + s + "'");
  }
  if (out.empty()) throw ArgumentError("empty range '" + s + "'");
  return out;
}

// Derived per-job seeds: splittable stream keyed by (base seed, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return Rng(base).derive(index).next_u64();
}

// ------------------------------------------------------------ scene bundles

struct SceneBundle {
  HsiCube cube;
  std::optional<Matrix> clean;
  std::optional<Matrix> a_true;
  std::optional<Matrix> s_true;
  json meta;
};

void write_scene_bundle(const std::string& dir, const synth::Scene& scene,
                        const synth::SynthSpec& spec,
                        const std::string& library_path) {
  fs::create_directories(dir);
  io::write_matrix(dir + "/Y.mtx", scene.noisy.data());
  io::write_matrix(dir + "/clean.mtx", scene.clean.data());
  io::write_matrix(dir + "/A_true.mtx", scene.a_true.data());
  io::write_matrix(dir + "/S_true.mtx", scene.s_true.data());

  json meta;
  meta["type"] = "scene";
  meta["width"] = spec.width;
  meta["height"] = spec.height;
  meta["bands"] = scene.noisy.bands();
  meta["endmembers"] = spec.endmembers;
  meta["block_size"] = spec.block_size;
  meta["filter_size"] = spec.filter_size;
  meta["purity_threshold"] = spec.purity_threshold;
  if (std::isinf(spec.snr_db)) {
    meta["snr_db"] = "inf";
  } else {
    meta["snr_db"] = spec.snr_db;
  }
  meta["seed"] = spec.seed;
  meta["library"] = library_path;
  meta["endmember_names"] = scene.endmember_names;
  meta["library_indices"] = scene.library_indices;
  write_json_atomic(dir + "/scene.json", meta);
}

SceneBundle read_scene_bundle(const std::string& dir) {
  const json meta = read_json(dir + "/scene.json");
  Matrix y = io::read_matrix(dir + "/Y.mtx");
  SceneBundle b{HsiCube(std::move(y), meta.at("width").get<std::size_t>(),
                        meta.at("height").get<std::size_t>()),
                std::nullopt, std::nullopt, std::nullopt, meta};
  if (fs::exists(dir + "/clean.mtx")) {
    b.clean = io::read_matrix(dir + "/clean.mtx");
  }
  if (fs::exists(dir + "/A_true.mtx")) {
    b.a_true = io::read_matrix(dir + "/A_true.mtx");
  }
  if (fs::exists(dir + "/S_true.mtx")) {
    b.s_true = io::read_matrix(dir + "/S_true.mtx");
  }
  return b;
}

// Accepts a scene bundle directory, an ENVI header, or a raw matrix file.
SceneBundle load_input(const std::string& path, const std::string& band_preset,
                       double scale, std::size_t width, std::size_t height) {
  if (fs::is_directory(path)) return read_scene_bundle(path);
  if (!fs::exists(path)) throw IoError("input not found: " + path);
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".hdr") {
    std::size_t clamped = 0;
    HsiCube cube = io::read_envi(path, scale, &clamped);
    if (clamped > 0) {
      std::cerr << "note: clamped " << clamped << " negative values to 0\n";
    }
    if (band_preset != "none") {
      cube = io::apply_band_removal(cube, io::preset_by_name(band_preset));
    }
    json meta;
    meta["type"] = "envi";
    meta["source"] = path;
    meta["band_preset"] = band_preset;
    return SceneBundle{std::move(cube), std::nullopt, std::nullopt,
                       std::nullopt, std::move(meta)};
  }
  if (ext == ".mtx") {
    if (width == 0 || height == 0) {
      throw ArgumentError("raw matrix input needs --width and --height");
    }
    Matrix m = io::read_matrix(path);
    json meta;
    meta["type"] = "matrix";
    meta["source"] = path;
    return SceneBundle{HsiCube(std::move(m), width, height), std::nullopt,
                       std::nullopt, std::nullopt, std::move(meta)};
  }
  throw ArgumentError("unrecognized input '" + path +
                      "' (want a scene directory, .hdr, or .mtx)");
}

json config_json(const SolverConfig& cfg, solver::Variant variant) {
  json j;
  j["variant"] = solver::variant_name(variant);
  j["mu"] = cfg.mu;
  j["eta"] = cfg.eta;
  j["lambda_mode"] =
      cfg.lambda_mode == LambdaMode::automatic ? "auto" : "fixed";
  if (cfg.lambda_mode == LambdaMode::fixed) j["lambda_fixed"] = cfg.lambda_fixed;
  j["q"] = cfg.q;
  j["max_iter"] = cfg.max_iter;
  j["epsilon"] = cfg.epsilon;
  j["clusters"] = cfg.clusters;
  j["connectivity"] = cfg.connectivity;
  j["gradient_sign"] = cfg.gradient_sign == GradientSign::descent_consistent
                           ? "descent"
                           : "paper";
  j["seed"] = cfg.seed;
  j["sparsity_floor"] = cfg.sparsity_floor;
  return j;
}

// Run manifest: command echo, input digests, outputs, timings. Timings live
// here and only here so the result files stay byte-reproducible.
struct ManifestBuilder {
  json j;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  ManifestBuilder(const std::string& command, std::uint64_t seed) {
    j["tool"] = "unmix";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["kernels"] = kernels::isa_name(kernels::active_isa());
    j["inputs"] = json::object();
    j["outputs"] = json::array();
  }

  void add_input(const std::string& path) {
    j["inputs"][path] = hex64(fnv1a64_file(path));
  }
  void add_output(const std::string& path) { j["outputs"].push_back(path); }

  void write(const std::string& dir, double extra_seconds = -1.0) {
    const auto end = std::chrono::steady_clock::now();
    json timings;
    timings["wall_seconds"] = std::chrono::duration<double>(end - start).count();
    if (extra_seconds >= 0.0) timings["solver_seconds"] = extra_seconds;
    j["timings"] = timings;
    write_json_atomic(dir + "/manifest.json", j);
  }
};

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string size = "64x64";
  std::size_t endmembers = 6;
  std::string snr = "25";
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string library = default_library_path();
  std::size_t block_size = 8;
  std::size_t filter_size = 7;
  double purity = 0.8;
  std::string out;
};

int cmd_synth(const SynthArgs& a, const std::string& cmdline) {
  const auto [w, h] = parse_size(a.size);
  const auto snrs = parse_double_list(a.snr);
  if (a.runs < 1) throw ArgumentError("--runs must be >= 1");
  if (a.endmembers < 1) throw ArgumentError("--endmembers must be >= 1");

  const auto library = synth::load_library(a.library);
  const std::string out = resolve_out_dir(a.out, "synth", a.seed);
  fs::create_directories(out);

  ManifestBuilder manifest(cmdline, a.seed);
  manifest.add_input(a.library);

  synth::SynthSpec spec;
  spec.width = w;
  spec.height = h;
  spec.endmembers = a.endmembers;
  spec.block_size = a.block_size;
  spec.filter_size = a.filter_size;
  spec.purity_threshold = a.purity;

  const bool single = a.runs == 1 && snrs.size() == 1;
  json index;
  index["scenes"] = json::array();
  std::size_t idx = 0;
  for (std::size_t run = 0; run < a.runs; ++run) {
    for (const double snr : snrs) {
      spec.snr_db = snr;
      spec.seed = single ? a.seed : derive_seed(a.seed, idx);
      const auto scene = synth::generate_scene(spec, library);
      std::string dir = out;
      if (!single) {
        char name[64];
        std::snprintf(name, sizeof(name), "run%03zu_snr%g", run, snr);
        dir = out + "/" + name;
      }
      write_scene_bundle(dir, scene, spec, a.library);
      manifest.add_output(dir + "/scene.json");
      json entry;
      entry["dir"] = dir;
      entry["run"] = run;
      entry["snr_db"] = std::isinf(snr) ? json("inf") : json(snr);
      entry["seed"] = spec.seed;
      index["scenes"].push_back(entry);
      ++idx;
    }
  }
  if (!single) write_json_atomic(out + "/index.json", index);
  manifest.write(out);
  std::cout << out << "\n";
  return 0;
}

// ------------------------------------------------------------------ cluster

struct ClusterArgs {
  std::string input;
  std::size_t clusters = 6;
  double fuzzifier = 2.0;
  double tol = 1e-5;
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string band_preset = "none";
  double scale = 0.0;
  std::size_t width = 0, height = 0;
  std::string out;
};

int cmd_cluster(const ClusterArgs& a, const std::string& cmdline) {
  const auto bundle = load_input(a.input, a.band_preset, a.scale, a.width, a.height);
  const std::string out = resolve_out_dir(a.out, "cluster", a.seed);
  fs::create_directories(out);

  ManifestBuilder manifest(cmdline, a.seed);

  fcm::FcmOptions opts;
  opts.fuzzifier = a.fuzzifier;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.seed = a.seed;
  opts.threads = a.threads;
  const auto res = fcm::fcm_cluster(bundle.cube, a.clusters, opts);

  fcm::write_label_csv(res.labels, bundle.cube.width(), bundle.cube.height(),
                       out + "/labels.csv");
  fcm::write_label_pgm(res.labels, bundle.cube.width(), bundle.cube.height(),
                       a.clusters, out + "/labels.pgm");
  io::write_matrix(out + "/membership.mtx", res.membership);
  io::write_matrix(out + "/centers.mtx", res.centers);

  json rep;
  rep["clusters"] = a.clusters;
  rep["fuzzifier"] = a.fuzzifier;
  rep["tol"] = a.tol;
  rep["seed"] = a.seed;
  rep["iterations"] = res.iterations;
  rep["final_shift"] = res.final_shift;
  rep["objective_history"] = res.objective_history;
  rep["warnings"] = res.warnings;
  write_json_atomic(out + "/fcm.json", rep);

  for (const char* f : {"/labels.csv", "/labels.pgm", "/membership.mtx",
                        "/centers.mtx", "/fcm.json"}) {
    manifest.add_output(out + f);
  }
  manifest.write(out);
  std::cout << out << "\n";
  return 0;
}

// -------------------------------------------------------------------- unmix

struct UnmixArgs {
  std::string input;
  std::string variant = "proposed";
  std::string init = "vca-fcls";
  SolverConfig cfg;
  double lambda = -1.0;  // <0 = automatic
  std::size_t endmembers_flag = 0;
  int threads = 1;
  std::string labels_file;
  bool dump_graph = false;
  std::string band_preset = "none";
  double scale = 0.0;
  std::size_t width = 0, height = 0;
  std::string out;
};

int cmd_unmix(const UnmixArgs& a, const std::string& cmdline) {
  const auto variant = solver::variant_from_name(a.variant);
  SolverConfig cfg = a.cfg;
  if (a.lambda >= 0.0) {
    cfg.lambda_mode = LambdaMode::fixed;
    cfg.lambda_fixed = a.lambda;
  }
  cfg.validate();

  const auto bundle = load_input(a.input, a.band_preset, a.scale, a.width, a.height);
  std::size_t endmembers = a.endmembers_flag;
  if (endmembers == 0 && bundle.meta.contains("endmembers")) {
    endmembers = bundle.meta.at("endmembers").get<std::size_t>();
  }
  if (endmembers == 0) {
    throw ArgumentError(
        "cannot infer the endmember count; pass --endmembers");
  }

  const std::string out = resolve_out_dir(a.out, "unmix", cfg.seed);
  fs::create_directories(out);
  ManifestBuilder manifest(cmdline, cfg.seed);
  if (fs::is_directory(a.input)) {
    manifest.add_input(a.input + "/Y.mtx");
  } else {
    manifest.add_input(a.input);
  }

  Matrix a0, s0;
  if (a.init == "vca-fcls") {
    const auto sig = init::vca(bundle.cube, endmembers, cfg.seed);
    a0 = sig.data();
    s0 = init::fcls(bundle.cube, sig, a.threads).data();
  } else if (a.init == "random") {
    const auto [sig, ab] = init::random_init(bundle.cube.bands(), endmembers,
                                             bundle.cube.pixels(), cfg.seed);
    a0 = sig.data();
    s0 = ab.data();
  } else {
    throw ArgumentError("--init must be vca-fcls or random");
  }

  solver::RunOptions opts;
  opts.threads = a.threads;
  if (!a.labels_file.empty()) {
    opts.labels = fcm::read_labels_csv(a.labels_file, bundle.cube.pixels());
  }

  const auto res = solver::run(bundle.cube, cfg, variant, a0, s0, opts);

  io::write_matrix(out + "/A.mtx", res.state.a);
  io::write_matrix(out + "/S.mtx", res.state.s);
  manifest.add_output(out + "/A.mtx");
  manifest.add_output(out + "/S.mtx");

  // One grayscale abundance map per endmember.
  std::vector<double> plane(bundle.cube.pixels());
  for (std::size_t j = 0; j < res.state.s.rows(); ++j) {
    for (std::size_t k = 0; k < bundle.cube.pixels(); ++k) {
      plane[k] = res.state.s(j, k);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "/abund_%02zu.pgm", j);
    io::write_pgm(out + name, plane.data(), bundle.cube.width(),
                  bundle.cube.height(), 0.0, 1.0);
    manifest.add_output(out + name);
  }

  if (a.dump_graph && res.report.config.eta > 0.0) {
    const auto g = graph::build(bundle.cube, cfg.connectivity);
    graph::dump_csv(g, out + "/graph.csv");
    manifest.add_output(out + "/graph.csv");
  }

  json rep;
  rep["config"] = config_json(res.report.config, variant);
  rep["lambda_used"] = res.report.lambda_used;
  rep["iterations"] = res.report.iterations;
  rep["stopped_by"] =
      res.report.stopped_by == solver::StoppedBy::tolerance ? "tolerance"
                                                            : "max_iter";
  rep["cost_history"] = res.report.cost_history;
  rep["warnings"] = res.report.warnings;

  // Per-endmember metrics when the bundle carries ground truth.
  if (bundle.a_true && bundle.s_true) {
    const auto eval =
        metrics::evaluate(*bundle.a_true, *bundle.s_true, res.state.a,
                          res.state.s, bundle.cube.data());
    json m;
    m["per_endmember_sad"] = eval.per_endmember_sad;
    m["matching"] = eval.matching;
    m["rms_sad"] = eval.rms_sad;
    m["mean_aad"] = eval.mean_aad;
    m["rms_aad"] = eval.rms_aad;
    m["re"] = eval.re;
    rep["ground_truth_eval"] = m;
  }
  write_json_atomic(out + "/report.json", rep);
  manifest.add_output(out + "/report.json");
  manifest.write(out, res.report.wall_seconds);
  std::cout << out << "\n";
  return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string estimate;
  std::string truth;
  std::string mc;
  std::string out;
};

json eval_pair(const std::string& estimate_dir, const std::string& truth_dir) {
  const Matrix a_hat = io::read_matrix(estimate_dir + "/A.mtx");
  const Matrix s_hat = io::read_matrix(estimate_dir + "/S.mtx");
  const auto truth = read_scene_bundle(truth_dir);
  if (!truth.a_true || !truth.s_true) {
    throw ArgumentError("truth bundle " + truth_dir + " lacks A_true/S_true");
  }
  const auto rep = metrics::evaluate(*truth.a_true, *truth.s_true, a_hat,
                                     s_hat, truth.cube.data());
  json j;
  j["estimate"] = estimate_dir;
  j["truth"] = truth_dir;
  if (truth.meta.contains("snr_db")) j["snr_db"] = truth.meta.at("snr_db");
  j["per_endmember_sad"] = rep.per_endmember_sad;
  j["matching"] = rep.matching;
  j["rms_sad"] = rep.rms_sad;
  j["mean_aad"] = rep.mean_aad;
  j["rms_aad"] = rep.rms_aad;
  j["re"] = rep.re;
  if (truth.meta.contains("endmember_names")) {
    j["endmember_names"] = truth.meta.at("endmember_names");
  }
  return j;
}

void write_eval_table(const std::string& path, const json& e) {
  // Mirrors the result-table layout: one material row, then rmsSAD and RE.
  std::ostringstream out;
  out << "material,sad\n";
  const auto& sads = e.at("per_endmember_sad");
  std::vector<std::string> names;
  if (e.contains("endmember_names")) {
    for (const auto& n : e.at("endmember_names")) {
      names.push_back(n.get<std::string>());
    }
  }
  const auto& matching = e.at("matching");
  for (std::size_t i = 0; i < sads.size(); ++i) {
    const std::size_t true_idx = matching[i].get<std::size_t>();
    const std::string name = true_idx < names.size()
                                 ? names[true_idx]
                                 : "endmember_" + std::to_string(true_idx);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", sads[i].get<double>());
    out << name << ',' << buf << '\n';
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", e.at("rms_sad").get<double>());
  out << "rmsSAD," << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.4f", e.at("re").get<double>());
  out << "RE," << buf << '\n';
  io::write_text_atomic(path, out.str());
}

int cmd_eval(const EvalArgs& a, const std::string& cmdline) {
  if (!a.mc.empty()) {
    // Monte-Carlo aggregation: gather eval.json files, group by SNR, emit
    // mean/std series per metric (the SNR-sweep figure's data).
    std::vector<json> evals;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(a.mc)) {
      if (entry.path().filename() == "eval.json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) evals.push_back(read_json(f.string()));
    if (evals.empty()) throw ArgumentError("no eval.json files under " + a.mc);

    const std::string out = resolve_out_dir(a.out, "eval", 0);
    fs::create_directories(out);

    std::map<double, std::map<std::string, std::vector<double>>> by_snr;
    for (const auto& e : evals) {
      double snr = std::numeric_limits<double>::infinity();
      if (e.contains("snr_db") && e.at("snr_db").is_number()) {
        snr = e.at("snr_db").get<double>();
      }
      by_snr[snr]["RE"].push_back(e.at("re").get<double>());
      by_snr[snr]["meanAAD"].push_back(e.at("mean_aad").get<double>());
      by_snr[snr]["rmsAAD"].push_back(e.at("rms_aad").get<double>());
      by_snr[snr]["rmsSAD"].push_back(e.at("rms_sad").get<double>());
    }
    std::ostringstream csv;
    csv << "series,x,y,std\n";
    json agg;
    for (const auto& [snr, metric_map] : by_snr) {
      for (const auto& [name, vals] : metric_map) {
        double mean = 0.0;
        for (const double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (const double v : vals) var += (v - mean) * (v - mean);
        // Sample std; the "variance (in percent)" table column is this
        // value x100, labeled explicitly.
        const double sd = vals.size() > 1
                              ? std::sqrt(var / static_cast<double>(vals.size() - 1))
                              : 0.0;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%s,%g,%.6f,%.6f\n", name.c_str(), snr,
                      mean, sd);
        csv << buf;
        json cell;
        cell["mean"] = mean;
        cell["std"] = sd;
        cell["std_percent"] = sd * 100.0;
        cell["runs"] = vals.size();
        agg[name][std::to_string(snr)] = cell;
      }
    }
    io::write_text_atomic(out + "/aggregate.csv", csv.str());
    write_json_atomic(out + "/aggregate.json", agg);
    std::cout << out << "\n";
    return 0;
  }

  if (a.estimate.empty() || a.truth.empty()) {
    throw ArgumentError("eval wants --estimate and --truth (or --mc)");
  }
  const std::string out = resolve_out_dir(a.out, "eval", 0);
  fs::create_directories(out);
  ManifestBuilder manifest(cmdline, 0);
  const json e = eval_pair(a.estimate, a.truth);
  write_json_atomic(out + "/eval.json", e);
  write_eval_table(out + "/table.csv", e);
  manifest.add_output(out + "/eval.json");
  manifest.add_output(out + "/table.csv");
  manifest.write(out);
  std::cout << out << "\n";
  return 0;
}

// -------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string axis;
  std::string range;
  std::size_t runs = 1;
  std::string size = "64x64";
  std::size_t endmembers = 6;
  double snr = 25.0;
  std::string library = default_library_path();
  std::string variant = "proposed";
  SolverConfig cfg;
  int threads = 1;
  std::string out;
};

int cmd_sweep(const SweepArgs& a, const std::string& cmdline) {
  const auto values = parse_range(a.range);
  if (a.runs < 1) throw ArgumentError("--runs must be >= 1");
  if (a.axis != "clusters" && a.axis != "snr" && a.axis != "pixels") {
    throw ArgumentError("--axis must be clusters, snr or pixels");
  }
  const auto variant = solver::variant_from_name(a.variant);
  const auto [w, h] = parse_size(a.size);
  const auto library = synth::load_library(a.library);

  const std::string out = resolve_out_dir(a.out, "sweep", a.cfg.seed);
  fs::create_directories(out);
  ManifestBuilder manifest(cmdline, a.cfg.seed);
  manifest.add_input(a.library);

  struct Point {
    std::size_t value;
    std::size_t run;
    double rms_sad = 0.0, rms_aad = 0.0, re = 0.0;
  };
  std::vector<Point> points;
  for (const std::size_t v : values) {
    for (std::size_t r = 0; r < a.runs; ++r) points.push_back({v, r});
  }

  // One isolated deterministic job per (value, run) pair; the pool spreads
  // jobs, each job runs single-threaded.
  parallel_for(points.size(), a.threads, [&](std::size_t idx) {
    Point& p = points[idx];
    synth::SynthSpec spec;
    spec.width = w;
    spec.height = h;
    spec.endmembers = a.endmembers;
    spec.snr_db = a.snr;
    SolverConfig cfg = a.cfg;

    if (a.axis == "clusters") {
      // The scene depends on the run only: each run sweeps C on one scene.
      spec.seed = derive_seed(a.cfg.seed, p.run);
      cfg.clusters = p.value;
    } else if (a.axis == "snr") {
      spec.seed = derive_seed(a.cfg.seed, idx);
      spec.snr_db = static_cast<double>(p.value);
    } else {
      spec.seed = derive_seed(a.cfg.seed, idx);
      spec.width = p.value;
      spec.height = p.value;
    }
    const auto scene = synth::generate_scene(spec, library);

    cfg.seed = spec.seed;
    const auto sig = init::vca(scene.noisy, a.endmembers, cfg.seed);
    const auto s0 = init::fcls(scene.noisy, sig, 1);
    const auto res =
        solver::run(scene.noisy, cfg, variant, sig.data(), s0.data());
    const auto eval =
        metrics::evaluate(scene.a_true.data(), scene.s_true.data(),
                          res.state.a, res.state.s, scene.noisy.data());
    p.rms_sad = eval.rms_sad;
    p.rms_aad = eval.rms_aad;
    p.re = eval.re;
  });

  std::ostringstream csv;
  csv << "series,x,y,std\n";
  json series;
  for (const std::size_t v : values) {
    std::vector<double> sad, aad, re;
    for (const auto& p : points) {
      if (p.value != v) continue;
      sad.push_back(p.rms_sad);
      aad.push_back(p.rms_aad);
      re.push_back(p.re);
    }
    const auto emit = [&](const char* name, const std::vector<double>& vals) {
      double mean = 0.0;
      for (const double x : vals) mean += x;
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (const double x : vals) var += (x - mean) * (x - mean);
      const double sd = vals.size() > 1
                            ? std::sqrt(var / static_cast<double>(vals.size() - 1))
                            : 0.0;
      const double x_val = a.axis == "pixels"
                               ? static_cast<double>(v) * static_cast<double>(v)
                               : static_cast<double>(v);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s,%g,%.6f,%.6f\n", name, x_val, mean, sd);
      csv << buf;
      json cell;
      cell["mean"] = mean;
      cell["std"] = sd;
      series[name][std::to_string(v)] = cell;
    };
    emit("rmsSAD", sad);
    emit("rmsAAD", aad);
    emit("RE", re);
  }
  io::write_text_atomic(out + "/sweep.csv", csv.str());
  json meta;
  meta["axis"] = a.axis;
  meta["values"] = values;
  meta["runs"] = a.runs;
  meta["variant"] = a.variant;
  meta["config"] = config_json(a.cfg, variant);
  meta["series"] = series;
  write_json_atomic(out + "/sweep.json", meta);
  manifest.add_output(out + "/sweep.csv");
  manifest.add_output(out + "/sweep.json");
  manifest.write(out);
  std::cout << out << "\n";
  return 0;
}

// --------------------------------------------------------------------- info

int cmd_info() {
  std::cout << "unmix " << kVersion << "\n";
  std::cout << "kernels: " << kernels::isa_name(kernels::active_isa()) << "\n";
  std::cout << "default library: " << default_library_path() << "\n";
  std::cout << "band presets:\n";
  for (const auto* p : {&io::preset_cuprite(), &io::preset_urban()}) {
    std::cout << "  " << p->name << ": " << p->original_bands << " -> "
              << p->original_bands - p->removed.size() << " bands\n";
  }
  std::cout
      << "data: the packaged library is a synthetic stand-in. For real\n"
         "spectra download USGS splib07 (https://crustal.usgs.gov/speclab/)\n"
         "and convert to the library CSV layout: header\n"
         "'wavelength,<name>,...', one row per band, wavelengths in\n"
         "micrometers. Real scenes: AVIRIS Cuprite / HYDICE Urban in ENVI\n"
         "format, read with --band-preset cuprite|urban.\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered multitask spectral unmixing toolbox"};
  app.require_subcommand(1);
  const std::string cmdline = join_args(argc, argv);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic scenes");
  synth_cmd->add_option("--size", synth_args.size, "Scene size WxH");
  synth_cmd->add_option("--endmembers", synth_args.endmembers, "Endmember count");
  synth_cmd->add_option("--snr", synth_args.snr, "SNR dB list (or inf)");
  synth_cmd->add_option("--runs", synth_args.runs, "Monte-Carlo repetitions");
  synth_cmd->add_option("--seed", synth_args.seed, "Base RNG seed");
  synth_cmd->add_option("--library", synth_args.library, "Spectral library CSV");
  synth_cmd->add_option("--block-size", synth_args.block_size, "Block size");
  synth_cmd->add_option("--filter-size", synth_args.filter_size,
                        "Mean filter size (odd)");
  synth_cmd->add_option("--purity", synth_args.purity, "Purity threshold");
  synth_cmd->add_option("-o,--out", synth_args.out, "Output directory");

  ClusterArgs cluster_args;
  auto* cluster_cmd = app.add_subcommand("cluster", "FCM-cluster a scene");
  cluster_cmd->add_option("--input", cluster_args.input, "Scene bundle/.hdr/.mtx")
      ->required();
  cluster_cmd->add_option("--clusters", cluster_args.clusters, "Cluster count");
  cluster_cmd->add_option("--fuzzifier", cluster_args.fuzzifier, "FCM fuzzifier m");
  cluster_cmd->add_option("--tol", cluster_args.tol, "Center-shift tolerance");
  cluster_cmd->add_option("--max-iter", cluster_args.max_iter, "Iteration cap");
  cluster_cmd->add_option("--seed", cluster_args.seed, "RNG seed");
  cluster_cmd->add_option("--threads", cluster_args.threads, "Worker threads");
  cluster_cmd->add_option("--band-preset", cluster_args.band_preset,
                          "cuprite|urban|none");
  cluster_cmd->add_option("--scale", cluster_args.scale,
                          "Reflectance scale for uint16 ENVI data");
  cluster_cmd->add_option("--width", cluster_args.width, "Width for .mtx input");
  cluster_cmd->add_option("--height", cluster_args.height,
                          "Height for .mtx input");
  cluster_cmd->add_option("-o,--out", cluster_args.out, "Output directory");

  UnmixArgs unmix_args;
  auto* unmix_cmd = app.add_subcommand("unmix", "Run the unmixing solver");
  unmix_cmd->add_option("--input", unmix_args.input, "Scene bundle/.hdr/.mtx")
      ->required();
  unmix_cmd->add_option("--variant", unmix_args.variant,
                        "proposed|dist-sparse|dist|lq-nmf|plain-nmf");
  unmix_cmd->add_option("--init", unmix_args.init, "vca-fcls|random");
  unmix_cmd->add_option("--endmembers", unmix_args.endmembers_flag,
                        "Endmember count (inferred from scene bundles)");
  unmix_cmd->add_option("--clusters", unmix_args.cfg.clusters, "Cluster count C");
  unmix_cmd->add_option("--mu", unmix_args.cfg.mu, "Step size");
  unmix_cmd->add_option("--eta", unmix_args.cfg.eta, "Neighborhood weight");
  unmix_cmd->add_option("--q", unmix_args.cfg.q, "Sparsity exponent");
  unmix_cmd->add_option("--lambda", unmix_args.lambda,
                        "Fixed sparsity weight (omit for automatic)");
  unmix_cmd->add_option("--max-iter", unmix_args.cfg.max_iter, "Iteration cap T");
  unmix_cmd->add_option("--epsilon", unmix_args.cfg.epsilon,
                        "Stopping tolerance");
  unmix_cmd->add_option("--connectivity", unmix_args.cfg.connectivity,
                        "Grid connectivity (4|8)");
  std::string gradient_sign = "descent";
  unmix_cmd->add_option("--gradient-sign", gradient_sign, "descent|paper");
  unmix_cmd->add_option("--seed", unmix_args.cfg.seed, "RNG seed");
  unmix_cmd->add_option("--threads", unmix_args.threads, "Worker threads");
  unmix_cmd->add_option("--labels", unmix_args.labels_file,
                        "Pre-computed cluster labels CSV");
  unmix_cmd->add_flag("--dump-graph", unmix_args.dump_graph,
                      "Write adjacency/weights CSV");
  unmix_cmd->add_option("--band-preset", unmix_args.band_preset,
                        "cuprite|urban|none");
  unmix_cmd->add_option("--scale", unmix_args.scale,
                        "Reflectance scale for uint16 ENVI data");
  unmix_cmd->add_option("--width", unmix_args.width, "Width for .mtx input");
  unmix_cmd->add_option("--height", unmix_args.height, "Height for .mtx input");
  unmix_cmd->add_option("-o,--out", unmix_args.out, "Output directory");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate against ground truth");
  eval_cmd->add_option("--estimate", eval_args.estimate, "Result directory");
  eval_cmd->add_option("--truth", eval_args.truth, "Truth scene bundle");
  eval_cmd->add_option("--mc", eval_args.mc,
                       "Aggregate eval.json files under this directory");
  eval_cmd->add_option("-o,--out", eval_args.out, "Output directory");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweeps");
  sweep_cmd->add_option("--axis", sweep_args.axis, "clusters|snr|pixels")
      ->required();
  sweep_cmd->add_option("--range", sweep_args.range, "lo:hi or comma list")
      ->required();
  sweep_cmd->add_option("--runs", sweep_args.runs, "Repetitions per point");
  sweep_cmd->add_option("--size", sweep_args.size, "Scene size WxH");
  sweep_cmd->add_option("--endmembers", sweep_args.endmembers,
                        "Endmember count");
  sweep_cmd->add_option("--snr", sweep_args.snr, "SNR dB for non-snr axes");
  sweep_cmd->add_option("--library", sweep_args.library, "Spectral library CSV");
  sweep_cmd->add_option("--variant", sweep_args.variant, "Solver variant");
  sweep_cmd->add_option("--clusters", sweep_args.cfg.clusters,
                        "Cluster count for non-cluster axes");
  sweep_cmd->add_option("--mu", sweep_args.cfg.mu, "Step size");
  sweep_cmd->add_option("--eta", sweep_args.cfg.eta, "Neighborhood weight");
  sweep_cmd->add_option("--q", sweep_args.cfg.q, "Sparsity exponent");
  sweep_cmd->add_option("--max-iter", sweep_args.cfg.max_iter, "Iteration cap");
  sweep_cmd->add_option("--seed", sweep_args.cfg.seed, "Base RNG seed");
  sweep_cmd->add_option("--threads", sweep_args.threads, "Worker pool size");
  sweep_cmd->add_option("-o,--out", sweep_args.out, "Output directory");

  auto* info_cmd = app.add_subcommand("info", "Tool and dataset information");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_args, cmdline);
    if (*cluster_cmd) return cmd_cluster(cluster_args, cmdline);
    if (*unmix_cmd) {
      unmix_args.cfg.gradient_sign = gradient_sign == "paper"
                                         ? GradientSign::paper_literal
                                         : GradientSign::descent_consistent;
      return cmd_unmix(unmix_args, cmdline);
    }
    if (*eval_cmd) return cmd_eval(eval_args, cmdline);
    if (*sweep_cmd) return cmd_sweep(sweep_args, cmdline);
    if (*info_cmd) return cmd_info();
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
