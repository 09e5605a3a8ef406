// Copyright 2026 The regmosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regmosaic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "regmosaic/error.hpp"
#include "regmosaic/image_io.hpp"

namespace regmosaic {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

// Reads a configuration object, substituting defaults, and rebuilds the
// resolved object alongside.
class Config {
 public:
  Config(const Json& j, std::string what) : what_(std::move(what)) {
    if (j.is_null()) {
      j_ = Json::object();
    } else if (j.is_object()) {
      j_ = j;
    } else {
      config_error(what_ + ": expected an object");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    T v = fallback;
    if (j_.contains(key)) {
      try {
        v = j_.at(key).get<T>();
      } catch (const Json::exception&) {
        config_error(what_ + ": field '" + key + "' has the wrong type");
      }
      if constexpr (std::is_same_v<T, double>) {
        if (!j_.at(key).is_number()) config_error(what_ + ": field '" + key + "' must be a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!j_.at(key).is_number_integer()) {
          config_error(what_ + ": field '" + key + "' must be an integer");
        }
      }
    }
    resolved[key] = v;
    return v;
  }

  std::string required_string(const std::string& key) {
    if (!j_.contains(key)) config_error(what_ + ": missing field '" + key + "'");
    return get<std::string>(key, "");
  }

  // Raw access; the caller records the resolved value.
  const Json& raw(const std::string& key) {
    seen_.insert(key);
    static const Json null_json;
    return j_.contains(key) ? j_.at(key) : null_json;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) config_error(what_ + ": unknown field '" + it.key() + "'");
    }
  }

  Json resolved = Json::object();

 private:
  Json j_;
  std::string what_;
  std::set<std::string> seen_;
};

constexpr double kDeg = std::numbers::pi / 180.0;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

fs::path config_path_for(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".config.json");
  return p;
}

std::string texture_name(std::uint64_t seed, int size) {
  return "procedural:" + std::to_string(size) + "x" + std::to_string(size) +
         ":seed=" + std::to_string(seed);
}

std::vector<Algorithm> algorithms_for(const std::string& name) {
  if (name == "both") return {Algorithm::QD, Algorithm::MI};
  if (auto a = algorithm_from_string(name)) return {*a};
  config_error("unknown algorithm '" + name + "' (expected qd, mi or both)");
}

// Reads the qd / mi option blocks. MI runs must name their seed explicitly.
AlgorithmSpec read_spec(Config& cfg, Algorithm algorithm, bool need_mi) {
  AlgorithmSpec spec;
  spec.algorithm = algorithm;
  const Json& qd = cfg.raw("qd");
  const Json& mi = cfg.raw("mi");
  spec.qd = qd_options_from_json(qd.is_null() ? Json::object() : qd);
  spec.mi = mi_options_from_json(mi.is_null() ? Json::object() : mi);
  if (need_mi && (!mi.is_object() || !mi.contains("seed"))) {
    config_error("mutual-information runs need an explicit mi.seed");
  }
  cfg.resolved["qd"] = to_json(spec.qd);
  cfg.resolved["mi"] = to_json(spec.mi);
  return spec;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Homography read_truth_file(const fs::path& path) {
  const Json j = read_json(path);
  if (j.is_object() && j.contains("truth")) return homography_from_json(j.at("truth"));
  return homography_from_json(j);
}

}  // namespace

std::vector<SweepGrid> default_sweep_grids() {
  return {symmetric_grid(SweepParameter::Tx, 50, 5),   symmetric_grid(SweepParameter::Ty, 50, 5),
          symmetric_grid(SweepParameter::Scale, 0.35, 0.05),
          symmetric_grid(SweepParameter::Phi, 30, 5),  symmetric_grid(SweepParameter::Psi, 30, 5),
          symmetric_grid(SweepParameter::Alpha, 30, 5)};
}

Json run_synth(const Json& config) {
  Config cfg(config, "synth config");
  const std::string preset = cfg.get<std::string>("preset", "paper-path");
  const auto seed = cfg.get<std::uint64_t>("seed", 1);
  const int texture_size = cfg.get<int>("texture_size", 2048);
  const fs::path out_dir = cfg.required_string("output_dir");

  Json summary = Json::object();
  if (preset == "pair") {
    const int crop = cfg.get<int>("crop", 256);
    const double focal = cfg.get<double>("focal", 0.0);
    Config pc(cfg.raw("pair"), "synth pair");
    ViewpointChange v;
    v.tx = pc.get<double>("tx", 0.0);
    v.ty = pc.get<double>("ty", 0.0);
    v.tz_as_scale = pc.get<double>("scale", 1.0);
    v.phi = pc.get<double>("phi_deg", 0.0) * kDeg;
    v.psi = pc.get<double>("psi_deg", 0.0) * kDeg;
    v.alpha = pc.get<double>("alpha_deg", 0.0) * kDeg;
    pc.finish();
    cfg.resolved["pair"] = pc.resolved;
    v.focal = focal > 0.0 ? focal : crop;
    cfg.finish();

    const GrayImage ref = procedural_texture(texture_size, texture_size, seed);
    const SyntheticPair pair = make_pair(ref, v, crop);
    ensure_dir(out_dir);
    write_pgm(out_dir / "target.pgm", pair.target);
    write_pgm(out_dir / "source.pgm", pair.source);
    write_json(out_dir / "truth.json", {{"truth", to_json(pair.truth)},
                                        {"viewpoint", to_json(v)},
                                        {"source_texture", texture_name(seed, texture_size)}});
    write_json(out_dir / "config.json", cfg.resolved);
    summary["target"] = (out_dir / "target.pgm").string();
    summary["source"] = (out_dir / "source.pgm").string();
    summary["truth"] = (out_dir / "truth.json").string();
  } else {
    std::vector<PathSegment> segments;
    if (preset == "paper-path") {
      segments = paper_path_preset();
    } else if (preset == "realistic") {
      segments = realistic_path_preset();
    } else if (preset == "custom") {
      const Json& s = cfg.raw("segments");
      if (!s.is_array() || s.empty()) config_error("custom preset needs a 'segments' array");
      for (const auto& x : s) segments.push_back(path_segment_from_json(x));
    } else {
      config_error("unknown preset '" + preset + "'");
    }
    Json seg_json = Json::array();
    for (const auto& s : segments) seg_json.push_back(to_json(s));
    cfg.resolved["segments"] = seg_json;
    SequenceOptions so;
    so.frame_width = cfg.get<int>("frame_width", so.frame_width);
    so.frame_height = cfg.get<int>("frame_height", so.frame_height);
    const Json& start = cfg.raw("start");
    if (!start.is_null()) {
      if (!start.is_array() || start.size() != 2 || !start[0].is_number() || !start[1].is_number()) {
        config_error("synth config: 'start' must be [x, y]");
      }
      so.start = {start[0].get<double>(), start[1].get<double>()};
    }
    cfg.resolved["start"] = {so.start.x, so.start.y};
    so.focal = cfg.get<double>("focal", 0.0);
    cfg.finish();

    const GrayImage ref = procedural_texture(texture_size, texture_size, seed);
    const Sequence seq = make_sequence(ref, segments, so);
    const fs::path manifest =
        save_sequence(out_dir, seq, segments, texture_name(seed, texture_size));
    write_json(out_dir / "config.json", cfg.resolved);
    summary["manifest"] = manifest.string();
    summary["frames"] = seq.frames.size();
  }
  summary["config"] = cfg.resolved;
  return summary;
}

Json run_register(const Json& config) {
  Config cfg(config, "register config");
  const fs::path target_path = cfg.required_string("target");
  const fs::path source_path = cfg.required_string("source");
  const fs::path output = cfg.required_string("output");
  const std::string algo_name = cfg.get<std::string>("algorithm", "qd");
  const auto algo = algorithm_from_string(algo_name);
  if (!algo) config_error("unknown algorithm '" + algo_name + "' (expected qd or mi)");
  const AlgorithmSpec spec = read_spec(cfg, *algo, *algo == Algorithm::MI);
  Homography init;
  if (const Json& j = cfg.raw("init"); !j.is_null()) init = homography_from_json(j);
  cfg.resolved["init"] = to_json(init);
  const std::string truth_path = cfg.get<std::string>("truth", "");
  cfg.finish();

  const GrayImage target = read_image(target_path);
  const GrayImage source = read_image(source_path);
  const RegistrationResult r = spec.algorithm == Algorithm::QD
                                   ? register_qd(target, source, init, spec.qd)
                                   : register_mi(target, source, init, spec.mi);
  Json out = to_json(r);
  out["algorithm"] = to_string(spec.algorithm);
  if (!truth_path.empty()) {
    const Homography truth = read_truth_file(truth_path);
    out["error_px"] =
        mean_registration_error(truth, r.theta_hat, source.width(), source.height());
  }
  if (output.has_parent_path()) ensure_dir(output.parent_path());
  write_json(output, out);
  write_json(config_path_for(output), cfg.resolved);
  Json summary = out;
  summary["output"] = output.string();
  summary["config"] = cfg.resolved;
  return summary;
}

Json run_mosaic(const Json& config) {
  Config cfg(config, "mosaic config");
  const fs::path output = cfg.required_string("output");
  const std::string manifest_path = cfg.get<std::string>("manifest", "");
  const bool use_truth = cfg.get<bool>("use_truth", false);
  const std::string blend_name = cfg.get<std::string>("blend", "mean");
  const auto blend = blend_mode_from_string(blend_name);
  if (!blend) config_error("unknown blend mode '" + blend_name + "'");
  const int jobs = cfg.get<int>("jobs", 1);
  const std::string algo_name = cfg.get<std::string>("algorithm", "qd");
  const auto algo = algorithm_from_string(algo_name);
  if (!algo) config_error("unknown algorithm '" + algo_name + "' (expected qd or mi)");
  const AlgorithmSpec spec = read_spec(cfg, *algo, !use_truth && *algo == Algorithm::MI);

  std::vector<GrayImage> frames;
  std::vector<Homography> truths;
  const Json& frame_list = cfg.raw("frames");
  if (!manifest_path.empty()) {
    if (!frame_list.is_null()) config_error("mosaic config: give either 'manifest' or 'frames'");
    LoadedSequence seq = load_sequence(manifest_path);
    frames = std::move(seq.frames);
    truths = seq.manifest.truths;
  } else {
    if (!frame_list.is_array() || frame_list.empty()) {
      config_error("mosaic config: needs 'manifest' or a non-empty 'frames' list");
    }
    for (const auto& f : frame_list) {
      if (!f.is_string()) config_error("mosaic config: 'frames' entries must be paths");
      frames.push_back(read_image(f.get<std::string>()));
    }
    cfg.resolved["frames"] = frame_list;
  }
  if (use_truth && truths.empty() && frames.size() > 1) {
    config_error("use_truth needs a manifest with ground-truth transforms");
  }
  cfg.finish();

  const std::size_t pairs = frames.size() - 1;
  std::vector<Homography> pairwise(pairs);
  Json pair_info = Json::array();
  if (use_truth) {
    pairwise = truths;
  } else {
    const Registrar reg = make_registrar(spec);
    std::vector<RegistrationResult> results(pairs);
    std::vector<std::string> failures(pairs);
    std::vector<ErrorCode> codes(pairs, ErrorCode::InvalidArgument);
    parallel_for(pairs, jobs, [&](std::size_t k) {
      try {
        results[k] = reg(frames[k], frames[k + 1]);
      } catch (const Error& e) {
        failures[k] = e.what();
        codes[k] = e.code();
      }
    });
    for (std::size_t k = 0; k < pairs; ++k) {
      if (!failures[k].empty()) {
        throw Error(codes[k], "pair " + std::to_string(k) + " -> " + std::to_string(k + 1) +
                                  ": " + failures[k]);
      }
      pairwise[k] = results[k].theta_hat;
      Json info = {{"pair", k},
                   {"converged", results[k].converged},
                   {"iterations", results[k].iterations},
                   {"stop_reason", results[k].stop_reason}};
      if (!truths.empty()) {
        info["error_px"] = mean_registration_error(truths[k], results[k].theta_hat,
                                                   frames[k + 1].width(), frames[k + 1].height());
      }
      pair_info.push_back(info);
    }
  }
  const GlobalChain c = chain(pairwise);
  const Panorama pano = composite(frames, c, *blend, jobs);

  if (output.has_parent_path()) ensure_dir(output.parent_path());
  write_image(output, pano.canvas);
  Json sidecar = panorama_sidecar(pano, c);
  sidecar["algorithm"] = use_truth ? "truth" : to_string(spec.algorithm);
  sidecar["pairs"] = pair_info;
  if (!truths.empty()) {
    const GlobalChain truth_chain = chain(truths);
    sidecar["final_corner_drift_px"] =
        max_corner_displacement(c.globals.back(), truth_chain.globals.back(),
                                frames.back().width(), frames.back().height());
  }
  fs::path sidecar_path = output;
  sidecar_path.replace_extension(".json");
  write_json(sidecar_path, sidecar);
  write_json(config_path_for(output), cfg.resolved);

  Json summary = sidecar;
  summary.erase("globals");
  summary["output"] = output.string();
  summary["sidecar"] = sidecar_path.string();
  summary["config"] = cfg.resolved;
  return summary;
}

Json run_eval_robustness(const Json& config) {
  Config cfg(config, "robustness config");
  const fs::path out_dir = cfg.required_string("output_dir");
  const auto algos = algorithms_for(cfg.get<std::string>("algorithm", "both"));
  const bool uses_mi = std::find(algos.begin(), algos.end(), Algorithm::MI) != algos.end();
  const AlgorithmSpec base = read_spec(cfg, Algorithm::QD, uses_mi);
  const auto seeds =
      cfg.get<std::vector<std::uint64_t>>("texture_seeds", std::vector<std::uint64_t>{1, 2, 3});
  if (seeds.empty()) config_error("robustness config: 'texture_seeds' is empty");
  const int texture_size = cfg.get<int>("texture_size", 1024);
  SweepOptions so;
  so.crop = cfg.get<int>("crop", so.crop);
  so.focal = cfg.get<double>("focal", so.focal);
  so.threshold = cfg.get<double>("threshold", so.threshold);
  so.jobs = cfg.get<int>("jobs", so.jobs);
  std::vector<SweepGrid> grids;
  const Json& g = cfg.raw("grids");
  if (g.is_null()) {
    grids = default_sweep_grids();
  } else {
    if (!g.is_array() || g.empty()) config_error("robustness config: 'grids' must be a list");
    for (const auto& x : g) {
      Config gc(x, "sweep grid");
      const std::string name = gc.required_string("parameter");
      auto p = sweep_parameter_from_string(name);
      if (!p) config_error("unknown sweep parameter '" + name + "'");
      const double limit = gc.get<double>("limit", 0.0);
      const double step = gc.get<double>("step", 1.0);
      gc.finish();
      grids.push_back(symmetric_grid(*p, limit, step));
    }
  }
  Json grid_json = Json::array();
  for (const auto& sg : grids) {
    const double limit = sg.values.back();
    const double step = sg.values.size() > 1 ? sg.values.back() - sg.values[sg.values.size() - 2] : 1.0;
    grid_json.push_back({{"parameter", to_string(sg.parameter)}, {"limit", limit}, {"step", step}});
  }
  cfg.resolved["grids"] = grid_json;
  cfg.finish();

  std::vector<GrayImage> textures;
  for (auto s : seeds) textures.push_back(procedural_texture(texture_size, texture_size, s));
  ensure_dir(out_dir);
  Json tables = Json::array();
  for (Algorithm a : algos) {
    AlgorithmSpec spec = base;
    spec.algorithm = a;
    const RobustnessTable t = robustness_sweep(make_registrar(spec), to_string(a), textures, grids, so);
    std::ostringstream csv;
    write_sweep_csv(csv, t);
    write_text(out_dir / ("robustness_" + std::string(to_string(a)) + ".csv"), csv.str());
    tables.push_back(to_json(t));
  }
  const Json report = {{"schema", "regmosaic.robustness_report"}, {"schema_version", 1},
                       {"tables", tables}};
  write_json(out_dir / "robustness.json", report);
  write_json(out_dir / "config.json", cfg.resolved);
  Json summary = report;
  summary["config"] = cfg.resolved;
  return summary;
}

Json run_eval_accuracy(const Json& config) {
  Config cfg(config, "accuracy config");
  const fs::path out_dir = cfg.required_string("output_dir");
  const std::string manifest = cfg.required_string("manifest");
  const auto algos = algorithms_for(cfg.get<std::string>("algorithm", "both"));
  const bool uses_mi = std::find(algos.begin(), algos.end(), Algorithm::MI) != algos.end();
  const AlgorithmSpec base = read_spec(cfg, Algorithm::QD, uses_mi);
  const int jobs = cfg.get<int>("jobs", 1);
  cfg.finish();

  const LoadedSequence seq = load_sequence(manifest);
  const auto labels = segment_labels(seq.manifest.segments);
  const auto& seg = labels.size() == seq.manifest.truths.size() ? labels : std::vector<std::size_t>{};
  std::vector<AccuracyReport> reports;
  Json report_json = Json::array();
  for (Algorithm a : algos) {
    AlgorithmSpec spec = base;
    spec.algorithm = a;
    AccuracyReport r = accuracy_curve(make_registrar(spec), to_string(a), seq.frames,
                                      seq.manifest.truths, seg, jobs);
    r.sequence = manifest;
    report_json.push_back(to_json(r));
    reports.push_back(std::move(r));
  }
  ensure_dir(out_dir);
  std::ostringstream csv;
  write_accuracy_csv(csv, reports);
  write_text(out_dir / "accuracy.csv", csv.str());
  const Json report = {{"schema", "regmosaic.accuracy_report"}, {"schema_version", 1},
                       {"reports", report_json}};
  write_json(out_dir / "accuracy.json", report);
  write_json(out_dir / "config.json", cfg.resolved);
  Json summary = report;
  summary["config"] = cfg.resolved;
  return summary;
}

Json run_eval_speed(const Json& config) {
  Config cfg(config, "speed config");
  const fs::path out_dir = cfg.required_string("output_dir");
  const std::string manifest = cfg.get<std::string>("manifest", "");
  const auto algos = algorithms_for(cfg.get<std::string>("algorithm", "both"));
  const bool uses_mi = std::find(algos.begin(), algos.end(), Algorithm::MI) != algos.end();
  const AlgorithmSpec base = read_spec(cfg, Algorithm::QD, uses_mi);
  const int pairs = cfg.get<int>("pairs", 20);
  if (pairs < 1) config_error("speed config: 'pairs' must be positive");
  std::uint64_t seed = 1;
  int texture_size = 2048;
  if (manifest.empty()) {
    seed = cfg.get<std::uint64_t>("seed", 1);
    texture_size = cfg.get<int>("texture_size", 2048);
  }
  cfg.finish();

  std::vector<GrayImage> frames;
  std::vector<Homography> truths;
  if (!manifest.empty()) {
    LoadedSequence seq = load_sequence(manifest);
    frames = std::move(seq.frames);
    truths = std::move(seq.manifest.truths);
  } else {
    const GrayImage ref = procedural_texture(texture_size, texture_size, seed);
    Sequence seq = make_sequence(ref, realistic_path_preset());
    frames = std::move(seq.frames);
    truths = std::move(seq.truths);
  }
  if (truths.size() > static_cast<std::size_t>(pairs)) {
    truths.resize(pairs);
    frames.resize(pairs + 1);
  }
  std::vector<NamedRegistrar> named;
  for (Algorithm a : algos) {
    AlgorithmSpec spec = base;
    spec.algorithm = a;
    named.push_back({to_string(a), make_registrar(spec)});
  }
  const auto rows = speed_benchmark(named, frames, truths);
  ensure_dir(out_dir);
  std::ostringstream csv;
  write_speed_csv(csv, rows);
  write_text(out_dir / "speed.csv", csv.str());
  Json report = to_json(rows);
  if (rows.size() == 2 && rows[0].mean_seconds > 0.0) {
    report["time_ratio_mi_over_qd"] = rows[1].mean_seconds / rows[0].mean_seconds;
  }
  write_json(out_dir / "speed.json", report);
  write_json(out_dir / "config.json", cfg.resolved);
  Json summary = report;
  summary["config"] = cfg.resolved;
  return summary;
}

}  // namespace regmosaic
