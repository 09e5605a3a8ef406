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

// regmosaic command-line front end. Every command builds a JSON
// configuration (config file, then flags, then --set overrides) and hands it
// to the C library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regmosaic/regmosaic.h"

using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
  return j;
}

// --set a.b.c=value; value is parsed as JSON when possible, else taken as a
// string.
void apply_set(Json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("bad --set key '" + key + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

int exit_code_for(rm_status s) {
  switch (s) {
    case RM_OK: return kExitOk;
    case RM_ERR_INVALID_ARGUMENT:
    case RM_ERR_IO:
    case RM_ERR_PARSE: return kExitUsage;
    default: return kExitFailure;
  }
}

using RunFn = rm_status (*)(const char*, char**);

std::optional<Json> call(RunFn fn, const Json& config, int& exit_code) {
  char* out = nullptr;
  const rm_status s = fn(config.dump().c_str(), &out);
  if (s != RM_OK) {
    std::cerr << "regmosaic: " << rm_status_name(s) << ": " << rm_last_error() << '\n';
    exit_code = exit_code_for(s);
    return std::nullopt;
  }
  Json summary = Json::parse(out);
  rm_string_free(out);
  exit_code = kExitOk;
  return summary;
}

std::string num(const Json& v, int precision = 3) {
  if (v.is_null()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v.get<double>());
  return buf;
}

bool uses_mi(const Json& cfg) {
  const std::string a = cfg.value("algorithm", std::string("qd"));
  return a == "mi" || a == "both";
}

void require_mi_seed(const Json& cfg) {
  if (uses_mi(cfg) && !(cfg.contains("mi") && cfg["mi"].contains("seed"))) {
    throw UsageError("mutual-information runs need --seed (or mi.seed in the config)");
  }
}

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON configuration file; flags override it");
  app->add_option("--set", c.sets, "Override any configuration field, e.g. --set mi.parzen_sigma=20")
      ->take_all();
}

Json base_config(const Common& c) { return load_config(c.config_path); }

void finish_config(Json& cfg, const Common& c) {
  for (const auto& s : c.sets) apply_set(cfg, s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense perspective registration and mosaicing of image sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rm_version()));
  int exit_code = kExitOk;

  // synth
  Common synth_common;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic pair or sequence");
  add_common(synth, synth_common);
  std::string preset, out_dir;
  bool pair_flag = false;
  std::optional<double> tx, ty, scale, phi, psi, alpha, focal;
  std::optional<std::uint64_t> synth_seed;
  std::optional<int> texture_size, frame_size, crop;
  synth->add_option("--preset", preset, "paper-path, realistic, pair or custom")
      ->check(CLI::IsMember({"paper-path", "realistic", "pair", "custom"}));
  synth->add_flag("--pair", pair_flag, "Generate one pair (same as --preset pair)");
  synth->add_option("--tx", tx, "Pair translation along x, pixels");
  synth->add_option("--ty", ty, "Pair translation along y, pixels");
  synth->add_option("--scale", scale, "Pair scale factor (1 = none)");
  synth->add_option("--phi", phi, "Pair in-plane rotation, degrees");
  synth->add_option("--psi", psi, "Pair out-of-plane rotation about the vertical axis, degrees");
  synth->add_option("--alpha", alpha, "Pair out-of-plane rotation about the horizontal axis, degrees");
  synth->add_option("--focal", focal, "Virtual focal length for tilts, pixels (default: frame width)");
  synth->add_option("--seed", synth_seed, "Texture seed");
  synth->add_option("--texture-size", texture_size, "Reference texture side, pixels");
  synth->add_option("--frame-size", frame_size, "Sequence frame side, pixels");
  synth->add_option("--crop", crop, "Pair crop side, pixels");
  synth->add_option("-o,--out", out_dir, "Output directory");

  // register
  Common reg_common;
  auto* reg = app.add_subcommand("register", "Register a source image onto a target image");
  add_common(reg, reg_common);
  std::string reg_target, reg_source, reg_algo, reg_out, reg_truth;
  std::optional<std::uint64_t> reg_seed;
  reg->add_option("target", reg_target, "Target image (PGM or PNG)");
  reg->add_option("source", reg_source, "Source image (PGM or PNG)");
  reg->add_option("--algo", reg_algo, "qd or mi")->check(CLI::IsMember({"qd", "mi"}));
  reg->add_option("--seed", reg_seed, "Random seed (required for mi)");
  reg->add_option("--truth", reg_truth, "Truth JSON; reports the mean registration error");
  reg->add_option("-o,--out", reg_out, "Result JSON path (default result.json)");

  // mosaic
  Common mos_common;
  auto* mos = app.add_subcommand("mosaic", "Register consecutive frames and build a panorama");
  add_common(mos, mos_common);
  std::string mos_manifest, mos_algo, mos_blend, mos_out;
  std::vector<std::string> mos_frames;
  bool use_truth = false;
  std::optional<std::uint64_t> mos_seed;
  std::optional<int> mos_jobs;
  mos->add_option("--manifest", mos_manifest, "Sequence manifest JSON");
  mos->add_option("--frames", mos_frames, "Ordered frame images instead of a manifest");
  mos->add_flag("--use-truth", use_truth, "Chain the manifest's ground-truth transforms");
  mos->add_option("--algo", mos_algo, "qd or mi")->check(CLI::IsMember({"qd", "mi"}));
  mos->add_option("--blend", mos_blend, "first_wins, last_wins or mean")
      ->check(CLI::IsMember({"first_wins", "last_wins", "mean"}));
  mos->add_option("--seed", mos_seed, "Random seed (required for mi)");
  mos->add_option("--jobs", mos_jobs, "Worker threads");
  mos->add_option("-o,--out", mos_out, "Panorama image path (default panorama.pgm)");

  // eval
  auto* ev = app.add_subcommand("eval", "Robustness, accuracy and speed reports");
  ev->require_subcommand(1);
  Common rob_common, acc_common, spd_common;
  std::string rob_algo, rob_out, acc_algo, acc_out, acc_manifest, spd_algo, spd_out, spd_manifest;
  std::optional<std::uint64_t> rob_seed, acc_seed, spd_seed, spd_texture_seed;
  std::optional<int> rob_jobs, acc_jobs, spd_pairs;
  std::optional<double> rob_threshold;
  std::vector<std::uint64_t> rob_textures;
  auto* rob = ev->add_subcommand("robustness", "Capture-range sweeps on synthetic pairs");
  add_common(rob, rob_common);
  rob->add_option("--algo", rob_algo, "qd, mi or both")->check(CLI::IsMember({"qd", "mi", "both"}));
  rob->add_option("--seed", rob_seed, "MI random seed (required for mi)");
  rob->add_option("--textures", rob_textures, "Texture seeds")->delimiter(',');
  rob->add_option("--threshold", rob_threshold, "Success threshold on the mean error, pixels");
  rob->add_option("--jobs", rob_jobs, "Worker threads");
  rob->add_option("-o,--out", rob_out, "Output directory (default robustness)");
  auto* acc = ev->add_subcommand("accuracy", "Per-pair errors along a sequence");
  add_common(acc, acc_common);
  acc->add_option("--manifest", acc_manifest, "Sequence manifest JSON");
  acc->add_option("--algo", acc_algo, "qd, mi or both")->check(CLI::IsMember({"qd", "mi", "both"}));
  acc->add_option("--seed", acc_seed, "MI random seed (required for mi)");
  acc->add_option("--jobs", acc_jobs, "Worker threads");
  acc->add_option("-o,--out", acc_out, "Output directory (default accuracy)");
  auto* spd = ev->add_subcommand("speed", "Serial iteration and timing comparison");
  add_common(spd, spd_common);
  spd->add_option("--manifest", spd_manifest, "Sequence manifest (default: realistic preset)");
  spd->add_option("--pairs", spd_pairs, "Number of consecutive pairs");
  spd->add_option("--algo", spd_algo, "qd, mi or both")->check(CLI::IsMember({"qd", "mi", "both"}));
  spd->add_option("--seed", spd_seed, "MI random seed (required for mi)");
  spd->add_option("--texture-seed", spd_texture_seed, "Texture seed of the generated sequence");
  spd->add_option("-o,--out", spd_out, "Output directory (default speed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      Json cfg = base_config(synth_common);
      if (pair_flag) cfg["preset"] = "pair";
      if (!preset.empty()) {
        if (pair_flag && preset != "pair") throw UsageError("--pair conflicts with --preset " + preset);
        cfg["preset"] = preset;
      }
      const bool any_pair = tx || ty || scale || phi || psi || alpha;
      if (any_pair && cfg.value("preset", std::string()) != "pair") {
        throw UsageError("--tx/--ty/--scale/--phi/--psi/--alpha need --pair");
      }
      auto set_pair = [&](const char* key, const std::optional<double>& v) {
        if (v) cfg["pair"][key] = *v;
      };
      set_pair("tx", tx);
      set_pair("ty", ty);
      set_pair("scale", scale);
      set_pair("phi_deg", phi);
      set_pair("psi_deg", psi);
      set_pair("alpha_deg", alpha);
      if (focal) cfg["focal"] = *focal;
      if (synth_seed) cfg["seed"] = *synth_seed;
      if (texture_size) cfg["texture_size"] = *texture_size;
      if (frame_size) {
        cfg["frame_width"] = *frame_size;
        cfg["frame_height"] = *frame_size;
      }
      if (crop) cfg["crop"] = *crop;
      if (!out_dir.empty()) cfg["output_dir"] = out_dir;
      if (!cfg.contains("output_dir")) cfg["output_dir"] = "synth";
      finish_config(cfg, synth_common);
      if (auto s = call(rm_run_synth, cfg, exit_code)) {
        if (s->contains("manifest")) {
          std::cout << (*s)["manifest"].get<std::string>() << '\n';
        } else {
          std::cout << (*s)["target"].get<std::string>() << '\n'
                    << (*s)["source"].get<std::string>() << '\n'
                    << (*s)["truth"].get<std::string>() << '\n';
        }
      }
    } else if (*reg) {
      Json cfg = base_config(reg_common);
      if (!reg_target.empty()) cfg["target"] = reg_target;
      if (!reg_source.empty()) cfg["source"] = reg_source;
      if (!cfg.contains("target") || !cfg.contains("source")) {
        throw UsageError("register needs a target and a source image");
      }
      if (!reg_algo.empty()) cfg["algorithm"] = reg_algo;
      if (reg_seed) cfg["mi"]["seed"] = *reg_seed;
      if (!reg_truth.empty()) cfg["truth"] = reg_truth;
      if (!reg_out.empty()) cfg["output"] = reg_out;
      if (!cfg.contains("output")) cfg["output"] = "result.json";
      finish_config(cfg, reg_common);
      require_mi_seed(cfg);
      if (auto s = call(rm_run_register, cfg, exit_code)) {
        const auto& m = (*s)["theta_hat"]["matrix"];
        for (int r = 0; r < 3; ++r) {
          std::cout << num(m[3 * r], 9) << ' ' << num(m[3 * r + 1], 9) << ' '
                    << num(m[3 * r + 2], 9) << '\n';
        }
        std::cout << "algorithm " << (*s)["algorithm"].get<std::string>() << "  converged "
                  << ((*s)["converged"].get<bool>() ? "yes" : "no") << " ("
                  << (*s)["stop_reason"].get<std::string>() << ")  iterations "
                  << (*s)["iterations"] << "  score " << num((*s)["final_score"], 6);
        if (s->contains("error_px")) std::cout << "  error " << num((*s)["error_px"], 4) << " px";
        std::cout << '\n';
        exit_code = (*s)["converged"].get<bool>() ? kExitOk : kExitFailure;
      }
    } else if (*mos) {
      Json cfg = base_config(mos_common);
      if (!mos_manifest.empty()) cfg["manifest"] = mos_manifest;
      if (!mos_frames.empty()) cfg["frames"] = mos_frames;
      if (use_truth) cfg["use_truth"] = true;
      if (!mos_algo.empty()) cfg["algorithm"] = mos_algo;
      if (!mos_blend.empty()) cfg["blend"] = mos_blend;
      if (mos_seed) cfg["mi"]["seed"] = *mos_seed;
      if (mos_jobs) cfg["jobs"] = *mos_jobs;
      if (!mos_out.empty()) cfg["output"] = mos_out;
      if (!cfg.contains("output")) cfg["output"] = "panorama.pgm";
      finish_config(cfg, mos_common);
      if (!cfg.value("use_truth", false)) require_mi_seed(cfg);
      if (auto s = call(rm_run_mosaic, cfg, exit_code)) {
        std::cout << (*s)["output"].get<std::string>() << "  " << (*s)["width"] << "x"
                  << (*s)["height"] << "  blend " << (*s)["blend_mode"].get<std::string>();
        if (s->contains("final_corner_drift_px")) {
          std::cout << "  final corner drift " << num((*s)["final_corner_drift_px"]) << " px";
        }
        std::cout << '\n';
      }
    } else if (*rob) {
      Json cfg = base_config(rob_common);
      if (!rob_algo.empty()) cfg["algorithm"] = rob_algo;
      if (!cfg.contains("algorithm")) cfg["algorithm"] = "both";
      if (rob_seed) cfg["mi"]["seed"] = *rob_seed;
      if (!rob_textures.empty()) cfg["texture_seeds"] = rob_textures;
      if (rob_threshold) cfg["threshold"] = *rob_threshold;
      if (rob_jobs) cfg["jobs"] = *rob_jobs;
      if (!rob_out.empty()) cfg["output_dir"] = rob_out;
      if (!cfg.contains("output_dir")) cfg["output_dir"] = "robustness";
      finish_config(cfg, rob_common);
      require_mi_seed(cfg);
      if (auto s = call(rm_run_eval_robustness, cfg, exit_code)) {
        std::cout << "passing interval (+/-), threshold " << num(cfg.value("threshold", 1.0), 2)
                  << " px\n";
        std::printf("%-10s", "parameter");
        for (const auto& t : (*s)["tables"]) std::printf(" %10s", t["algorithm"].get<std::string>().c_str());
        std::printf("\n");
        const auto& first = (*s)["tables"][0]["rows"];
        for (std::size_t i = 0; i < first.size(); ++i) {
          std::printf("%-10s", first[i]["parameter"].get<std::string>().c_str());
          for (const auto& t : (*s)["tables"]) {
            const auto& r = t["rows"][i]["passing_radius"];
            std::printf(" %10s", r.is_null() ? "none" : num(r, 2).c_str());
          }
          std::printf("\n");
        }
      }
    } else if (*acc) {
      Json cfg = base_config(acc_common);
      if (!acc_manifest.empty()) cfg["manifest"] = acc_manifest;
      if (!cfg.contains("manifest")) throw UsageError("eval accuracy needs --manifest");
      if (!acc_algo.empty()) cfg["algorithm"] = acc_algo;
      if (!cfg.contains("algorithm")) cfg["algorithm"] = "both";
      if (acc_seed) cfg["mi"]["seed"] = *acc_seed;
      if (acc_jobs) cfg["jobs"] = *acc_jobs;
      if (!acc_out.empty()) cfg["output_dir"] = acc_out;
      if (!cfg.contains("output_dir")) cfg["output_dir"] = "accuracy";
      finish_config(cfg, acc_common);
      require_mi_seed(cfg);
      if (auto s = call(rm_run_eval_accuracy, cfg, exit_code)) {
        std::cout << "mean error per segment, px\n";
        for (const auto& r : (*s)["reports"]) {
          std::cout << r["algorithm"].get<std::string>();
          for (const auto& m : r["segment_mean_error_px"]) std::cout << "  " << num(m);
          std::cout << "  (failures " << r["failures"] << ")\n";
        }
      }
    } else if (*spd) {
      Json cfg = base_config(spd_common);
      if (!spd_manifest.empty()) cfg["manifest"] = spd_manifest;
      if (spd_pairs) cfg["pairs"] = *spd_pairs;
      if (!spd_algo.empty()) cfg["algorithm"] = spd_algo;
      if (!cfg.contains("algorithm")) cfg["algorithm"] = "both";
      if (spd_seed) cfg["mi"]["seed"] = *spd_seed;
      if (spd_texture_seed) cfg["seed"] = *spd_texture_seed;
      if (!spd_out.empty()) cfg["output_dir"] = spd_out;
      if (!cfg.contains("output_dir")) cfg["output_dir"] = "speed";
      finish_config(cfg, spd_common);
      require_mi_seed(cfg);
      if (auto s = call(rm_run_eval_speed, cfg, exit_code)) {
        std::printf("%-6s %6s %12s %12s %12s\n", "algo", "pairs", "iterations", "ms/pair",
                    "error px");
        for (const auto& r : (*s)["rows"]) {
          std::printf("%-6s %6d %12s %12s %12s\n", r["algorithm"].get<std::string>().c_str(),
                      r["pairs"].get<int>(), num(r["mean_iterations"], 1).c_str(),
                      num(Json(r["mean_seconds"].get<double>() * 1000.0), 2).c_str(),
                      num(r["mean_error_px"], 3).c_str());
        }
        if (s->contains("time_ratio_mi_over_qd")) {
          std::cout << "time ratio mi/qd " << num((*s)["time_ratio_mi_over_qd"], 1) << '\n';
        }
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "regmosaic: " << e.what() << '\n';
    return kExitUsage;
  }
  return exit_code;
}
