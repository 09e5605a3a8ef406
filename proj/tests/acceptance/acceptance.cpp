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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "regmosaic/error.hpp"
#include "regmosaic/eval.hpp"
#include "regmosaic/mosaic.hpp"
#include "regmosaic/pipeline.hpp"
#include "regmosaic/register_mi.hpp"
#include "regmosaic/register_qd.hpp"
#include "regmosaic/synth.hpp"

namespace {

using namespace regmosaic;
namespace fs = std::filesystem;

constexpr double kDeg = 3.14159265358979323846 / 180.0;

// Pinned tolerances.
constexpr double kSuccessThresholdPx = 1.0;
constexpr double kSubPixelPx = 1.0;
constexpr double kSpeedRatio = 10.0;
constexpr double kMaxQdIterations = 30.0;
constexpr double kOraclePx = 0.5;
constexpr double kMiIdentity = 1e-12;
constexpr double kStandardErrors = 3.0;
constexpr double kRoundTrip = 1e-9;
constexpr double kJacobianRelative = 1e-4;
constexpr double kMosaicMad = 2.0;
constexpr double kDriftPx = 5.0;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " C" << id << " " << name << ": " << detail
            << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string radius_str(const std::optional<double>& r) { return r ? fmt(*r) : "none"; }

// Paper capture-range columns, in sweep units (px, relative scale, degrees).
const std::map<SweepParameter, double> kQdColumn = {
    {SweepParameter::Tx, 25},  {SweepParameter::Ty, 25},  {SweepParameter::Scale, 0.15},
    {SweepParameter::Phi, 10}, {SweepParameter::Psi, 10}, {SweepParameter::Alpha, 10}};
const std::map<SweepParameter, double> kMiColumn = {
    {SweepParameter::Tx, 30},  {SweepParameter::Ty, 30},  {SweepParameter::Scale, 0.25},
    {SweepParameter::Phi, 20}, {SweepParameter::Psi, 20}, {SweepParameter::Alpha, 20}};

AlgorithmSpec qd_spec() { return AlgorithmSpec{Algorithm::QD, {}, {}}; }

AlgorithmSpec mi_spec(std::uint64_t seed) {
  AlgorithmSpec s{Algorithm::MI, {}, {}};
  s.mi.seed = seed;
  return s;
}

bool covers(const RobustnessTable& t, const std::map<SweepParameter, double>& column,
            std::string& detail) {
  bool ok = true;
  for (const auto& [p, limit] : column) {
    const auto* row = t.row(p);
    const auto r = row ? row->passing_radius : std::nullopt;
    const bool pass = r && *r >= limit - 1e-9;
    ok = ok && pass;
    detail += std::string(to_string(p)) + "=" + radius_str(r) + (pass ? "" : "(<" + fmt(limit) + ")") + " ";
  }
  return ok;
}

void criteria_1_and_2() {
  std::vector<GrayImage> textures;
  for (std::uint64_t seed : {1, 2, 3}) textures.push_back(procedural_texture(1024, 1024, seed));
  SweepOptions opts;
  opts.threshold = kSuccessThresholdPx;
  opts.crop = 256;
  const auto grids = default_sweep_grids();
  const auto qd = robustness_sweep(make_registrar(qd_spec()), "qd", textures, grids, opts);
  const auto mi = robustness_sweep(make_registrar(mi_spec(1)), "mi", textures, grids, opts);

  std::string d_qd = "qd ", d_mi = "mi ";
  const bool ok_qd = covers(qd, kQdColumn, d_qd);
  const bool ok_mi = covers(mi, kMiColumn, d_mi);
  report(1, "robustness intervals include the paper columns", ok_qd && ok_mi, d_qd + "| " + d_mi);

  bool superset = true;
  std::string detail;
  for (auto p : {SweepParameter::Scale, SweepParameter::Phi, SweepParameter::Psi,
                 SweepParameter::Alpha}) {
    const auto rq = qd.row(p)->passing_radius.value_or(-1.0);
    const auto rm = mi.row(p)->passing_radius.value_or(-1.0);
    const bool pass = rm >= rq;
    superset = superset && pass;
    detail += std::string(to_string(p)) + " mi " + fmt(rm) + (pass ? " >= " : " < ") + "qd " +
              fmt(rq) + "; ";
  }
  report(2, "MI interval is a superset of QD for scale, in-plane and out-of-plane", superset,
         detail);
}

const GrayImage& big_reference() {
  static const GrayImage ref = procedural_texture(2048, 2048, 7);
  return ref;
}

void criterion_3() {
  const auto seq = make_sequence(big_reference(), realistic_path_preset());
  bool ok = seq.truths.size() == 40;
  std::string detail = std::to_string(seq.truths.size()) + " pairs; ";
  for (const auto& [name, spec] : {std::pair{"qd", qd_spec()}, std::pair{"mi", mi_spec(1)}}) {
    const auto rep = accuracy_curve(make_registrar(spec), name, seq.frames, seq.truths,
                                    seq.segment_of_pair);
    const double worst = *std::max_element(rep.per_pair_error.begin(), rep.per_pair_error.end());
    ok = ok && worst < kSubPixelPx;
    detail += std::string(name) + " worst " + fmt(worst) + " px; ";
  }
  report(3, "sub-pixel accuracy on every realistic pair", ok, detail);
}

void criterion_4_and_9() {
  const auto& ref = big_reference();
  const auto seq = make_sequence(ref, paper_path_preset());
  std::string detail;
  bool best_ok = true;
  std::vector<double> scale_means;
  GlobalChain qd_chain;
  for (const auto& [name, spec] : {std::pair{"qd", qd_spec()}, std::pair{"mi", mi_spec(1)}}) {
    const auto rep = accuracy_curve(make_registrar(spec), name, seq.frames, seq.truths,
                                    seq.segment_of_pair);
    const auto m = segment_means(rep);
    best_ok = best_ok && m.size() == 4 && std::min_element(m.begin(), m.end()) == m.begin();
    detail += std::string(name) + " [";
    for (double v : m) detail += fmt(v) + " ";
    detail += "] ";
    scale_means.push_back(m.size() > 2 ? m[2] : INFINITY);
    if (std::string(name) == "qd") {
      // Rebuild the estimated chain from a second QD pass; QD is deterministic.
      std::vector<Homography> est;
      for (std::size_t k = 0; k + 1 < seq.frames.size(); ++k) {
        est.push_back(register_qd(seq.frames[k], seq.frames[k + 1], Homography::identity()).theta_hat);
      }
      qd_chain = chain(est);
    }
  }
  const bool scale_ok = scale_means[0] < scale_means[1];
  report(4, "translation segment best for both, QD beats MI on the scale segment",
         best_ok && scale_ok, detail + "(segments: translate, rotate, scale, tilt)");

  const auto truth_chain = chain(seq.truths);
  const auto pano = composite(seq.frames, truth_chain);
  double sum = 0.0;
  long n = 0;
  for (int y = 0; y < pano.canvas.height(); ++y) {
    for (int x = 0; x < pano.canvas.width(); ++x) {
      if (pano.coverage[static_cast<std::size_t>(y) * pano.canvas.width() + x] == 0) continue;
      const auto r = apply(seq.globals[0], x - pano.origin_offset.x, y - pano.origin_offset.y);
      const auto v = sample_bilinear(ref, r.x + ref.center_x(), r.y + ref.center_y());
      if (!v) continue;
      sum += std::abs(pano.canvas.at(x, y) - *v);
      ++n;
    }
  }
  const double mad = n ? sum / n : INFINITY;
  const double drift = max_corner_displacement(qd_chain.globals.back(), truth_chain.globals.back(),
                                               seq.frames[0].width(), seq.frames[0].height());
  report(9, "mosaic round trip", mad < kMosaicMad && drift <= kDriftPx && seq.truths.size() == 44,
         "truth-chain MAD " + fmt(mad) + " gray levels over " + std::to_string(n) +
             " px; QD final corner drift " + fmt(drift) + " px over " +
             std::to_string(seq.truths.size()) + " pairs");
}

void criterion_5() {
  const auto seq = make_sequence(big_reference(), realistic_path_preset());
  const std::vector<GrayImage> frames(seq.frames.begin(), seq.frames.begin() + 21);
  const std::vector<Homography> truths(seq.truths.begin(), seq.truths.begin() + 20);
  const auto rows = speed_benchmark({{"qd", make_registrar(qd_spec())}, {"mi", make_registrar(mi_spec(1))}},
                                    frames, truths);
  const double ratio = rows[1].mean_seconds / rows[0].mean_seconds;
  report(5, "speed ordering", ratio >= kSpeedRatio && rows[0].mean_iterations <= kMaxQdIterations,
         "MI/QD wall time " + fmt(ratio) + " (need >= " + fmt(kSpeedRatio) + "), QD " +
             fmt(rows[0].mean_seconds * 1e3) + " ms, MI " + fmt(rows[1].mean_seconds * 1e3) +
             " ms, QD mean iterations " + fmt(rows[0].mean_iterations) + " (all levels " +
             fmt(rows[0].mean_total_iterations) + "), MI mean iterations " +
             fmt(rows[1].mean_iterations));
}

void criterion_6() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> shift(-8, 8);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto ref = procedural_texture(512, 512, 100 + i);
    ViewpointChange v;
    v.tx = shift(rng);
    v.ty = shift(rng);
    const auto pair = make_pair(ref, v, 128);
    const auto grid = oracle::exhaustive_translation(
        [&](int tx, int ty) { return ssd(pair.target, pair.source, Homography::translation(tx, ty)); },
        8);
    const auto r = register_qd(pair.target, pair.source, Homography::identity());
    const auto t = apply(r.theta_hat, 0, 0);
    worst = std::max(worst, std::hypot(t.x - grid.x, t.y - grid.y));
  }
  report(6, "QD minimizer matches exhaustive SSD search", worst <= kOraclePx,
         "worst distance " + fmt(worst) + " px over 10 pairs");
}

void criterion_7() {
  double identity_gap = 0.0, symmetry_gap = 0.0, min_mi = INFINITY;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto img = procedural_texture(256, 256, seed);
    const double h = entropy_histogram(img, {}, 64).value;
    identity_gap = std::max(identity_gap,
                            std::abs(mutual_information_at(img, img, Homography::identity(), 64) - h));
    const auto other = procedural_texture(256, 256, seed + 50);
    const auto theta = viewpoint_to_homography(ViewpointChange{4, -3, 1.05, 5 * kDeg, 0, 0, 256});
    const auto w = warp(other, invert(theta), 256, 256);
    const double ab = mutual_information_hist(img, w, 64);
    const double ba = mutual_information_hist(w.image, WarpedImage{img, w.mask}, 64);
    symmetry_gap = std::max(symmetry_gap, std::abs(ab - ba));
    min_mi = std::min({min_mi, ab, mutual_information_at(img, other, theta, 64)});
  }

  const auto tex = procedural_texture(512, 512, 3);
  const auto truth = viewpoint_to_homography(ViewpointChange{1.5, -1, 1.02, 2 * kDeg, 0, 0, 80});
  const auto source = render_view(tex, Homography::identity(), 80, 80);
  const auto target = render_view(tex, invert(truth), 40, 40);
  MIOptions opts;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int within = 0, total = 0;
  double worst_z = 0.0;
  for (int point = 0; point < 10; ++point) {
    const auto theta = compose(truth, viewpoint_to_homography(ViewpointChange{
                                          3 * u(rng), 3 * u(rng), 1 + 0.03 * u(rng),
                                          2 * kDeg * u(rng), 0, 0, 80}));
    const auto fd = oracle::full_sample_mi_gradient(target, source, theta, opts.parzen_sigma);
    const auto st = oracle::stochastic_gradient_stats(target, source, theta, opts, 100);
    for (int i = 0; i < 8; ++i) {
      const double z = std::abs(st.mean[i] - fd[i]) / st.standard_error[i];
      worst_z = std::max(worst_z, z);
      within += z <= kStandardErrors;
      ++total;
    }
  }
  const bool ok = identity_gap <= kMiIdentity && symmetry_gap <= kMiIdentity && min_mi >= 0.0 &&
                  within == total;
  report(7, "MI estimator identities and gradient oracle", ok,
         "|MI(I,I)-H(I)| " + fmt(identity_gap) + ", asymmetry " + fmt(symmetry_gap) + ", min MI " +
             fmt(min_mi) + ", gradient " + std::to_string(within) + "/" + std::to_string(total) +
             " components within 3 SE (worst " + fmt(worst_z) + " SE)");
}

void criterion_8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_h = [&] {
    Eigen::Matrix3d m;
    m << 1 + 0.3 * u(rng), 0.3 * u(rng), 40 * u(rng), 0.3 * u(rng), 1 + 0.3 * u(rng),
        40 * u(rng), 1e-3 * u(rng), 1e-3 * u(rng), 1;
    return Homography(m);
  };
  double worst_rt = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto h = random_h();
    const auto g = random_h();
    worst_rt = std::max(worst_rt, (compose(h, invert(h)).matrix() - Eigen::Matrix3d::Identity())
                                      .cwiseAbs().maxCoeff());
    worst_rt = std::max(worst_rt, (invert(invert(h)).matrix() - h.matrix()).cwiseAbs().maxCoeff());
    worst_rt = std::max(worst_rt,
                        (compose(invert(compose(h, g)), compose(h, g)).matrix() -
                         Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
  }
  double worst_j = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto h = random_h();
    const double x = 128 * u(rng), y = 128 * u(rng);
    const auto j = apply_jacobian(h, x, y);
    const auto e = h.entries();
    for (int k = 0; k < 8; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(e[k]));
      auto at = [&](double d) {
        Eigen::Matrix3d m = h.matrix();
        m(k / 3, k % 3) += d;
        return apply(Homography(m), x, y);
      };
      const auto p = at(step), q = at(-step);
      const double fx = (p.x - q.x) / (2 * step), fy = (p.y - q.y) / (2 * step);
      const double scale = std::max({1.0, std::abs(j(0, k)), std::abs(j(1, k))});
      worst_j = std::max({worst_j, std::abs(fx - j(0, k)) / scale, std::abs(fy - j(1, k)) / scale});
    }
  }
  report(8, "geometry round trips and warp Jacobian",
         worst_rt <= kRoundTrip && worst_j <= kJacobianRelative,
         "worst round-trip entry error " + fmt(worst_rt) + ", worst relative Jacobian error " +
             fmt(worst_j));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGMOSAIC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Files that differ between the two trees, by path relative to the roots.
std::vector<std::string> tree_diff(const fs::path& a, const fs::path& b) {
  std::vector<std::string> diff;
  std::size_t na = 0, nb = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++na;
    const auto rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) diff.push_back(rel.string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) nb += e.is_regular_file();
  if (na != nb) diff.push_back("<file count>");
  return diff;
}

void criterion_10() {
  const auto root = fs::temp_directory_path() / "regmosaic_acceptance";
  fs::remove_all(root);
  const auto dir = root / "run";
  const std::string d = "'" + dir.string() + "'";
  bool ok = true;
  std::string detail;
  for (int run = 0; run < 2; ++run) {
    if (run == 1) fs::rename(dir, root / "first");
    fs::create_directories(dir);
    int rc = 0;
    rc |= run_cli("synth -o " + d + "/seq");
    rc |= run_cli("synth --pair --tx 12 --phi 4 --texture-size 1024 -o " + d + "/pair");
    rc |= run_cli("register " + d + "/pair/target.pgm " + d + "/pair/source.pgm --algo mi --seed 3 -o " +
                  d + "/reg/mi.json");
    rc |= run_cli("register " + d + "/pair/target.pgm " + d + "/pair/source.pgm --algo qd -o " + d +
                  "/reg/qd.json");
    rc |= run_cli("mosaic --manifest " + d + "/seq/manifest.json --algo qd -o " + d + "/mosaic/qd.png");
    rc |= run_cli("eval accuracy --manifest " + d + "/seq/manifest.json --algo both --seed 2 -o " + d +
                  "/acc");
    if (rc != 0) {
      ok = false;
      detail += "run " + std::to_string(run + 1) + " had a nonzero exit; ";
    }
  }
  const auto diff = tree_diff(root / "first", dir);
  ok = ok && diff.empty();
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) files += e.is_regular_file();
  detail += std::to_string(files) + " files compared";
  for (const auto& f : diff) detail += ", differs: " + f;
  report(10, "seeded CLI runs are byte-identical", ok, detail);
  fs::remove_all(root);
}

template <typename F>
void timed(F f) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    f();
  } catch (const std::exception& e) {
    std::cout << "FAIL (exception) " << e.what() << std::endl;
    ++failures;
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "     (" << fmt(s, 4) << " s)" << std::endl;
}

}  // namespace

int main() {
  timed(criteria_1_and_2);
  timed(criterion_3);
  timed(criterion_4_and_9);
  timed(criterion_5);
  timed(criterion_6);
  timed(criterion_7);
  timed(criterion_8);
  timed(criterion_10);
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
