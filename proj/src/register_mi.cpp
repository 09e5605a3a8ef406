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

#include "regmosaic/register_mi.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include "regmosaic/error.hpp"

namespace regmosaic {

double entropy_of_counts(std::span<const double> counts) {
  std::vector<double> nz;
  nz.reserve(counts.size());
  double total = 0.0;
  for (double c : counts) {
    if (c > 0.0) nz.push_back(c);
  }
  std::sort(nz.begin(), nz.end());
  for (double c : nz) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : nz) {
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

EntropyEstimate entropy_histogram(const GrayImage& img, std::span<const std::uint8_t> mask,
                                  int bins) {
  const auto h = histogram(img, mask, bins);
  double total = 0.0;
  for (double c : h) total += c;
  if (total == 0.0) throw Error(ErrorCode::EmptyOverlap, "entropy of an empty region");
  return {entropy_of_counts(h), EntropyEstimator::Histogram};
}

double mutual_information_hist(const GrayImage& target, const WarpedImage& warped, int bins) {
  const JointHistogram jh = joint_histogram(target, warped, bins);
  const auto ma = jh.marginal_a();
  const auto mb = jh.marginal_b();
  return (entropy_of_counts(ma) + entropy_of_counts(mb)) - entropy_of_counts(jh.counts);
}

double mutual_information_at(const GrayImage& target, const GrayImage& source,
                             const Homography& theta, int bins) {
  return mutual_information_hist(
      target, warp(source, invert(theta), target.width(), target.height()), bins);
}

namespace {

double chart_scale(const GrayImage& source) {
  return 0.5 * std::max(source.width(), source.height());
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Sample {
  double u;   // target intensity
  double v;   // source intensity at the warped position
  Vector8d dv;
};

// Draws a sample of overlap pixels: rejection first, then an explicit list of
// valid pixels when the overlap is sparse.
std::vector<Sample> draw_samples(const GrayImage& target, const GrayImage& source,
                                 const Homography& warp_map, int count,
                                 std::mt19937_64& rng) {
  const int w = target.width();
  const double tcx = target.center_x(), tcy = target.center_y();
  const double scx = source.center_x(), scy = source.center_y();
  const double scale = chart_scale(source);
  const std::size_t n = target.size();

  auto try_pixel = [&](std::size_t idx) -> std::optional<Sample> {
    const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
    auto q = try_apply(warp_map, x - tcx, y - tcy);
    if (!q) return std::nullopt;
    auto s = sample_bilinear_with_gradient(source, q->x + scx, q->y + scy);
    if (!s) return std::nullopt;
    const Jacobian2x8 j = increment_jacobian(q->x, q->y, scale);
    return Sample{target.at(x, y), s->value, (s->dx * j.row(0) + s->dy * j.row(1)).transpose()};
  };
  auto pick = [&](std::size_t range) {
    return std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(range)),
                    range - 1);
  };

  std::vector<Sample> out;
  out.reserve(count);
  const int max_attempts = 20 * count;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count;
       ++attempt) {
    if (auto s = try_pixel(pick(n))) out.push_back(*s);
  }
  if (static_cast<int>(out.size()) < count) {
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < n; ++i) {
      if (try_pixel(i)) valid.push_back(i);
    }
    if (valid.empty()) {
      throw Error(ErrorCode::EmptyOverlap, "warped source does not overlap the target");
    }
    while (static_cast<int>(out.size()) < count) out.push_back(*try_pixel(valid[pick(valid.size())]));
  }
  return out;
}

int group_of(int i) {
  if (i == 2 || i == 5) return 0;
  if (i >= 6) return 2;
  return 1;
}

struct AscentStep {
  Homography theta;
  Vector8d delta;
};

AscentStep ascent(const Homography& theta, const Vector8d& g, double rate_scale,
                  const GrayImage& source, const MIOptions& opts) {
  const double rates[3] = {opts.learning_rates.translation, opts.learning_rates.linear,
                           opts.learning_rates.perspective};
  Vector8d delta;
  for (int i = 0; i < 8; ++i) delta[i] = rate_scale * rates[group_of(i)] * g[i];
  if (opts.max_step_px > 0.0 && delta.norm() > 0.0) {
    const double disp = max_corner_displacement(increment(delta, chart_scale(source)),
                                                Homography::identity(), source.width(),
                                                source.height());
    if (disp > opts.max_step_px) delta *= opts.max_step_px / disp;
  }
  return {perturb(theta, delta, source), delta};
}

}  // namespace

Homography perturb(const Homography& theta, const Vector8d& delta, const GrayImage& source) {
  return compose(theta, invert(increment(delta, chart_scale(source))));
}

MIGradient mi_stochastic_gradient(const GrayImage& target, const GrayImage& source,
                                  const Homography& theta, const MIOptions& opts,
                                  std::mt19937_64& rng) {
  if (opts.sample_size_a < 8 || opts.sample_size_b < 8 || !(opts.parzen_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid MI sampling options");
  }
  const Homography warp_map = invert(theta);
  const auto a = draw_samples(target, source, warp_map, opts.sample_size_a, rng);
  const auto b = draw_samples(target, source, warp_map, opts.sample_size_b, rng);

  MIGradient out;
  bool all_same = true;
  for (const auto& s : a) all_same = all_same && s.v == a.front().v && s.u == a.front().u;
  for (const auto& s : b) all_same = all_same && s.v == a.front().v && s.u == a.front().u;
  if (all_same) {
    out.degenerate = true;
    return out;
  }

  const double inv_two_var = 1.0 / (2.0 * opts.parzen_sigma * opts.parzen_sigma);
  const double inv_var = 2.0 * inv_two_var;
  const std::size_t na = a.size();
  std::vector<double> gv(na), guv(na);
  double h_v = 0.0, h_uv = 0.0, h_u = 0.0;
  Vector8d grad = Vector8d::Zero();
  for (const auto& sb : b) {
    double sum_v = 0.0, sum_uv = 0.0, sum_u = 0.0;
    for (std::size_t k = 0; k < na; ++k) {
      const double dv = sb.v - a[k].v;
      const double du = sb.u - a[k].u;
      const double ev = std::exp(-dv * dv * inv_two_var);
      const double eu = std::exp(-du * du * inv_two_var);
      gv[k] = ev;
      guv[k] = ev * eu;
      sum_v += ev;
      sum_uv += guv[k];
      sum_u += eu;
    }
    // Exponents can underflow for isolated intensities.
    const double tiny = 1e-300;
    sum_v = std::max(sum_v, tiny);
    sum_uv = std::max(sum_uv, tiny);
    sum_u = std::max(sum_u, tiny);
    for (std::size_t k = 0; k < na; ++k) {
      const double weight = gv[k] / sum_v - guv[k] / sum_uv;
      if (weight == 0.0) continue;
      const double dv = sb.v - a[k].v;
      grad.noalias() += (weight * dv * inv_var) * (sb.dv - a[k].dv);
    }
    const double norm = static_cast<double>(na);
    h_v -= std::log(sum_v / norm);
    h_uv -= std::log(sum_uv / norm);
    h_u -= std::log(sum_u / norm);
  }
  const double nb = static_cast<double>(b.size());
  const double ln2 = std::numbers::ln2;
  out.gradient = grad / (nb * ln2);
  // Kernel normalizations: 1D entropies carry log(sigma sqrt(2 pi)), the 2D
  // one twice that, so they cancel in h_u + h_v - h_uv.
  out.mi_estimate = (h_u + h_v - h_uv) / (nb * ln2);
  return out;
}

MIGradient mi_stochastic_gradient(const GrayImage& target, const GrayImage& source,
                                  const Homography& theta, const MIOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  return mi_stochastic_gradient(target, source, theta, opts, rng);
}

Homography mi_ascent_step(const Homography& theta, const Vector8d& gradient,
                          double rate_scale, const GrayImage& source, const MIOptions& opts) {
  return ascent(theta, gradient, rate_scale, source, opts).theta;
}

RegistrationResult register_mi(const GrayImage& target, const GrayImage& source,
                               const Homography& init, const MIOptions& opts) {
  if (target.width() < 32 || target.height() < 32 || source.width() < 32 ||
      source.height() < 32) {
    throw Error(ErrorCode::ImageTooSmall, "registration needs images of at least 32x32");
  }
  if (opts.max_iterations < 1 || opts.plateau_window < 1 || !(opts.decay_offset > 0.0) ||
      !(opts.learning_rates.translation > 0.0) || !(opts.learning_rates.linear > 0.0) ||
      !(opts.learning_rates.perspective > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid MI options");
  }
  std::mt19937_64 rng(opts.seed);
  RegistrationResult result;
  Homography theta = init;
  std::deque<Vector8d> window;
  Vector8d window_sum = Vector8d::Zero();
  std::deque<Eigen::Matrix3d> iterates;
  Eigen::Matrix3d iterate_sum = Eigen::Matrix3d::Zero();
  const double scale = chart_scale(source);
  result.stop_reason = "iteration_cap";

  for (int t = 0; t < opts.max_iterations; ++t) {
    MIGradient g;
    try {
      g = mi_stochastic_gradient(target, source, theta, opts, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyOverlap || t == 0) throw;
      result.stop_reason = "lost_overlap";
      break;
    }
    ++result.iterations;
    const double rate_scale = 1.0 / std::sqrt(1.0 + t / opts.decay_offset);
    AscentStep step = ascent(theta, g.gradient, rate_scale, source, opts);
    theta = step.theta;
    iterates.push_back(theta.matrix());
    iterate_sum += theta.matrix();
    if (static_cast<int>(iterates.size()) > opts.plateau_window) {
      iterate_sum -= iterates.front();
      iterates.pop_front();
    }

    window.push_back(step.delta);
    window_sum += step.delta;
    if (static_cast<int>(window.size()) > opts.plateau_window) {
      window_sum -= window.front();
      window.pop_front();
    }
    if (static_cast<int>(window.size()) == opts.plateau_window) {
      const Vector8d mean = window_sum / static_cast<double>(opts.plateau_window);
      const double drift = max_corner_displacement(increment(mean, scale), Homography::identity(),
                                                   source.width(), source.height());
      if (drift < opts.plateau_tolerance_px) {
        result.stop_reason = "plateau";
        break;
      }
    }
  }
  result.total_iterations = result.iterations;
  // The estimate is the mean of the trailing iterates, which averages out
  // most of the sampling noise left at the final step size.
  if (!iterates.empty()) {
    const Eigen::Matrix3d mean = iterate_sum / static_cast<double>(iterates.size());
    try {
      theta = Homography(mean);
    } catch (const Error&) {
    }
  }
  result.theta_hat = theta;

  const WarpedImage registered =
      warp(source, invert(theta), target.width(), target.height());
  if (registered.valid_count() == 0) {
    result.final_score = 0.0;
    result.converged = false;
    result.stop_reason = "lost_overlap";
    return result;
  }
  result.final_score = mutual_information_hist(target, registered, opts.histogram_bins);
  const double h_target =
      entropy_histogram(target, registered.mask, opts.histogram_bins).value;
  const bool informative = result.final_score >= opts.min_normalized_mi * h_target;
  result.converged = result.stop_reason == "plateau" && informative;
  if (result.stop_reason == "plateau" && !informative) result.stop_reason = "low_information";
  return result;
}

}  // namespace regmosaic
