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

#ifndef REGMOSAIC_REGISTER_MI_HPP
#define REGMOSAIC_REGISTER_MI_HPP

#include <cstdint>
#include <random>
#include <span>

#include "regmosaic/imaging.hpp"
#include "regmosaic/registration.hpp"

namespace regmosaic {

/// Step sizes per parameter group of the increment chart. Translation acts on
/// a13/a23, linear on a11/a12/a21/a22 and perspective on a31/a32.
struct LearningRates {
  double translation = 1.3e-3;
  double linear = 1e-2;
  double perspective = 5e-3;
};

struct MIOptions {
  int sample_size_a = 64;
  int sample_size_b = 64;
  double parzen_sigma = 25.0;  // gray levels
  LearningRates learning_rates;
  /// Rates decay as 1 / sqrt(1 + t / decay_offset).
  double decay_offset = 100.0;
  /// Largest corner displacement of a single update, in pixels.
  double max_step_px = 2.0;
  int max_iterations = 500;
  /// Plateau stop: norm of the mean update over the trailing window, in
  /// pixels of corner motion. The returned estimate is the mean of the
  /// iterates in that window.
  int plateau_window = 100;
  double plateau_tolerance_px = 0.01;
  int histogram_bins = 64;
  /// Converged results need final MI of at least this fraction of the
  /// target entropy over the overlap.
  double min_normalized_mi = 0.1;
  std::uint64_t seed = 1;
};

enum class EntropyEstimator { Histogram, Parzen };

struct EntropyEstimate {
  double value = 0.0;  // bits
  EntropyEstimator estimator = EntropyEstimator::Histogram;
};

/// Shannon entropy, in bits, of a histogram. Summation order is canonical so
/// permuted histograms give bit-identical results.
double entropy_of_counts(std::span<const double> counts);

/// Throws EmptyOverlap when the mask selects nothing.
EntropyEstimate entropy_histogram(const GrayImage& img, std::span<const std::uint8_t> mask,
                                  int bins);

/// H(target) + H(warped) - H(target, warped), all three read from the same
/// masked joint histogram. Bits.
double mutual_information_hist(const GrayImage& target, const WarpedImage& warped, int bins);

/// Convenience: histogram MI between target and T(source; theta).
double mutual_information_at(const GrayImage& target, const GrayImage& source,
                             const Homography& theta, int bins);

/// theta composed with the inverse chart increment: the registered image is
/// the source sampled at D(delta)(theta^-1(p)), D acting on source
/// coordinates normalized by half the larger source side.
Homography perturb(const Homography& theta, const Vector8d& delta, const GrayImage& source);

struct MIGradient {
  Vector8d gradient = Vector8d::Zero();  // d MI / d delta, bits per chart unit
  double mi_estimate = 0.0;              // bits, Parzen estimate on the samples
  bool degenerate = false;               // all sampled intensities identical
};

/// Stochastic EMMA gradient of the Parzen mutual information with respect to
/// the chart of perturb(). Samples are drawn uniformly from the overlap.
/// Throws EmptyOverlap. Deterministic given the generator state.
MIGradient mi_stochastic_gradient(const GrayImage& target, const GrayImage& source,
                                  const Homography& theta, const MIOptions& opts,
                                  std::mt19937_64& rng);

/// Seeds a fresh generator from opts.seed.
MIGradient mi_stochastic_gradient(const GrayImage& target, const GrayImage& source,
                                  const Homography& theta, const MIOptions& opts);

/// One ascent update of size `rate_scale` times the configured rates, clipped
/// to max_step_px. Exposed for testing.
Homography mi_ascent_step(const Homography& theta, const Vector8d& gradient,
                          double rate_scale, const GrayImage& source, const MIOptions& opts);

/// Stochastic gradient ascent of mutual information. Throws EmptyOverlap when
/// the initial estimate leaves no overlap. Bit-reproducible given opts.seed.
RegistrationResult register_mi(const GrayImage& target, const GrayImage& source,
                               const Homography& init, const MIOptions& opts = {});

}  // namespace regmosaic

#endif  // REGMOSAIC_REGISTER_MI_HPP
