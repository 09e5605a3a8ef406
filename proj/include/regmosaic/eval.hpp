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

#ifndef REGMOSAIC_EVAL_HPP
#define REGMOSAIC_EVAL_HPP

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "regmosaic/register_mi.hpp"
#include "regmosaic/register_qd.hpp"
#include "regmosaic/synth.hpp"

namespace regmosaic {

/// Mean distance between truth(p) and estimate(p) over the pixels p of a
/// w x h source frame whose true image lands inside the w x h target.
/// Throws EmptyOverlap when no pixel does.
double mean_registration_error(const Homography& truth, const Homography& estimate,
                               int width, int height);

enum class Algorithm { QD, MI };

const char* to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(const std::string& s);

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::QD;
  QDOptions qd;
  MIOptions mi;
};

/// Registers source onto target starting from the identity.
using Registrar =
    std::function<RegistrationResult(const GrayImage& target, const GrayImage& source)>;

Registrar make_registrar(const AlgorithmSpec& spec);

enum class SweepParameter { Tx, Ty, Scale, Phi, Psi, Alpha };

const char* to_string(SweepParameter p);
std::optional<SweepParameter> sweep_parameter_from_string(const std::string& s);

/// Grid values are pixels for tx/ty, the relative scale change f - 1 for
/// scale and degrees for the three angles.
struct SweepGrid {
  SweepParameter parameter = SweepParameter::Tx;
  std::vector<double> values;
};

/// Symmetric grid -limit, ..., -step, 0, step, ..., limit.
SweepGrid symmetric_grid(SweepParameter p, double limit, double step);

ViewpointChange viewpoint_for(SweepParameter p, double value, double focal);

struct SweepCell {
  SweepParameter parameter = SweepParameter::Tx;
  double value = 0.0;
  std::size_t texture = 0;
  double error = 0.0;  // +inf when registration threw
  bool converged = false;
  int iterations = 0;
  double seconds = 0.0;
  std::string stop_reason;
};

struct RobustnessRow {
  SweepParameter parameter = SweepParameter::Tx;
  std::vector<double> grid;
  /// Half-width of the largest passing interval [-r, r] whose grid points
  /// all pass on every texture; empty when 0 itself fails.
  std::optional<double> passing_radius;
};

struct RobustnessTable {
  std::string algorithm;
  double success_threshold = 1.0;
  int crop = 256;
  std::vector<RobustnessRow> rows;
  std::vector<SweepCell> cells;

  const RobustnessRow* row(SweepParameter p) const;
};

struct SweepOptions {
  double threshold = 1.0;
  int crop = 256;
  double focal = 0.0;  // 0 means crop width
  int jobs = 1;
};

/// Grids must be symmetric about zero. Cells run on a pool of opts.jobs
/// threads; the table does not depend on the job count.
RobustnessTable robustness_sweep(const Registrar& registrar, const std::string& algorithm,
                                 const std::vector<GrayImage>& textures,
                                 const std::vector<SweepGrid>& grids,
                                 const SweepOptions& opts = {});

struct AccuracyReport {
  std::string algorithm;
  std::string sequence;
  std::vector<double> per_pair_error;
  std::vector<bool> converged;
  std::vector<int> iterations;
  std::vector<double> seconds;
  std::vector<std::size_t> segment_of_pair;
};

/// Registers every consecutive pair (target frame k, source frame k+1) from
/// the identity and scores it against truths[k]. Failures score +inf.
AccuracyReport accuracy_curve(const Registrar& registrar, const std::string& algorithm,
                              const std::vector<GrayImage>& frames,
                              const std::vector<Homography>& truths,
                              const std::vector<std::size_t>& segment_of_pair = {},
                              int jobs = 1);

/// Mean error per segment, in segment order.
std::vector<double> segment_means(const AccuracyReport& report);

struct SpeedRow {
  std::string algorithm;
  std::size_t pairs = 0;
  double mean_iterations = 0.0;       // working-resolution iterations
  double mean_total_iterations = 0.0;
  double mean_seconds = 0.0;
  double mean_error = 0.0;
};

struct NamedRegistrar {
  std::string name;
  Registrar registrar;
};

/// Serial, single-threaded timing of every algorithm on the same pairs.
std::vector<SpeedRow> speed_benchmark(const std::vector<NamedRegistrar>& algorithms,
                                      const std::vector<GrayImage>& frames,
                                      const std::vector<Homography>& truths);

void write_sweep_csv(std::ostream& out, const RobustnessTable& table);
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& reports);
void write_speed_csv(std::ostream& out, const std::vector<SpeedRow>& rows);

}  // namespace regmosaic

#endif  // REGMOSAIC_EVAL_HPP
