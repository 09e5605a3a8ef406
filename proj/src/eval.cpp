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

#include "regmosaic/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

#include "regmosaic/error.hpp"

namespace regmosaic {

double mean_registration_error(const Homography& truth, const Homography& estimate,
                               int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "frame size must be positive");
  }
  const double hx = 0.5 * (width - 1), hy = 0.5 * (height - 1);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto t = try_apply(truth, x - hx, y - hy);
      if (!t || std::abs(t->x) > hx || std::abs(t->y) > hy) continue;
      auto e = try_apply(estimate, x - hx, y - hy);
      if (!e) return std::numeric_limits<double>::infinity();
      sum += std::hypot(t->x - e->x, t->y - e->y);
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::EmptyOverlap, "no source pixel maps inside the target");
  }
  return sum / static_cast<double>(count);
}

const char* to_string(Algorithm a) { return a == Algorithm::QD ? "qd" : "mi"; }

std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "qd") return Algorithm::QD;
  if (s == "mi") return Algorithm::MI;
  return std::nullopt;
}

Registrar make_registrar(const AlgorithmSpec& spec) {
  if (spec.algorithm == Algorithm::QD) {
    return [opts = spec.qd](const GrayImage& t, const GrayImage& s) {
      return register_qd(t, s, Homography::identity(), opts);
    };
  }
  return [opts = spec.mi](const GrayImage& t, const GrayImage& s) {
    return register_mi(t, s, Homography::identity(), opts);
  };
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Tx: return "tx";
    case SweepParameter::Ty: return "ty";
    case SweepParameter::Scale: return "scale";
    case SweepParameter::Phi: return "phi";
    case SweepParameter::Psi: return "psi";
    case SweepParameter::Alpha: return "alpha";
  }
  return "tx";
}

std::optional<SweepParameter> sweep_parameter_from_string(const std::string& s) {
  for (auto p : {SweepParameter::Tx, SweepParameter::Ty, SweepParameter::Scale,
                 SweepParameter::Phi, SweepParameter::Psi, SweepParameter::Alpha}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

SweepGrid symmetric_grid(SweepParameter p, double limit, double step) {
  if (!(step > 0.0) || !(limit >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs a positive step");
  }
  const int n = static_cast<int>(std::floor(limit / step + 1e-9));
  SweepGrid g{p, {}};
  for (int i = -n; i <= n; ++i) g.values.push_back(i * step);
  return g;
}

ViewpointChange viewpoint_for(SweepParameter p, double value, double focal) {
  constexpr double deg = std::numbers::pi / 180.0;
  ViewpointChange v;
  v.focal = focal;
  switch (p) {
    case SweepParameter::Tx: v.tx = value; break;
    case SweepParameter::Ty: v.ty = value; break;
    case SweepParameter::Scale: v.tz_as_scale = 1.0 + value; break;
    case SweepParameter::Phi: v.phi = value * deg; break;
    case SweepParameter::Psi: v.psi = value * deg; break;
    case SweepParameter::Alpha: v.alpha = value * deg; break;
  }
  return v;
}

const RobustnessRow* RobustnessTable::row(SweepParameter p) const {
  for (const auto& r : rows) {
    if (r.parameter == p) return &r;
  }
  return nullptr;
}

namespace {

// Runs fn(i) for i in [0, n) on `jobs` threads.
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

bool near_value(const std::vector<double>& values, double v) {
  return std::any_of(values.begin(), values.end(),
                     [&](double w) { return std::abs(w - v) <= 1e-9 * std::max(1.0, std::abs(v)); });
}

struct Scored {
  double error;
  bool converged;
  int iterations;
  int total_iterations;
  double seconds;
  std::string stop_reason;
};

Scored score(const Registrar& registrar, const GrayImage& target, const GrayImage& source,
             const Homography& truth) {
  const auto t0 = std::chrono::steady_clock::now();
  Scored s{std::numeric_limits<double>::infinity(), false, 0, 0, 0.0, "error"};
  try {
    const RegistrationResult r = registrar(target, source);
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.converged = r.converged;
    s.iterations = r.iterations;
    s.total_iterations = r.total_iterations;
    s.stop_reason = r.stop_reason;
    s.error = mean_registration_error(truth, r.theta_hat, source.width(), source.height());
  } catch (const Error& e) {
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.stop_reason = to_string(e.code());
  }
  return s;
}

}  // namespace

RobustnessTable robustness_sweep(const Registrar& registrar, const std::string& algorithm,
                                 const std::vector<GrayImage>& textures,
                                 const std::vector<SweepGrid>& grids,
                                 const SweepOptions& opts) {
  if (textures.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs a texture");
  for (const auto& g : grids) {
    if (g.values.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep grid");
    for (double v : g.values) {
      if (!near_value(g.values, -v)) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string("grid for ") + to_string(g.parameter) + " is not symmetric");
      }
    }
  }
  const double focal = opts.focal > 0.0 ? opts.focal : opts.crop;

  RobustnessTable table;
  table.algorithm = algorithm;
  table.success_threshold = opts.threshold;
  table.crop = opts.crop;
  for (const auto& g : grids) {
    for (double v : g.values) {
      for (std::size_t t = 0; t < textures.size(); ++t) {
        SweepCell c;
        c.parameter = g.parameter;
        c.value = v;
        c.texture = t;
        table.cells.push_back(c);
      }
    }
  }
  parallel_for(table.cells.size(), opts.jobs, [&](std::size_t i) {
    SweepCell& c = table.cells[i];
    const SyntheticPair pair =
        make_pair(textures[c.texture], viewpoint_for(c.parameter, c.value, focal), opts.crop);
    const Scored s = score(registrar, pair.target, pair.source, pair.truth);
    c.error = s.error;
    c.converged = s.converged;
    c.iterations = s.iterations;
    c.seconds = s.seconds;
    c.stop_reason = s.stop_reason;
  });

  for (const auto& g : grids) {
    RobustnessRow row;
    row.parameter = g.parameter;
    row.grid = g.values;
    std::map<double, bool> passes;  // |value| -> every cell passed
    for (const auto& c : table.cells) {
      if (c.parameter != g.parameter) continue;
      const double key = std::abs(c.value);
      auto it = passes.find(key);
      const bool ok = c.error <= opts.threshold;
      if (it == passes.end()) {
        passes.emplace(key, ok);
      } else {
        it->second = it->second && ok;
      }
    }
    for (const auto& [radius, ok] : passes) {
      if (!ok) break;
      row.passing_radius = radius;
    }
    table.rows.push_back(row);
  }
  return table;
}

AccuracyReport accuracy_curve(const Registrar& registrar, const std::string& algorithm,
                              const std::vector<GrayImage>& frames,
                              const std::vector<Homography>& truths,
                              const std::vector<std::size_t>& segment_of_pair, int jobs) {
  if (frames.size() != truths.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "need one truth per consecutive frame pair");
  }
  if (!segment_of_pair.empty() && segment_of_pair.size() != truths.size()) {
    throw Error(ErrorCode::InvalidArgument, "segment labels do not match the pairs");
  }
  const std::size_t n = truths.size();
  AccuracyReport r;
  r.algorithm = algorithm;
  r.per_pair_error.assign(n, 0.0);
  r.converged.assign(n, false);
  r.iterations.assign(n, 0);
  r.seconds.assign(n, 0.0);
  r.segment_of_pair =
      segment_of_pair.empty() ? std::vector<std::size_t>(n, 0) : segment_of_pair;
  std::vector<Scored> scored(n);
  parallel_for(n, jobs, [&](std::size_t k) {
    scored[k] = score(registrar, frames[k], frames[k + 1], truths[k]);
  });
  for (std::size_t k = 0; k < n; ++k) {
    r.per_pair_error[k] = scored[k].error;
    r.converged[k] = scored[k].converged;
    r.iterations[k] = scored[k].iterations;
    r.seconds[k] = scored[k].seconds;
  }
  return r;
}

std::vector<double> segment_means(const AccuracyReport& report) {
  std::vector<double> sum, count;
  for (std::size_t k = 0; k < report.per_pair_error.size(); ++k) {
    const std::size_t s = report.segment_of_pair[k];
    if (s >= sum.size()) {
      sum.resize(s + 1, 0.0);
      count.resize(s + 1, 0.0);
    }
    sum[s] += report.per_pair_error[k];
    count[s] += 1.0;
  }
  for (std::size_t s = 0; s < sum.size(); ++s) {
    sum[s] = count[s] > 0.0 ? sum[s] / count[s] : std::numeric_limits<double>::quiet_NaN();
  }
  return sum;
}

std::vector<SpeedRow> speed_benchmark(const std::vector<NamedRegistrar>& algorithms,
                                      const std::vector<GrayImage>& frames,
                                      const std::vector<Homography>& truths) {
  if (frames.size() != truths.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "need one truth per consecutive frame pair");
  }
  std::vector<SpeedRow> rows;
  for (const auto& a : algorithms) {
    SpeedRow row;
    row.algorithm = a.name;
    row.pairs = truths.size();
    for (std::size_t k = 0; k < truths.size(); ++k) {
      const Scored s = score(a.registrar, frames[k], frames[k + 1], truths[k]);
      row.mean_iterations += s.iterations;
      row.mean_total_iterations += s.total_iterations;
      row.mean_seconds += s.seconds;
      row.mean_error += s.error;
    }
    if (row.pairs > 0) {
      const double n = static_cast<double>(row.pairs);
      row.mean_iterations /= n;
      row.mean_total_iterations /= n;
      row.mean_seconds /= n;
      row.mean_error /= n;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const RobustnessTable& table) {
  out << "algorithm,parameter,value,texture,error_px,passed,converged,iterations,stop_reason\n";
  for (const auto& c : table.cells) {
    out << table.algorithm << ',' << to_string(c.parameter) << ',' << fmt(c.value) << ','
        << c.texture << ',' << fmt(c.error) << ',' << (c.error <= table.success_threshold)
        << ',' << c.converged << ',' << c.iterations << ',' << c.stop_reason << '\n';
  }
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& reports) {
  out << "pair,segment";
  for (const auto& r : reports) out << ",error_" << r.algorithm << ",converged_" << r.algorithm;
  out << '\n';
  const std::size_t n = reports.empty() ? 0 : reports.front().per_pair_error.size();
  for (std::size_t k = 0; k < n; ++k) {
    out << k << ',' << reports.front().segment_of_pair[k];
    for (const auto& r : reports) out << ',' << fmt(r.per_pair_error[k]) << ',' << r.converged[k];
    out << '\n';
  }
}

void write_speed_csv(std::ostream& out, const std::vector<SpeedRow>& rows) {
  out << "algorithm,pairs,mean_iterations,mean_total_iterations,mean_seconds,mean_error_px\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.pairs << ',' << fmt(r.mean_iterations) << ','
        << fmt(r.mean_total_iterations) << ',' << fmt(r.mean_seconds) << ','
        << fmt(r.mean_error) << '\n';
  }
}

}  // namespace regmosaic
