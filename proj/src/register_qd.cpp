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

#include "regmosaic/register_qd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "regmosaic/error.hpp"

namespace regmosaic {

using Matrix8d = Eigen::Matrix<double, 8, 8>;

double ssd(const GrayImage& target, const GrayImage& source, const Homography& theta) {
  const WarpedImage w = warp(source, invert(theta), target.width(), target.height());
  const auto t = target.data();
  const auto s = w.image.data();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!w.mask[i]) continue;
    const double r = s[i] - t[i];
    sum += r * r;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyOverlap, "no overlap between target and warped source");
  return sum / static_cast<double>(n);
}

namespace {

// h acting on coordinates multiplied by `factor`.
Homography rescale(const Homography& h, double factor) {
  const Eigen::Matrix3d s = Eigen::Vector3d(factor, factor, 1.0).asDiagonal();
  const Eigen::Matrix3d si = Eigen::Vector3d(1.0 / factor, 1.0 / factor, 1.0).asDiagonal();
  return Homography(s * h.matrix() * si);
}

struct Pass {
  double cost = 0.0;  // sum of squared residuals
  std::size_t count = 0;
  Vector8d b = Vector8d::Zero();
  Matrix8d hessian = Matrix8d::Zero();
  double sum_t = 0.0, sum_t2 = 0.0, sum_s = 0.0, sum_s2 = 0.0;

  double mean() const { return cost / static_cast<double>(count); }
};

class LevelProblem {
 public:
  LevelProblem(const GrayImage& target, const GrayImage& source)
      : target_(target), source_(source) {
    scale_ = 0.5 * std::max(target.width(), target.height());
    const GradientField g = gradient(target);
    const int w = target.width(), h = target.height();
    sd_.resize(target.size());
    full_hessian_.setZero();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(y) * w + x;
        const Jacobian2x8 j =
            increment_jacobian(x - target.center_x(), y - target.center_y(), scale_);
        sd_[i] = (g.gx[i] * j.row(0) + g.gy[i] * j.row(1)).transpose();
        full_hessian_.noalias() += sd_[i] * sd_[i].transpose();
      }
    }
  }

  double scale() const { return scale_; }

  // Residuals of the current warp (target -> source); pixels whose sample
  // leaves the source drop out of the Hessian.
  Pass evaluate(const Homography& warp_map) const {
    Pass p;
    p.hessian = full_hessian_;
    const int w = target_.width(), h = target_.height();
    const double tcx = target_.center_x(), tcy = target_.center_y();
    const double scx = source_.center_x(), scy = source_.center_y();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(y) * w + x;
        std::optional<double> v;
        if (auto q = try_apply(warp_map, x - tcx, y - tcy)) {
          v = sample_bilinear(source_, q->x + scx, q->y + scy);
        }
        if (!v) {
          p.hessian.noalias() -= sd_[i] * sd_[i].transpose();
          continue;
        }
        const double t = target_.at(x, y);
        const double r = *v - t;
        p.b.noalias() += sd_[i] * r;
        p.cost += r * r;
        p.sum_t += t;
        p.sum_t2 += t * t;
        p.sum_s += *v;
        p.sum_s2 += *v * *v;
        ++p.count;
      }
    }
    return p;
  }

 private:
  const GrayImage& target_;
  const GrayImage& source_;
  double scale_ = 1.0;
  std::vector<Vector8d> sd_;
  Matrix8d full_hessian_;
};

// Damped solve restricted to the active parameters; nullopt when singular.
std::optional<Vector8d> solve_step(const Pass& p, const std::vector<int>& active,
                                   double damping) {
  const int n = static_cast<int>(active.size());
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd rhs(n);
  for (int r = 0; r < n; ++r) {
    rhs[r] = p.b[active[r]];
    for (int c = 0; c < n; ++c) a(r, c) = p.hessian(active[r], active[c]);
  }
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return std::nullopt;
  for (int r = 0; r < n; ++r) a(r, r) += damping * a(r, r);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const auto d = ldlt.vectorD();
  if (!(d.minCoeff() > 1e-12 * max_diag)) return std::nullopt;
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (!x.allFinite()) return std::nullopt;
  Vector8d out = Vector8d::Zero();
  for (int r = 0; r < n; ++r) out[active[r]] = x[r];
  return out;
}

struct LevelOutcome {
  int iterations = 0;
  bool tolerance_met = false;
  std::string stop_reason;
  Pass final_pass;
};

constexpr int kMaxRejections = 8;
constexpr double kMonotoneSlack = 1e-9;

LevelOutcome run_level(const LevelProblem& problem, Homography& warp_map,
                       const std::vector<int>& active, int max_iterations,
                       const QDOptions& opts) {
  LevelOutcome out;
  Pass cur = problem.evaluate(warp_map);
  if (cur.count == 0) {
    throw Error(ErrorCode::EmptyOverlap, "warped source does not overlap the target");
  }
  double damping = opts.hessian_damping;
  int rejections = 0;
  while (out.iterations < max_iterations) {
    std::optional<Vector8d> step;
    for (int attempt = 0; attempt < kMaxRejections && !step; ++attempt) {
      step = solve_step(cur, active, damping);
      if (!step) damping = std::max(damping * 10.0, 1e-6);
    }
    if (!step) {
      throw Error(ErrorCode::SingularHessian,
                  "Gauss-Newton Hessian is singular on the overlap");
    }
    ++out.iterations;
    const double norm = step->norm();
    std::optional<Homography> candidate;
    try {
      candidate = compose(warp_map, invert(increment(*step, problem.scale())));
    } catch (const Error&) {
      candidate.reset();
    }
    Pass next;
    if (candidate) next = problem.evaluate(*candidate);
    const bool accepted =
        candidate && next.count > 0 && next.mean() <= cur.mean() * (1.0 + kMonotoneSlack);
    if (accepted) {
      warp_map = *candidate;
      cur = std::move(next);
      damping = std::max(opts.hessian_damping, damping * 0.1);
      rejections = 0;
      if (norm < opts.step_norm_tolerance) {
        out.tolerance_met = true;
        out.stop_reason = "step_tolerance";
        out.final_pass = std::move(cur);
        return out;
      }
    } else {
      if (norm < opts.step_norm_tolerance) {
        out.tolerance_met = true;
        out.stop_reason = "step_tolerance";
        out.final_pass = std::move(cur);
        return out;
      }
      damping = std::max(damping * 10.0, 1e-4);
      if (++rejections >= kMaxRejections) {
        out.stop_reason = "no_decrease";
        out.final_pass = std::move(cur);
        return out;
      }
    }
  }
  out.stop_reason = "iteration_cap";
  out.final_pass = std::move(cur);
  return out;
}

int usable_levels(const GrayImage& a, const GrayImage& b, int requested) {
  const int smallest = std::min({a.width(), a.height(), b.width(), b.height()});
  int levels = 1;
  while (levels < requested && (smallest >> levels) >= 32) ++levels;
  return levels;
}

}  // namespace

RegistrationResult register_qd(const GrayImage& target, const GrayImage& source,
                               const Homography& init, const QDOptions& opts) {
  if (target.width() < 32 || target.height() < 32 || source.width() < 32 ||
      source.height() < 32) {
    throw Error(ErrorCode::ImageTooSmall, "registration needs images of at least 32x32");
  }
  if (opts.pyramid_levels < 1 || opts.max_iterations_per_level < 1 ||
      !(opts.step_norm_tolerance > 0.0) || !(opts.hessian_damping >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid QD options");
  }
  const int levels = usable_levels(target, source, opts.pyramid_levels);
  const auto target_pyr = pyramid(target, levels);
  const auto source_pyr = pyramid(source, levels);

  RegistrationResult result;
  const double coarse_factor = 1.0 / static_cast<double>(1 << (levels - 1));
  Homography warp_map = rescale(invert(init), coarse_factor);
  const std::vector<int> all = {0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<int> translation = {2, 5};

  LevelOutcome last;
  for (int l = levels - 1; l >= 0; --l) {
    const LevelProblem problem(target_pyr[l], source_pyr[l]);
    if (l == levels - 1 && opts.translation_init_iterations > 0) {
      const auto t = run_level(problem, warp_map, translation,
                               opts.translation_init_iterations, opts);
      result.total_iterations += t.iterations;
    }
    last = run_level(problem, warp_map, all, opts.max_iterations_per_level, opts);
    result.total_iterations += last.iterations;
    if (l > 0) warp_map = rescale(warp_map, 2.0);
  }
  result.iterations = last.iterations;
  result.stop_reason = last.stop_reason;

  const Pass& final_pass = last.final_pass;
  const double n = static_cast<double>(final_pass.count);
  const double var_t = final_pass.sum_t2 / n - std::pow(final_pass.sum_t / n, 2);
  const double var_s = final_pass.sum_s2 / n - std::pow(final_pass.sum_s / n, 2);
  result.final_score = final_pass.mean();
  result.theta_hat = invert(warp_map);

  const double overlap = n / static_cast<double>(target.size());
  const bool explains = result.final_score <= opts.max_relative_residual * (var_t + var_s);
  result.converged = last.tolerance_met && overlap >= opts.min_overlap_fraction && explains;
  if (last.tolerance_met && !result.converged) {
    result.stop_reason = overlap < opts.min_overlap_fraction ? "overlap_too_small"
                                                             : "residual_too_large";
  }
  return result;
}

}  // namespace regmosaic
