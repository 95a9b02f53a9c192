#include "mondi/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mondi/parallel.h"

namespace mondi {

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::kNearestSparse: return "nearest_sparse";
    case InitMode::kDistilled: return "distilled";
    case InitMode::kConstant: return "constant";
  }
  return "unknown";
}

InitMode parse_init_mode(const std::string& text) {
  if (text == "nearest_sparse") return InitMode::kNearestSparse;
  if (text == "distilled") return InitMode::kDistilled;
  if (text == "constant") return InitMode::kConstant;
  throw InvalidInput("unknown init mode '" + text + "'");
}

void SolverConfig::validate() const {
  if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
  if (!(step_size > 0.0)) throw InvalidInput("step_size must be positive");
  if (!(moment1 >= 0.0 && moment1 < 1.0) || !(moment2 >= 0.0 && moment2 < 1.0))
    throw InvalidInput("moment coefficients must lie in [0,1)");
  if (!(min_depth > 0.0 && min_depth < max_depth) || !std::isfinite(max_depth))
    throw InvalidInput("depth range must satisfy 0 < min_depth < max_depth");
  if (log_every < 1) throw InvalidInput("log_every must be >= 1");
  if (!(final_step_fraction > 0.0 && final_step_fraction <= 1.0))
    throw InvalidInput("final_step_fraction must lie in (0,1]");
}

DepthGrid initialize_depth(const DepthGrid& sparse, const DepthGrid& distilled, InitMode mode,
                           double min_depth, double max_depth) {
  switch (mode) {
    case InitMode::kConstant:
      return DepthGrid(sparse.height, sparse.width, 0.5 * (min_depth + max_depth));
    case InitMode::kDistilled:
      return distilled;
    case InitMode::kNearestSparse:
      break;
  }
  const int H = sparse.height;
  const int W = sparse.width;
  std::vector<std::pair<int, int>> points;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (sparse(y, x) > 0.0) points.emplace_back(y, x);
  if (points.empty()) throw InvalidInput("initialize_depth: sparse map has no valid points");

  DepthGrid out(H, W, 0.0);
  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      if (sparse(y, x) > 0.0) {
        out(y, x) = sparse(y, x);
        continue;
      }
      long best = std::numeric_limits<long>::max();
      for (const auto& [py, px] : points) {
        const long dy = py - y;
        const long dx = px - x;
        const long dist = dy * dy + dx * dx;
        if (dist < best) {
          best = dist;
          out(y, x) = sparse(py, px);
        }
      }
    }
  });
  return out;
}

SolveResult solve(const SceneBundle& scene, const DistillationProduct& product,
                  const LossWeights& weights, const SolverConfig& config) {
  config.validate();
  weights.validate();
  const int H = scene.height();
  const int W = scene.width();
  if (!scene.target.same_shape(product.distilled) || !scene.target.same_shape(product.monitor))
    throw InvalidInput("solve: product dimensions differ from the scene");

  const double log_lo = std::log(config.min_depth);
  const double log_hi = std::log(config.max_depth);

  const DepthGrid init = initialize_depth(scene.sparse, product.distilled, config.init_mode,
                                          config.min_depth, config.max_depth);
  std::vector<double> u(init.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = init.data[i] > 0.0 ? init.data[i] : 0.5 * (config.min_depth + config.max_depth);
    u[i] = std::clamp(std::log(d), log_lo, log_hi);
  }
  std::vector<double> m1(u.size(), 0.0);
  std::vector<double> m2(u.size(), 0.0);
  DepthGrid depth(H, W, 0.0);
  auto refresh_depth = [&] {
    for (std::size_t i = 0; i < u.size(); ++i) depth.data[i] = std::exp(u[i]);
  };
  refresh_depth();

  SolveResult result;
  auto log_entry = [&](int iter, const LossBreakdown& l) {
    result.trace.entries.push_back({iter, l.md, l.co, l.st, l.sm, l.total});
  };

  constexpr double kEps = 1e-12;
  double b1_power = 1.0;
  double b2_power = 1.0;
  for (int iter = 0; iter <= config.max_iters; ++iter) {
    const LossBreakdown loss = total_loss(depth, scene, product, weights);
    if (!std::isfinite(loss.total)) throw SolverDivergence("non-finite loss", iter);
    if (iter == 0 || iter == config.max_iters || iter % config.log_every == 0) log_entry(iter, loss);
    if (iter == config.max_iters) break;

    const double progress = config.max_iters > 0 ? static_cast<double>(iter) / config.max_iters : 0.0;
    const double step =
        config.step_size * (1.0 - (1.0 - config.final_step_fraction) * progress);
    b1_power *= config.moment1;
    b2_power *= config.moment2;
    const double c1 = 1.0 - b1_power;
    const double c2 = 1.0 - b2_power;
    parallel_rows(H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t i = depth.index(y, x);
        // dL/du = d * dL/dd
        const double g = depth.data[i] * loss.gradient.data[i];
        m1[i] = config.moment1 * m1[i] + (1.0 - config.moment1) * g;
        m2[i] = config.moment2 * m2[i] + (1.0 - config.moment2) * g * g;
        const double m_hat = m1[i] / c1;
        const double v_hat = m2[i] / c2;
        u[i] = std::clamp(u[i] - step * m_hat / (std::sqrt(v_hat) + kEps), log_lo, log_hi);
      }
    });
    refresh_depth();
  }

  for (double& d : depth.data) d = std::clamp(d, config.min_depth, config.max_depth);
  result.depth = depth;
  result.trace.final_depth = depth;
  return result;
}

std::vector<double> finite_difference_gradient(const DepthGrid& depth, const SceneBundle& scene,
                                               const DistillationProduct& product,
                                               const LossWeights& weights,
                                               std::span<const int> pixels, double step) {
  if (!(step > 0.0)) throw InvalidInput("finite_difference_gradient: step must be positive");
  std::vector<double> out;
  out.reserve(pixels.size());
  DepthGrid probe = depth;
  for (int p : pixels) {
    if (p < 0 || static_cast<std::size_t>(p) >= probe.size())
      throw InvalidInput("finite_difference_gradient: pixel index out of range");
    const double saved = probe.data[p];
    probe.data[p] = saved + step;
    const double plus = total_loss(probe, scene, product, weights).total;
    probe.data[p] = saved - step;
    const double minus = total_loss(probe, scene, product, weights).total;
    probe.data[p] = saved;
    out.push_back((plus - minus) / (2.0 * step));
  }
  return out;
}

}  // namespace mondi
