#include "mondi/losses.h"

#include <cmath>

#include "mondi/parallel.h"
#include "mondi/photometric.h"

namespace mondi {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double ordered_sum(const std::vector<double>& parts) {
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

bool monitor_saturated(const MonitorGrid& monitor) {
  for (double q : monitor.data)
    if (q != 1.0) return false;
  return true;
}

struct PhotometricTerms {
  TermValue color;
  TermValue structural;
};

// Shared warp for the color and structural terms. The normalizer is the
// number of valid (pixel, view) pairs.
PhotometricTerms photometric_terms(const DepthGrid& depth, const ImageGrid& target,
                                   std::span<const AdjacentView> views, const CameraIntrinsics& K,
                                   const MonitorGrid& monitor, bool want_color,
                                   bool want_structural) {
  if (views.empty()) throw InvalidInput("photometric loss: empty view list");
  if (!target.same_shape(depth) || !monitor.same_shape(depth))
    throw InvalidInput("photometric loss: dimension mismatch");
  const int H = depth.height;
  const int W = depth.width;
  const int C = target.channels;
  const double inv_c = 1.0 / C;

  PhotometricTerms out;
  out.color.gradient = ScalarGrid(H, W, 0.0);
  out.structural.gradient = ScalarGrid(H, W, 0.0);
  if (monitor_saturated(monitor) || (!want_color && !want_structural)) return out;

  std::vector<Reprojection> warps;
  warps.reserve(views.size());
  for (const AdjacentView& v : views)
    warps.push_back(reproject_image(v.image, depth, K, v.pose, /*with_jacobian=*/true));

  long pairs = 0;
  for (const Reprojection& w : warps)
    for (auto m : w.mask.data) pairs += m;
  if (pairs == 0) return out;
  const double inv_pairs = 1.0 / static_cast<double>(pairs);

  if (want_color) {
    std::vector<double> row_value(H, 0.0);
    parallel_rows(H, [&](int y) {
      double acc = 0.0;
      for (int x = 0; x < W; ++x) {
        const double weight = (1.0 - monitor(y, x)) * inv_pairs;
        double g = 0.0;
        for (const Reprojection& w : warps) {
          if (!w.mask(y, x)) continue;
          double abs_sum = 0.0;
          for (int c = 0; c < C; ++c) {
            const double r = w.image(y, x, c) - target(y, x, c);
            abs_sum += std::abs(r);
            g += sign(r) * w.jacobian(y, x, c);
          }
          acc += weight * abs_sum * inv_c;
        }
        out.color.gradient(y, x) = weight * g * inv_c;
      }
      row_value[y] = acc;
    });
    out.color.value = ordered_sum(row_value);
  }

  if (want_structural) {
    std::vector<double> row_value(H, 0.0);
    ScalarGrid upstream(H, W, 0.0);
    ImageGrid grad_image(H, W, C, 0.0);
    for (const Reprojection& w : warps) {
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          upstream(y, x) = w.mask(y, x) ? -(1.0 - monitor(y, x)) * inv_pairs : 0.0;
      const SsimMap s = ssim_map_vjp(w.image, target, w.mask, upstream, grad_image);
      parallel_rows(H, [&](int y) {
        double acc = 0.0;
        for (int x = 0; x < W; ++x) {
          if (!w.mask(y, x)) continue;
          acc += (1.0 - monitor(y, x)) * inv_pairs * (1.0 - s.score(y, x));
          double g = 0.0;
          for (int c = 0; c < C; ++c) g += grad_image(y, x, c) * w.jacobian(y, x, c);
          out.structural.gradient(y, x) += g;
        }
        row_value[y] += acc;
      });
    }
    out.structural.value = ordered_sum(row_value);
  }
  return out;
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {md, ph, st, sm}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("loss weights must be finite and >= 0");
  }
  if (md == 0.0 && ph == 0.0 && st == 0.0 && sm == 0.0)
    throw InvalidInput("at least one loss weight must be positive");
}

TermValue loss_md(const DepthGrid& depth, const DepthGrid& distilled, const MonitorGrid& monitor) {
  if (!depth.same_shape(distilled) || !depth.same_shape(monitor))
    throw InvalidInput("loss_md: dimension mismatch");
  const int H = depth.height;
  const int W = depth.width;
  TermValue out{0.0, ScalarGrid(H, W, 0.0)};
  if (depth.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(depth.size());
  std::vector<double> row_value(H, 0.0);
  parallel_rows(H, [&](int y) {
    double acc = 0.0;
    for (int x = 0; x < W; ++x) {
      const double diff = depth(y, x) - distilled(y, x);
      acc += monitor(y, x) * std::abs(diff);
      out.gradient(y, x) = monitor(y, x) * sign(diff) * inv_n;
    }
    row_value[y] = acc * inv_n;
  });
  out.value = ordered_sum(row_value);
  return out;
}

TermValue loss_color(const DepthGrid& depth, const ImageGrid& target,
                     std::span<const AdjacentView> views, const CameraIntrinsics& K,
                     const MonitorGrid& monitor) {
  return photometric_terms(depth, target, views, K, monitor, true, false).color;
}

TermValue loss_structural(const DepthGrid& depth, const ImageGrid& target,
                          std::span<const AdjacentView> views, const CameraIntrinsics& K,
                          const MonitorGrid& monitor) {
  return photometric_terms(depth, target, views, K, monitor, false, true).structural;
}

TermValue loss_smoothness(const DepthGrid& depth, const ImageGrid& target, const MonitorGrid& monitor) {
  if (!target.same_shape(depth) || !monitor.same_shape(depth))
    throw InvalidInput("loss_smoothness: dimension mismatch");
  const int H = depth.height;
  const int W = depth.width;
  const int C = target.channels;
  TermValue out{0.0, ScalarGrid(H, W, 0.0)};
  if (depth.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(depth.size());

  // Signed per-edge weights: w * sign(forward difference).
  ScalarGrid edge_x(H, W, 0.0);
  ScalarGrid edge_y(H, W, 0.0);
  std::vector<double> row_value(H, 0.0);
  parallel_rows(H, [&](int y) {
    double acc = 0.0;
    for (int x = 0; x < W; ++x) {
      const double q = 1.0 - monitor(y, x);
      if (x + 1 < W) {
        double grad_i = 0.0;
        for (int c = 0; c < C; ++c) grad_i += std::abs(target(y, x + 1, c) - target(y, x, c));
        const double w = q * std::exp(-grad_i / C);
        const double dd = depth(y, x + 1) - depth(y, x);
        acc += w * std::abs(dd);
        edge_x(y, x) = w * sign(dd) * inv_n;
      }
      if (y + 1 < H) {
        double grad_i = 0.0;
        for (int c = 0; c < C; ++c) grad_i += std::abs(target(y + 1, x, c) - target(y, x, c));
        const double w = q * std::exp(-grad_i / C);
        const double dd = depth(y + 1, x) - depth(y, x);
        acc += w * std::abs(dd);
        edge_y(y, x) = w * sign(dd) * inv_n;
      }
    }
    row_value[y] = acc * inv_n;
  });
  out.value = ordered_sum(row_value);

  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      double g = -edge_x(y, x) - edge_y(y, x);
      if (x > 0) g += edge_x(y, x - 1);
      if (y > 0) g += edge_y(y - 1, x);
      out.gradient(y, x) = g;
    }
  });
  return out;
}

LossBreakdown total_loss(const DepthGrid& depth, const SceneBundle& scene,
                         const DistillationProduct& product, const LossWeights& weights) {
  weights.validate();
  const int H = depth.height;
  const int W = depth.width;
  LossBreakdown out;
  out.gradient = ScalarGrid(H, W, 0.0);

  auto accumulate = [&](const TermValue& t, double w) {
    for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient.data[i] += w * t.gradient.data[i];
  };

  if (weights.md != 0.0) {
    const TermValue t = loss_md(depth, product.distilled, product.monitor);
    out.md = t.value;
    accumulate(t, weights.md);
  }
  if (weights.ph != 0.0 || weights.st != 0.0) {
    const PhotometricTerms p =
        photometric_terms(depth, scene.target, scene.views, scene.intrinsics, product.monitor,
                          weights.ph != 0.0, weights.st != 0.0);
    out.co = p.color.value;
    out.st = p.structural.value;
    if (weights.ph != 0.0) accumulate(p.color, weights.ph);
    if (weights.st != 0.0) accumulate(p.structural, weights.st);
  }
  if (weights.sm != 0.0) {
    const TermValue t = loss_smoothness(depth, scene.target, product.monitor);
    out.sm = t.value;
    accumulate(t, weights.sm);
  }
  out.total = weights.md * out.md + weights.ph * out.co + weights.st * out.st + weights.sm * out.sm;
  return out;
}

}  // namespace mondi
