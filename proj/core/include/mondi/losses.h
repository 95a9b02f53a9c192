#pragma once

#include <span>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"
#include "mondi/grid.h"

namespace mondi {

struct LossWeights {
  double md = 1.0;
  double ph = 0.15;  // bound to the color-consistency term
  double st = 0.85;
  double sm = 0.1;

  void validate() const;
};

// A scalar loss and its gradient with respect to every depth pixel (1/m).
struct TermValue {
  double value = 0.0;
  ScalarGrid gradient;
};

struct LossBreakdown {
  double md = 0.0;
  double co = 0.0;
  double st = 0.0;
  double sm = 0.0;
  double total = 0.0;
  ScalarGrid gradient;
};

// (1/|Omega|) sum Q |d - dbar| over all pixels; subgradient 0 at equality.
TermValue loss_md(const DepthGrid& depth, const DepthGrid& distilled, const MonitorGrid& monitor);

// Mean over valid (pixel, view) pairs of (1-Q) * mean_c |I_hat - I_t|.
TermValue loss_color(const DepthGrid& depth, const ImageGrid& target,
                     std::span<const AdjacentView> views, const CameraIntrinsics& K,
                     const MonitorGrid& monitor);

// Mean over valid (pixel, view) pairs of (1-Q) * (1 - SSIM(I_hat, I_t)).
TermValue loss_structural(const DepthGrid& depth, const ImageGrid& target,
                          std::span<const AdjacentView> views, const CameraIntrinsics& K,
                          const MonitorGrid& monitor);

// Edge-aware forward-difference smoothness weighted by (1-Q), normalized by
// the pixel count.
TermValue loss_smoothness(const DepthGrid& depth, const ImageGrid& target, const MonitorGrid& monitor);

// Weighted sum of the four terms. Terms with zero weight are skipped and
// reported as 0.
LossBreakdown total_loss(const DepthGrid& depth, const SceneBundle& scene,
                         const DistillationProduct& product, const LossWeights& weights);

}  // namespace mondi
