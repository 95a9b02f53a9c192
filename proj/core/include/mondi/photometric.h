#pragma once

#include <span>

#include "mondi/geometry.h"
#include "mondi/grid.h"

namespace mondi {

// SSIM stabilizers for intensities in [0,1].
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
// Side length of the square SSIM window.
inline constexpr int kSsimWindow = 3;

struct SsimMap {
  ScalarGrid score;  // in [-1, 1] where valid
  Mask valid;
};

// Windowed SSIM averaged over channels. Window statistics use only pixels
// that are valid in `mask` (and inside the image); a score is produced for
// every valid center pixel.
SsimMap ssim_map(const ImageGrid& a, const ImageGrid& b, const Mask& mask);

// Same as ssim_map, and additionally accumulates into `grad_a` the gradient
// of sum_x upstream(x) * score(x) with respect to every entry of `a`.
// `grad_a` must have the shape of `a`; it is overwritten.
SsimMap ssim_map_vjp(const ImageGrid& a, const ImageGrid& b, const Mask& mask,
                     const ScalarGrid& upstream, ImageGrid& grad_a);

// Mean over the views valid at x of (1 - SSIM(reconstruction, target)).
// Invalid where no view is valid. Result lies in [0, 2].
ErrorMap photometric_error(const ImageGrid& target, std::span<const Reprojection> reconstructions);

// Mean absolute channel difference on valid pixels.
ErrorMap color_error(const ImageGrid& target, const ImageGrid& reconstruction, const Mask& mask);

}  // namespace mondi
