#include "mondi/photometric.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mondi/parallel.h"

namespace mondi {
namespace {

constexpr int kRadius = kSsimWindow / 2;

struct WindowMoments {
  double n = 0, sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
};

// SSIM of one window plus the partials needed for d(SSIM)/d(a_y):
//   d/d a_y = k0 + k1 * b_y + k2 * a_y   for every valid y in the window.
struct SsimTerms {
  double score;
  double k0, k1, k2;
};

SsimTerms ssim_terms(const WindowMoments& m) {
  const double inv_n = 1.0 / m.n;
  const double mu_a = m.sa * inv_n;
  const double mu_b = m.sb * inv_n;
  const double var_a = m.saa * inv_n - mu_a * mu_a;
  const double var_b = m.sbb * inv_n - mu_b * mu_b;
  const double cov = m.sab * inv_n - mu_a * mu_b;

  const double n1 = 2.0 * mu_a * mu_b + kSsimC1;
  const double n2 = 2.0 * cov + kSsimC2;
  const double d1 = mu_a * mu_a + mu_b * mu_b + kSsimC1;
  const double d2 = var_a + var_b + kSsimC2;
  const double s = (n1 * n2) / (d1 * d2);

  const double ds_dmu_a = 2.0 * mu_b * n2 / (d1 * d2) - s * 2.0 * mu_a / d1;
  const double ds_dcov = 2.0 * n1 / (d1 * d2);
  const double ds_dvar_a = -s / d2;

  // dmu_a/da_y = 1/n, dcov/da_y = (b_y - mu_b)/n, dvar_a/da_y = 2 (a_y - mu_a)/n.
  SsimTerms t;
  t.score = s;
  t.k0 = inv_n * (ds_dmu_a - ds_dcov * mu_b - 2.0 * ds_dvar_a * mu_a);
  t.k1 = inv_n * ds_dcov;
  t.k2 = inv_n * 2.0 * ds_dvar_a;
  return t;
}

void check_shapes(const ImageGrid& a, const ImageGrid& b, const Mask& mask, const char* who) {
  if (!a.same_shape(b) || !a.same_shape(mask))
    throw InvalidInput(std::string(who) + ": dimension mismatch");
}

// Windowed SSIM over masked pixels. When `upstream` is given, also fills
// `grad_a` with d(sum_x upstream(x) score(x)) / d a. kC > 0 fixes the channel
// count at compile time; kC == 0 reads it from the image.
template <int kC>
SsimMap ssim_core(const ImageGrid& a, const ImageGrid& b, const Mask& mask,
                  const ScalarGrid* upstream, ImageGrid* grad_a) {
  static_assert(kRadius == 1, "separable sums assume a 3x3 window");
  const int H = a.height;
  const int W = a.width;
  const int C = kC > 0 ? kC : a.channels;
  const std::size_t N = static_cast<std::size_t>(H) * W;
  const double inv_c = C > 0 ? 1.0 / C : 0.0;

  SsimMap out{ScalarGrid(H, W, 0.0), mask};
  if (N == 0 || C == 0) return out;

  // Horizontal 1x3 sums of the per-pixel moments, then vertical 3x1 sums.
  const std::size_t stride = static_cast<std::size_t>(C) * 5 + 1;
  std::vector<double> rows(N * stride, 0.0);
  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      double* dst = &rows[(static_cast<std::size_t>(y) * W + x) * stride];
      for (int xx = std::max(0, x - 1); xx <= std::min(W - 1, x + 1); ++xx) {
        const std::size_t j = static_cast<std::size_t>(y) * W + xx;
        if (!mask.data[j]) continue;
        dst[0] += 1.0;
        for (int c = 0; c < C; ++c) {
          const double va = a.data[j * C + c];
          const double vb = b.data[j * C + c];
          double* m = dst + 1 + 5 * c;
          m[0] += va;
          m[1] += vb;
          m[2] += va * va;
          m[3] += vb * vb;
          m[4] += va * vb;
        }
      }
    }
  });

  // Per center and channel: (k0, k1, k2) scaled by the upstream weight.
  const std::size_t cs = static_cast<std::size_t>(C) * 3;
  std::vector<double> coeff(upstream ? N * cs : 0, 0.0);
  parallel_rows(H, [&](int y) {
    const int y0 = std::max(0, y - 1);
    const int y1 = std::min(H - 1, y + 1);
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!mask.data[i]) continue;
      const double* r0 = &rows[(static_cast<std::size_t>(y0) * W + x) * stride];
      const double* r1 = &rows[(static_cast<std::size_t>(y) * W + x) * stride];
      const double* r2 = &rows[(static_cast<std::size_t>(y1) * W + x) * stride];
      const double n = r1[0] + (y0 < y ? r0[0] : 0.0) + (y1 > y ? r2[0] : 0.0);
      double score = 0.0;
      for (int c = 0; c < C; ++c) {
        WindowMoments w{n, 0, 0, 0, 0, 0};
        const std::size_t o = 1 + 5 * static_cast<std::size_t>(c);
        double* m[5] = {&w.sa, &w.sb, &w.saa, &w.sbb, &w.sab};
        for (int k = 0; k < 5; ++k)
          *m[k] = r1[o + k] + (y0 < y ? r0[o + k] : 0.0) + (y1 > y ? r2[o + k] : 0.0);
        const SsimTerms t = ssim_terms(w);
        score += t.score;
        if (upstream) {
          const double g = upstream->data[i] * inv_c;
          double* k = &coeff[i * cs + 3 * c];
          k[0] = g * t.k0;
          k[1] = g * t.k1;
          k[2] = g * t.k2;
        }
      }
      out.score.data[i] = score * inv_c;
    }
  });
  if (!upstream) return out;

  // Each pixel collects the coefficients of the centers whose windows
  // contain it. The window is symmetric, so this is another box sum.
  std::vector<double> hsum(N * cs, 0.0);
  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      double* dst = &hsum[(static_cast<std::size_t>(y) * W + x) * cs];
      for (int xx = std::max(0, x - 1); xx <= std::min(W - 1, x + 1); ++xx) {
        const double* src = &coeff[(static_cast<std::size_t>(y) * W + xx) * cs];
        for (std::size_t k = 0; k < cs; ++k) dst[k] += src[k];
      }
    }
  });
  parallel_rows(H, [&](int y) {
    const int y0 = std::max(0, y - 1);
    const int y1 = std::min(H - 1, y + 1);
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!mask.data[i]) {
        for (int c = 0; c < C; ++c) grad_a->data[i * C + c] = 0.0;
        continue;
      }
      const double* r0 = &hsum[(static_cast<std::size_t>(y0) * W + x) * cs];
      const double* r1 = &hsum[(static_cast<std::size_t>(y) * W + x) * cs];
      const double* r2 = &hsum[(static_cast<std::size_t>(y1) * W + x) * cs];
      for (int c = 0; c < C; ++c) {
        double k[3];
        for (int j = 0; j < 3; ++j) {
          const std::size_t o = 3 * static_cast<std::size_t>(c) + j;
          k[j] = r1[o] + (y0 < y ? r0[o] : 0.0) + (y1 > y ? r2[o] : 0.0);
        }
        grad_a->data[i * C + c] = k[0] + k[1] * b.data[i * C + c] + k[2] * a.data[i * C + c];
      }
    }
  });
  return out;
}

SsimMap ssim_dispatch(const ImageGrid& a, const ImageGrid& b, const Mask& mask,
                      const ScalarGrid* upstream, ImageGrid* grad_a) {
  switch (a.channels) {
    case 1: return ssim_core<1>(a, b, mask, upstream, grad_a);
    case 3: return ssim_core<3>(a, b, mask, upstream, grad_a);
    default: return ssim_core<0>(a, b, mask, upstream, grad_a);
  }
}

}  // namespace

SsimMap ssim_map(const ImageGrid& a, const ImageGrid& b, const Mask& mask) {
  check_shapes(a, b, mask, "ssim_map");
  return ssim_dispatch(a, b, mask, nullptr, nullptr);
}

SsimMap ssim_map_vjp(const ImageGrid& a, const ImageGrid& b, const Mask& mask,
                     const ScalarGrid& upstream, ImageGrid& grad_a) {
  check_shapes(a, b, mask, "ssim_map_vjp");
  if (!a.same_shape(upstream) || !grad_a.same_shape(a))
    throw InvalidInput("ssim_map_vjp: gradient buffers must match the image");
  return ssim_dispatch(a, b, mask, &upstream, &grad_a);
}

ErrorMap photometric_error(const ImageGrid& target, std::span<const Reprojection> reconstructions) {
  if (reconstructions.empty()) throw InvalidInput("photometric_error: empty view list");
  const int H = target.height;
  const int W = target.width;
  ScalarGrid sum(H, W, 0.0);
  Grid<int, ScalarTag> count(H, W, 0);
  for (const Reprojection& r : reconstructions) {
    const SsimMap s = ssim_map(r.image, target, r.mask);
    for (std::size_t i = 0; i < sum.size(); ++i) {
      if (!r.mask.data[i]) continue;
      // SSIM <= 1 analytically; drop rounding overshoot.
      sum.data[i] += std::max(0.0, 1.0 - s.score.data[i]);
      ++count.data[i];
    }
  }
  ErrorMap out(H, W);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count.data[i] == 0) continue;
    out.value.data[i] = sum.data[i] / count.data[i];
    out.valid.data[i] = 1;
  }
  return out;
}

ErrorMap color_error(const ImageGrid& target, const ImageGrid& reconstruction, const Mask& mask) {
  check_shapes(target, reconstruction, mask, "color_error");
  ErrorMap out(target.height, target.width);
  const double inv_c = target.channels > 0 ? 1.0 / target.channels : 0.0;
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      if (!mask(y, x)) continue;
      double acc = 0.0;
      for (int c = 0; c < target.channels; ++c)
        acc += std::abs(reconstruction(y, x, c) - target(y, x, c));
      out.value(y, x) = acc * inv_c;
      out.valid(y, x) = 1;
    }
  }
  return out;
}

}  // namespace mondi
