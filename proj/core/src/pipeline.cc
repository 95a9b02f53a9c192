#include "mondi/pipeline.h"

#include <cmath>

#include "mondi/photometric.h"

namespace mondi {

void EnsembleParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be positive");
  if (neighborhood < 1 || neighborhood % 2 == 0)
    throw InvalidInput("neighborhood k must be odd and >= 1");
}

EnsembleScores score_teachers(const SceneBundle& scene, const EnsembleParams& params,
                              bool force_unit_beta) {
  params.validate();
  scene.validate();
  EnsembleScores out;
  for (const TeacherHypothesis& teacher : scene.teachers) {
    std::vector<Reprojection> warps;
    warps.reserve(scene.views.size());
    for (const AdjacentView& v : scene.views)
      warps.push_back(reproject_image(v.image, teacher.depth, scene.intrinsics, v.pose));
    ErrorMap p = photometric_error(scene.target, warps);
    const double z = sparse_deviation(teacher.depth, scene.sparse, params.neighborhood);
    const double beta = force_unit_beta ? 1.0 : teacher_weight(z, params.alpha);
    out.weighted.push_back(weighted_residual(p, beta));
    out.photometric.push_back(std::move(p));
    out.z_scores.push_back(z);
    out.betas.push_back(beta);
  }
  return out;
}

DistillationProduct monitored_distill(const SceneBundle& scene, const EnsembleParams& params,
                                      bool force_unit_beta, EnsembleScores* scores_out) {
  EnsembleScores scores = score_teachers(scene, params, force_unit_beta);
  DistillationProduct product = distill(scene.teachers, scores.weighted, params.lambda);
  product.betas = scores.betas;
  product.z_scores = scores.z_scores;
  if (scores_out) *scores_out = std::move(scores);
  return product;
}

}  // namespace mondi
