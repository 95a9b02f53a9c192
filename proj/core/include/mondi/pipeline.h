#pragma once

#include <vector>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"
#include "mondi/geometry.h"

namespace mondi {

struct EnsembleParams {
  double alpha = kDefaultAlpha;
  double lambda = kDefaultLambda;
  int neighborhood = kDefaultNeighborhood;

  void validate() const;
};

// Intermediate per-teacher quantities of monitored distillation.
struct EnsembleScores {
  std::vector<ErrorMap> photometric;  // P_i
  std::vector<ErrorMap> weighted;     // E_i = beta_i P_i
  std::vector<double> z_scores;
  std::vector<double> betas;
};

// Warps every adjacent view through each teacher, scores it against the
// target and the sparse points. With force_unit_beta every beta is 1 (the
// photometric-only ablation); Z is still reported.
EnsembleScores score_teachers(const SceneBundle& scene, const EnsembleParams& params,
                              bool force_unit_beta = false);

// score_teachers followed by distill; betas and z_scores are copied into the
// product.
DistillationProduct monitored_distill(const SceneBundle& scene, const EnsembleParams& params,
                                      bool force_unit_beta = false,
                                      EnsembleScores* scores_out = nullptr);

}  // namespace mondi
