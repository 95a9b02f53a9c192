#pragma once

#include <span>
#include <string>
#include <vector>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"
#include "mondi/losses.h"

namespace mondi {

enum class InitMode { kNearestSparse, kDistilled, kConstant };

std::string to_string(InitMode mode);
InitMode parse_init_mode(const std::string& text);

struct SolverConfig {
  int max_iters = 3000;
  double step_size = 1e-2;  // in log-depth units
  double moment1 = 0.9;
  double moment2 = 0.999;
  double min_depth = 0.2;
  double max_depth = 5.0;
  InitMode init_mode = InitMode::kNearestSparse;
  int log_every = 50;
  // The step decays linearly from step_size to step_size * final_step_fraction
  // over max_iters. 1 keeps the step constant.
  double final_step_fraction = 0.01;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double md = 0.0;
  double co = 0.0;
  double st = 0.0;
  double sm = 0.0;
  double total = 0.0;
};

struct SolveTrace {
  std::vector<TraceEntry> entries;
  DepthGrid final_depth;
};

struct SolveResult {
  DepthGrid depth;
  SolveTrace trace;
};

// nearest_sparse: every pixel takes the value of its nearest sparse point
// (Euclidean; ties to the earliest point in row-major order). distilled: a
// copy of the distilled map. constant: midpoint of [min_depth, max_depth].
DepthGrid initialize_depth(const DepthGrid& sparse, const DepthGrid& distilled, InitMode mode,
                           double min_depth, double max_depth);

// Adam on u = log(depth), clamped to [min_depth, max_depth] after each step.
// Logs iteration 0, every log_every-th iteration and the last one. Throws
// SolverDivergence on a non-finite objective.
SolveResult solve(const SceneBundle& scene, const DistillationProduct& product,
                  const LossWeights& weights, const SolverConfig& config);

// Central differences of total_loss at the given flat pixel indices.
std::vector<double> finite_difference_gradient(const DepthGrid& depth, const SceneBundle& scene,
                                               const DistillationProduct& product,
                                               const LossWeights& weights,
                                               std::span<const int> pixels, double step);

}  // namespace mondi
