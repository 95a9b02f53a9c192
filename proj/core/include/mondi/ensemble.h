#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mondi/grid.h"

namespace mondi {

// A dense depth prediction from one pretrained teacher. `id` is 1-based.
struct TeacherHypothesis {
  int id = 0;
  DepthGrid depth;
};

struct DistillationProduct {
  DepthGrid distilled;         // pixel-wise selection from the ensemble
  ErrorMap residual;           // min_i E_i, valid where any E_i is valid
  MonitorGrid monitor;         // exp(-lambda * residual); 0 where residual is invalid
  IndexGrid selection;         // 1-based teacher index, 0 where no teacher is valid
  std::vector<double> betas;   // per-teacher weights
  std::vector<double> z_scores;  // per-teacher sparse deviation, meters
};

inline constexpr int kDefaultNeighborhood = 7;
inline constexpr double kDefaultAlpha = 0.10;
inline constexpr double kDefaultLambda = 0.10;

// Mean absolute deviation of a teacher from the sparse points over k x k
// windows around each point. Windows are clipped at the border but the
// normalizer stays k^2 * |z|.
double sparse_deviation(const DepthGrid& teacher, const DepthGrid& sparse, int k);

// 1 - exp(-alpha * z).
double teacher_weight(double z_score, double alpha);

// beta * P, keeping P's validity.
ErrorMap weighted_residual(const ErrorMap& photometric, double beta);

// Per-pixel argmin over the weighted residuals (ties go to the lowest index),
// aggregated residual, and monitor. Pixels with no valid residual get monitor
// 0, selection 0, and the per-pixel median of the teachers as a placeholder
// depth. `betas` and `z_scores` are left empty for the caller to fill.
DistillationProduct distill(std::span<const TeacherHypothesis> teachers,
                            std::span<const ErrorMap> residuals, double lambda);

enum class BaselineMode { kMean, kMedian, kRandom };

// Naive ensembles: per-pixel mean, per-pixel median (even counts average the
// two central values), or a whole map from one teacher drawn with `seed`.
DepthGrid baseline_ensemble(std::span<const TeacherHypothesis> teachers, BaselineMode mode,
                            std::uint64_t seed);

// 0-based teacher index drawn by the random baseline for `seed`.
int random_teacher_index(int teacher_count, std::uint64_t seed);

struct SelectionHistogram {
  std::vector<double> edges;
  // counts[teacher][bin]; teacher 0-based.
  std::vector<std::vector<long>> counts;

  int bins() const { return static_cast<int>(edges.size()) - 1; }
  long bin_total(int bin) const;
  // Share of a bin selected from `teacher`; nullopt for empty bins.
  std::optional<double> proportion(int teacher, int bin) const;
};

// Counts selected pixels per teacher and distilled-depth bin. Bins are
// half-open [e_k, e_k+1) except the last, which includes its right edge.
SelectionHistogram selection_histogram(const DistillationProduct& product, int teacher_count,
                                       std::span<const double> edges);

}  // namespace mondi
