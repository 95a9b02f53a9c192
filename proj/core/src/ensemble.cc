#include "mondi/ensemble.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mondi/parallel.h"

namespace mondi {
namespace {

double pixel_median(std::span<const TeacherHypothesis> teachers, std::size_t i,
                    std::vector<double>& scratch) {
  scratch.clear();
  for (const auto& t : teachers) scratch.push_back(t.depth.data[i]);
  std::sort(scratch.begin(), scratch.end());
  const std::size_t m = scratch.size();
  return m % 2 == 1 ? scratch[m / 2] : 0.5 * (scratch[m / 2 - 1] + scratch[m / 2]);
}

void check_teachers(std::span<const TeacherHypothesis> teachers, const char* who) {
  if (teachers.empty()) throw InvalidInput(std::string(who) + ": no teachers");
  for (const auto& t : teachers) {
    if (!t.depth.same_shape(teachers.front().depth))
      throw InvalidInput(std::string(who) + ": teacher dimensions differ");
  }
}

}  // namespace

double sparse_deviation(const DepthGrid& teacher, const DepthGrid& sparse, int k) {
  if (k < 1 || k % 2 == 0) throw InvalidInput("sparse_deviation: k must be odd and >= 1");
  if (!teacher.same_shape(sparse)) throw InvalidInput("sparse_deviation: dimension mismatch");
  const int r = k / 2;
  const int H = sparse.height;
  const int W = sparse.width;

  std::vector<double> row_sum(H, 0.0);
  std::vector<long> row_points(H, 0);
  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      const double z = sparse(y, x);
      if (!(z > 0.0)) continue;
      ++row_points[y];
      for (int yy = std::max(0, y - r); yy <= std::min(H - 1, y + r); ++yy)
        for (int xx = std::max(0, x - r); xx <= std::min(W - 1, x + r); ++xx)
          row_sum[y] += std::abs(teacher(yy, xx) - z);
    }
  });
  double total = 0.0;
  long points = 0;
  for (int y = 0; y < H; ++y) {
    total += row_sum[y];
    points += row_points[y];
  }
  if (points == 0) throw InvalidInput("sparse_deviation: sparse map has no valid points");
  return total / (static_cast<double>(k) * k * points);
}

double teacher_weight(double z_score, double alpha) { return 1.0 - std::exp(-alpha * z_score); }

ErrorMap weighted_residual(const ErrorMap& photometric, double beta) {
  ErrorMap out = photometric;
  for (std::size_t i = 0; i < out.value.size(); ++i) {
    out.value.data[i] = out.valid.data[i] ? beta * photometric.value.data[i] : 0.0;
  }
  return out;
}

DistillationProduct distill(std::span<const TeacherHypothesis> teachers,
                            std::span<const ErrorMap> residuals, double lambda) {
  check_teachers(teachers, "distill");
  if (residuals.size() != teachers.size())
    throw InvalidInput("distill: one residual map per teacher is required");
  if (!(lambda > 0.0)) throw InvalidInput("distill: lambda must be positive");
  const int H = teachers.front().depth.height;
  const int W = teachers.front().depth.width;
  for (const auto& t : teachers) {
    for (double d : t.depth.data)
      if (!(d > 0.0)) throw InvalidInput("distill: teacher depths must be strictly positive");
  }
  for (const auto& e : residuals) {
    if (e.height() != H || e.width() != W)
      throw InvalidInput("distill: residual dimensions differ from teachers");
  }

  DistillationProduct out;
  out.distilled = DepthGrid(H, W, 0.0);
  out.residual = ErrorMap(H, W);
  out.monitor = MonitorGrid(H, W, 0.0);
  out.selection = IndexGrid(H, W, 0);

  parallel_rows(H, [&](int y) {
    std::vector<double> scratch;
    for (int x = 0; x < W; ++x) {
      const std::size_t i = out.distilled.index(y, x);
      int best = -1;
      double best_err = 0.0;
      for (std::size_t m = 0; m < residuals.size(); ++m) {
        if (!residuals[m].valid.data[i]) continue;
        const double e = residuals[m].value.data[i];
        if (best < 0 || e < best_err) {
          best = static_cast<int>(m);
          best_err = e;
        }
      }
      if (best < 0) {
        out.distilled.data[i] = pixel_median(teachers, i, scratch);
        continue;
      }
      out.selection.data[i] = best + 1;
      out.distilled.data[i] = teachers[best].depth.data[i];
      out.residual.value.data[i] = best_err;
      out.residual.valid.data[i] = 1;
      out.monitor.data[i] = std::exp(-lambda * best_err);
    }
  });
  return out;
}

int random_teacher_index(int teacher_count, std::uint64_t seed) {
  if (teacher_count <= 0) throw InvalidInput("random_teacher_index: no teachers");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, teacher_count - 1);
  return pick(rng);
}

DepthGrid baseline_ensemble(std::span<const TeacherHypothesis> teachers, BaselineMode mode,
                            std::uint64_t seed) {
  check_teachers(teachers, "baseline_ensemble");
  const DepthGrid& first = teachers.front().depth;
  switch (mode) {
    case BaselineMode::kRandom:
      return teachers[random_teacher_index(static_cast<int>(teachers.size()), seed)].depth;
    case BaselineMode::kMean: {
      DepthGrid out(first.height, first.width, 0.0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (const auto& t : teachers) acc += t.depth.data[i];
        out.data[i] = acc / static_cast<double>(teachers.size());
      }
      return out;
    }
    case BaselineMode::kMedian: {
      DepthGrid out(first.height, first.width, 0.0);
      std::vector<double> scratch;
      for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = pixel_median(teachers, i, scratch);
      return out;
    }
  }
  throw InvalidInput("baseline_ensemble: unknown mode");
}

long SelectionHistogram::bin_total(int bin) const {
  long total = 0;
  for (const auto& per_teacher : counts) total += per_teacher[bin];
  return total;
}

std::optional<double> SelectionHistogram::proportion(int teacher, int bin) const {
  const long total = bin_total(bin);
  if (total == 0) return std::nullopt;
  return static_cast<double>(counts[teacher][bin]) / static_cast<double>(total);
}

SelectionHistogram selection_histogram(const DistillationProduct& product, int teacher_count,
                                       std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidInput("selection_histogram: need at least two bin edges");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1]))
      throw InvalidInput("selection_histogram: bin edges must be strictly increasing");
  }
  if (teacher_count <= 0) throw InvalidInput("selection_histogram: no teachers");

  SelectionHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(teacher_count, std::vector<long>(edges.size() - 1, 0));
  for (std::size_t i = 0; i < product.selection.size(); ++i) {
    const int sel = product.selection.data[i];
    if (sel <= 0) continue;
    if (sel > teacher_count) throw InvalidInput("selection_histogram: selection index out of range");
    const double d = product.distilled.data[i];
    if (d < edges.front() || d > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), d);
    int bin = static_cast<int>(it - edges.begin()) - 1;
    bin = std::min(bin, h.bins() - 1);
    ++h.counts[sel - 1][bin];
  }
  return h;
}

}  // namespace mondi
