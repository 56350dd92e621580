#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "blockwise/domain.hpp"
#include "blockwise/gridsearch.hpp"

namespace blockwise {

/// t_other / t_star. > 1 means the recommended configuration was faster.
double makespan_ratio(double t_other, double t_star);  // throws NonPositiveTime

/// (t_other - t_star) / t_other. Fraction of time saved; negative when the
/// recommendation lost.
double makespan_reduction(double t_other, double t_star);  // throws NonPositiveTime

struct MakespanComparison {
  double t_star = 0.0;
  std::vector<std::pair<Partitioning, double>> times_other;  // finite entries only

  double best_other = 0.0;
  double avg_other = 0.0;
  double worst_other = 0.0;

  double ratio_vs_best = 0.0;
  double ratio_vs_avg = 0.0;
  double ratio_vs_worst = 0.0;
  double reduction_vs_best = 0.0;
  double reduction_vs_avg = 0.0;
  double reduction_vs_worst = 0.0;
};

/// Best/average/worst comparison of t_star against a sweep of other trials.
/// FAILED entries are excluded; throws AllFailed when nothing finite remains.
MakespanComparison compare(double t_star,
                           std::span<const std::pair<Partitioning, TrialTime>> sweep);

/// Tab-separated heatmap table: one row per grid cell with predicted/best
/// marker columns. Times use 6 significant digits, failures the FAILED
/// literal. Exactly one finite cell is flagged best.
void export_heatmap(std::ostream& out, const SearchGrid& grid, const Partitioning& predicted,
                    const Partitioning& best);

}  // namespace blockwise
