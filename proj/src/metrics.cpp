#include "blockwise/metrics.hpp"

#include <cmath>
#include <ostream>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

namespace {

void check_positive(double t, const char* name) {
  if (!std::isfinite(t) || t <= 0.0)
    throw NonPositiveTime(std::string(name) + " must be finite and positive, got " +
                          format_double(t));
}

}  // namespace

double makespan_ratio(double t_other, double t_star) {
  check_positive(t_other, "t_other");
  check_positive(t_star, "t_star");
  return t_other / t_star;
}

double makespan_reduction(double t_other, double t_star) {
  check_positive(t_other, "t_other");
  check_positive(t_star, "t_star");
  return (t_other - t_star) / t_other;
}

MakespanComparison compare(double t_star,
                           std::span<const std::pair<Partitioning, TrialTime>> sweep) {
  check_positive(t_star, "t_star");
  MakespanComparison cmp;
  cmp.t_star = t_star;
  double sum = 0.0;
  for (const auto& [part, time] : sweep) {
    if (time.is_failed()) continue;
    cmp.times_other.emplace_back(part, time.seconds());
    sum += time.seconds();
  }
  if (cmp.times_other.empty()) throw AllFailed("sweep contains no finite time");

  cmp.best_other = cmp.times_other.front().second;
  cmp.worst_other = cmp.times_other.front().second;
  for (const auto& [part, t] : cmp.times_other) {
    cmp.best_other = std::min(cmp.best_other, t);
    cmp.worst_other = std::max(cmp.worst_other, t);
  }
  cmp.avg_other = sum / static_cast<double>(cmp.times_other.size());

  cmp.ratio_vs_best = makespan_ratio(cmp.best_other, t_star);
  cmp.ratio_vs_avg = makespan_ratio(cmp.avg_other, t_star);
  cmp.ratio_vs_worst = makespan_ratio(cmp.worst_other, t_star);
  cmp.reduction_vs_best = makespan_reduction(cmp.best_other, t_star);
  cmp.reduction_vs_avg = makespan_reduction(cmp.avg_other, t_star);
  cmp.reduction_vs_worst = makespan_reduction(cmp.worst_other, t_star);
  return cmp;
}

void export_heatmap(std::ostream& out, const SearchGrid& grid, const Partitioning& predicted,
                    const Partitioning& best) {
  if (!grid.complete()) throw InputError("grid has pending cells");

  // Clamping can make several cells share a partitioning; flag only the
  // first match so each marker appears exactly once.
  const GridCell* predicted_cell = nullptr;
  const GridCell* best_cell = nullptr;
  for (const GridCell& cell : grid.cells) {
    if (!predicted_cell && cell.part == predicted) predicted_cell = &cell;
    if (!best_cell && cell.part == best && !cell.time->is_failed()) best_cell = &cell;
  }

  out << "p_r\tp_c\ttime\tpredicted\tbest\n";
  for (const GridCell& cell : grid.cells) {
    out << cell.part.p_r << '\t' << cell.part.p_c << '\t';
    if (cell.time->is_failed())
      out << "FAILED";
    else
      out << format_sig(cell.time->seconds(), 6);
    out << '\t' << (&cell == predicted_cell ? 1 : 0) << '\t' << (&cell == best_cell ? 1 : 0)
        << '\n';
  }
}

}  // namespace blockwise
