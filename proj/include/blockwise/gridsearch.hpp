#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "blockwise/domain.hpp"
#include "blockwise/extraction.hpp"
#include "blockwise/simulator.hpp"

namespace blockwise {

/// Grid side length for a core count. k = log_step(total_cores) when exact;
/// otherwise floor of the log with exact=false so callers can warn.
struct GridShape {
  int k = 1;
  bool exact = true;
};

GridShape grid_shape(std::uint64_t total_cores, int step);  // throws InvalidStep

struct GridCell {
  int i = 1;  // row exponent, p_r = step^i before clamping
  int j = 1;
  Partitioning part;             // clamped to the dataset
  std::optional<TrialTime> time; // nullopt = PENDING
};

/// The k x k trial matrix over partitionings (step^i, step^j), i,j in [1..k].
struct SearchGrid {
  int step = 2;
  int k = 1;
  std::vector<GridCell> cells;  // row-major, k*k entries

  GridCell& cell(int i, int j) { return cells[static_cast<std::size_t>(i - 1) * k + (j - 1)]; }
  const GridCell& cell(int i, int j) const {
    return cells[static_cast<std::size_t>(i - 1) * k + (j - 1)];
  }
  bool complete() const;
};

struct GridSearchOptions {
  int step = 2;
  unsigned parallelism = 1;              // concurrent executor calls
  const SearchGrid* resume = nullptr;    // partial grid to continue from

  // Called with the partially filled grid after each new result lands
  // (serialized by a lock when cells run concurrently). Lets callers persist
  // progress so an interrupted search can resume.
  std::function<void(const SearchGrid&)> checkpoint;
};

struct GridSearchOutcome {
  SearchGrid grid;
  TrainingExample best;           // argmin cell, extraction tie-break order
  std::size_t executor_calls = 0; // distinct partitionings evaluated this run
};

/// Fill the grid via the executor and label the configuration with the
/// argmin cell. Cells whose clamped partitionings coincide share a single
/// executor call. Throws AllCellsFailed when no finite cell exists.
GridSearchOutcome run_grid_search(const DatasetDescriptor& d, const AlgorithmDescriptor& a,
                                  const EnvironmentDescriptor& e, const Executor& exec,
                                  const GridSearchOptions& options = {});

/// Finite cells sorted ascending by (time, blocks, p_r, p_c).
struct GridEntry {
  Partitioning part;
  double time_seconds;
};
std::vector<GridEntry> exhaustive_report(const SearchGrid& grid);

// Grid persistence (resumable): header "v1 <step> <k>", then k*k lines
// "<i> <j> <p_r> <p_c> <time|FAILED|PENDING>".
void write_grid(std::ostream& out, const SearchGrid& grid);
SearchGrid read_grid(std::istream& in);

}  // namespace blockwise
