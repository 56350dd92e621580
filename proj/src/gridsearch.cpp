#include "blockwise/gridsearch.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

GridShape grid_shape(std::uint64_t total_cores, int step) {
  if (step < 2) throw InvalidStep("grid step must be >= 2, got " + std::to_string(step));
  if (total_cores < static_cast<std::uint64_t>(step))
    throw InvalidField("total_cores",
                       "must be >= step (" + std::to_string(total_cores) + " < " +
                           std::to_string(step) + ")");
  int k = 0;
  std::uint64_t power = 1;
  while (power <= total_cores / step) {
    power *= step;
    ++k;
  }
  return GridShape{k, power == total_cores};
}

bool SearchGrid::complete() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const GridCell& c) { return c.time.has_value(); });
}

namespace {

std::uint64_t pow_u64(int base, int exp) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) v *= static_cast<std::uint64_t>(base);
  return v;
}

SearchGrid blank_grid(const DatasetDescriptor& d, int step, int k) {
  SearchGrid grid;
  grid.step = step;
  grid.k = k;
  grid.cells.reserve(static_cast<std::size_t>(k) * k);
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= k; ++j) {
      GridCell cell;
      cell.i = i;
      cell.j = j;
      cell.part = clamp_partitioning(d, Partitioning{pow_u64(step, i), pow_u64(step, j)});
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

}  // namespace

GridSearchOutcome run_grid_search(const DatasetDescriptor& d, const AlgorithmDescriptor& a,
                                  const EnvironmentDescriptor& e, const Executor& exec,
                                  const GridSearchOptions& options) {
  GridShape shape = grid_shape(e.total_cores(), options.step);
  SearchGrid grid = blank_grid(d, options.step, shape.k);

  if (options.resume) {
    const SearchGrid& prev = *options.resume;
    if (prev.step != grid.step || prev.k != grid.k)
      throw InputError("resume grid has step/k " + std::to_string(prev.step) + "/" +
                       std::to_string(prev.k) + ", expected " + std::to_string(grid.step) + "/" +
                       std::to_string(grid.k));
    for (std::size_t n = 0; n < grid.cells.size(); ++n) {
      if (prev.cells[n].part != grid.cells[n].part)
        throw InputError("resume grid partitionings do not match this dataset");
      grid.cells[n].time = prev.cells[n].time;
    }
  }

  // Coincident clamped cells share one trial. Results already present from a
  // resumed grid seed the memo so those partitionings are not re-run.
  std::map<Partitioning, TrialTime> memo;
  for (const GridCell& cell : grid.cells)
    if (cell.time) memo.emplace(cell.part, *cell.time);

  std::vector<Partitioning> todo;
  for (const GridCell& cell : grid.cells)
    if (!memo.count(cell.part) &&
        std::find(todo.begin(), todo.end(), cell.part) == todo.end())
      todo.push_back(cell.part);

  std::mutex merge_lock;
  auto merge = [&](const Partitioning& part, TrialTime time) {
    std::lock_guard<std::mutex> guard(merge_lock);
    for (GridCell& cell : grid.cells)
      if (!cell.time && cell.part == part) cell.time = time;
    if (options.checkpoint) options.checkpoint(grid);
  };

  unsigned workers = std::max(1u, options.parallelism);
  if (workers == 1 || todo.size() <= 1) {
    for (const Partitioning& part : todo) merge(part, exec(d, a, e, part));
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        std::size_t n = next.fetch_add(1);
        if (n >= todo.size()) return;
        merge(todo[n], exec(d, a, e, todo[n]));
      }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, todo.size()); ++w)
      threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  const GridCell* best = nullptr;
  for (const GridCell& cell : grid.cells) {
    if (cell.time->is_failed()) continue;
    if (!best || better_trial(*cell.time, cell.part, *best->time, best->part)) best = &cell;
  }
  if (!best) throw AllCellsFailed("every cell of the search grid failed");

  GridSearchOutcome outcome;
  outcome.grid = std::move(grid);
  outcome.best = TrainingExample{make_key(d, a, e), best->part, best->time->seconds()};
  outcome.executor_calls = todo.size();
  return outcome;
}

std::vector<GridEntry> exhaustive_report(const SearchGrid& grid) {
  if (!grid.complete()) throw InputError("grid has pending cells");
  std::vector<GridEntry> entries;
  for (const GridCell& cell : grid.cells)
    if (!cell.time->is_failed()) entries.push_back(GridEntry{cell.part, cell.time->seconds()});
  std::sort(entries.begin(), entries.end(), [](const GridEntry& x, const GridEntry& y) {
    return better_trial(TrialTime::of_seconds(x.time_seconds), x.part,
                        TrialTime::of_seconds(y.time_seconds), y.part);
  });
  return entries;
}

void write_grid(std::ostream& out, const SearchGrid& grid) {
  out << "v1\t" << grid.step << '\t' << grid.k << '\n';
  for (const GridCell& cell : grid.cells) {
    out << cell.i << '\t' << cell.j << '\t' << cell.part.p_r << '\t' << cell.part.p_c << '\t';
    if (!cell.time)
      out << "PENDING";
    else if (cell.time->is_failed())
      out << "FAILED";
    else
      out << format_double(cell.time->seconds());
    out << '\n';
  }
}

SearchGrid read_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRecord(1, "empty grid file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_tabs(line);
  if (header.size() != 3 || header[0] != "v1")
    throw MalformedRecord(1, "expected grid header 'v1 <step> <k>'");
  SearchGrid grid;
  grid.step = static_cast<int>(parse_u64(header[1], "step", 1));
  grid.k = static_cast<int>(parse_u64(header[2], "k", 1));
  if (grid.step < 2 || grid.k < 1) throw MalformedRecord(1, "grid header out of range");

  std::size_t expected = static_cast<std::size_t>(grid.k) * grid.k;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 5)
      throw MalformedRecord(line_no, "expected 5 fields in grid cell line");
    GridCell cell;
    cell.i = static_cast<int>(parse_u64(fields[0], "i", line_no));
    cell.j = static_cast<int>(parse_u64(fields[1], "j", line_no));
    cell.part.p_r = parse_u64(fields[2], "p_r", line_no);
    cell.part.p_c = parse_u64(fields[3], "p_c", line_no);
    if (cell.i < 1 || cell.i > grid.k || cell.j < 1 || cell.j > grid.k)
      throw MalformedRecord(line_no, "cell exponents out of range");
    if (cell.part.p_r == 0 || cell.part.p_c == 0)
      throw InvalidField("p_r/p_c", "must be >= 1");
    if (fields[4] == "PENDING")
      cell.time = std::nullopt;
    else if (fields[4] == "FAILED")
      cell.time = TrialTime::failed();
    else
      cell.time = TrialTime::of_seconds(parse_double(fields[4], "time", line_no));
    grid.cells.push_back(cell);
  }
  if (grid.cells.size() != expected)
    throw MalformedRecord(line_no, "expected " + std::to_string(expected) + " grid cells, got " +
                                       std::to_string(grid.cells.size()));
  // Cells must arrive row-major so cell(i, j) indexing is valid.
  for (int i = 1; i <= grid.k; ++i)
    for (int j = 1; j <= grid.k; ++j) {
      const GridCell& cell = grid.cells[static_cast<std::size_t>(i - 1) * grid.k + (j - 1)];
      if (cell.i != i || cell.j != j)
        throw MalformedRecord(0, "grid cells are not in row-major (i, j) order");
    }
  return grid;
}

}  // namespace blockwise
