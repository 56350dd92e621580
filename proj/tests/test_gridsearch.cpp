#include <atomic>
#include <random>
#include <sstream>

#include "blockwise/errors.hpp"
#include "blockwise/gridsearch.hpp"
#include "doctest.h"

using namespace blockwise;

namespace {

DatasetDescriptor dims(std::uint64_t rows, std::uint64_t cols) {
  DatasetDescriptor d;
  d.rows = rows;
  d.cols = cols;
  return d;
}

AlgorithmDescriptor any_algo() { return {"kmeans", TaskKind::clustering, RunMode::train}; }

}  // namespace

TEST_CASE("grid_shape on exact powers") {
  CHECK(grid_shape(64, 2).k == 6);
  CHECK(grid_shape(64, 2).exact);
  CHECK(grid_shape(256, 2).k == 8);
  CHECK(grid_shape(2, 2).k == 1);
  CHECK(grid_shape(81, 3).k == 4);
}

TEST_CASE("grid_shape floors non-powers and reports it") {
  GridShape s = grid_shape(48, 2);
  CHECK(s.k == 5);  // 2^5 = 32 <= 48 < 64
  CHECK_FALSE(s.exact);
}

TEST_CASE("grid_shape input validation") {
  CHECK_THROWS_AS(grid_shape(64, 1), InvalidStep);
  CHECK_THROWS_AS(grid_shape(64, 0), InvalidStep);
  CHECK_THROWS_AS(grid_shape(1, 2), InvalidField);
}

TEST_CASE("run_grid_search picks the argmin of an explicit 2x2 matrix") {
  // cores = 4, step 2 -> k = 2; times [[9,4],[6,5]] laid out by (i,j)
  Executor exec = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                     const EnvironmentDescriptor&, const Partitioning& p) {
    if (p == Partitioning{2, 2}) return TrialTime::of_seconds(9);
    if (p == Partitioning{2, 4}) return TrialTime::of_seconds(4);
    if (p == Partitioning{4, 2}) return TrialTime::of_seconds(6);
    return TrialTime::of_seconds(5);
  };
  GridSearchOutcome out =
      run_grid_search(dims(1000, 1000), any_algo(), EnvironmentDescriptor{1, 4, 1 << 30}, exec);
  CHECK(out.grid.k == 2);
  CHECK(out.best.best == Partitioning{2, 4});
  CHECK(out.best.best_time == 4.0);
  CHECK(out.executor_calls == 4);
  CHECK(out.grid.complete());
}

TEST_CASE("run_grid_search throws when every cell fails") {
  Executor exec = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                     const EnvironmentDescriptor&,
                     const Partitioning&) { return TrialTime::failed(); };
  CHECK_THROWS_AS(
      run_grid_search(dims(100, 100), any_algo(), EnvironmentDescriptor{1, 4, 1 << 20}, exec),
      AllCellsFailed);
}

TEST_CASE("coincident clamped cells share one executor call") {
  // cols = 3 clamps every p_c in {4, ..., 64} to 3
  std::atomic<int> calls{0};
  Executor exec = [&calls](const DatasetDescriptor&, const AlgorithmDescriptor&,
                           const EnvironmentDescriptor&, const Partitioning& p) {
    ++calls;
    return TrialTime::of_seconds(double(p.p_r * 100 + p.p_c));
  };
  EnvironmentDescriptor e{1, 64, 1ULL << 40};  // k = 6
  GridSearchOutcome out = run_grid_search(dims(1 << 20, 3), any_algo(), e, exec);
  // distinct partitionings: 6 p_r values x {2, 3} = 12 instead of 36
  CHECK(out.executor_calls == 12);
  CHECK(calls.load() == 12);
  CHECK(out.grid.cells.size() == 36);
  // coincident cells carry the same measured time
  CHECK(out.grid.cell(1, 2).part == out.grid.cell(1, 6).part);
  CHECK(*out.grid.cell(1, 2).time == *out.grid.cell(1, 6).time);
}

TEST_CASE("selected cell equals a brute-force scan of the finished grid") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 50; ++round) {
    std::uint64_t seed = rng();
    Executor exec = [seed](const DatasetDescriptor& d, const AlgorithmDescriptor&,
                           const EnvironmentDescriptor&, const Partitioning& p) {
      std::uint64_t h = seed;
      h = h * 1000003 + d.rows;
      h = h * 1000003 + p.p_r * 31 + p.p_c;
      h = h ^ (h >> 13);
      if (h % 7 == 0) return TrialTime::failed();
      return TrialTime::of_seconds(double(h % 1000) + 1.0);
    };
    EnvironmentDescriptor e{1, 16, 1ULL << 40};
    DatasetDescriptor d = dims(rng() % 100000 + 100, rng() % 1000 + 10);
    GridSearchOutcome out;
    try {
      out = run_grid_search(d, any_algo(), e, exec);
    } catch (const AllCellsFailed&) {
      continue;
    }
    const GridCell* best = nullptr;
    for (const GridCell& cell : out.grid.cells) {
      if (cell.time->is_failed()) continue;
      if (!best || better_trial(*cell.time, cell.part, *best->time, best->part)) best = &cell;
    }
    REQUIRE(best != nullptr);
    CHECK(out.best.best == best->part);
    CHECK(out.best.best_time == best->time->seconds());
  }
}

TEST_CASE("parallel execution gives the sequential result") {
  Executor exec = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                     const EnvironmentDescriptor&, const Partitioning& p) {
    return TrialTime::of_seconds(double((p.p_r * 7919 + p.p_c * 104729) % 997 + 1));
  };
  EnvironmentDescriptor e{2, 32, 1ULL << 40};  // 64 cores, k = 6
  DatasetDescriptor d = dims(1 << 18, 1 << 10);
  GridSearchOptions seq;
  GridSearchOptions par;
  par.parallelism = 8;
  GridSearchOutcome a = run_grid_search(d, any_algo(), e, exec, seq);
  GridSearchOutcome b = run_grid_search(d, any_algo(), e, exec, par);
  CHECK(a.best == b.best);
  REQUIRE(a.grid.cells.size() == b.grid.cells.size());
  for (std::size_t n = 0; n < a.grid.cells.size(); ++n)
    CHECK(*a.grid.cells[n].time == *b.grid.cells[n].time);
}

TEST_CASE("exhaustive_report sorts ascending with the shared tie-break") {
  Executor exec = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                     const EnvironmentDescriptor&, const Partitioning& p) {
    if (p == Partitioning{2, 2}) return TrialTime::of_seconds(9);
    if (p == Partitioning{2, 4}) return TrialTime::of_seconds(4);
    if (p == Partitioning{4, 2}) return TrialTime::of_seconds(6);
    return TrialTime::of_seconds(5);
  };
  GridSearchOutcome out =
      run_grid_search(dims(1000, 1000), any_algo(), EnvironmentDescriptor{1, 4, 1 << 30}, exec);
  std::vector<GridEntry> report = exhaustive_report(out.grid);
  REQUIRE(report.size() == 4);
  CHECK(report[0].part == Partitioning{2, 4});
  CHECK(report[0].time_seconds == 4.0);
  CHECK(report[1].part == Partitioning{4, 4});
  CHECK(report[2].part == Partitioning{4, 2});
  CHECK(report[3].part == Partitioning{2, 2});
}

TEST_CASE("exhaustive_report: single cell and FAILED exclusion") {
  Executor one = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                    const EnvironmentDescriptor&,
                    const Partitioning&) { return TrialTime::of_seconds(7); };
  GridSearchOutcome single =
      run_grid_search(dims(100, 100), any_algo(), EnvironmentDescriptor{1, 2, 1 << 30}, one);
  std::vector<GridEntry> report = exhaustive_report(single.grid);
  REQUIRE(report.size() == 1);
  CHECK(report[0].part == Partitioning{2, 2});
  CHECK(report[0].time_seconds == 7.0);

  Executor mixed = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                      const EnvironmentDescriptor&, const Partitioning& p) {
    if (p.p_r == 2) return TrialTime::failed();
    return TrialTime::of_seconds(double(p.p_c));
  };
  GridSearchOutcome half =
      run_grid_search(dims(1000, 1000), any_algo(), EnvironmentDescriptor{1, 4, 1 << 30}, mixed);
  CHECK(exhaustive_report(half.grid).size() == 2);
}

TEST_CASE("grid file round trip, including PENDING cells") {
  SearchGrid grid;
  grid.step = 2;
  grid.k = 2;
  grid.cells = {
      {1, 1, {2, 2}, TrialTime::of_seconds(1.5)},
      {1, 2, {2, 4}, TrialTime::failed()},
      {2, 1, {4, 2}, std::nullopt},
      {2, 2, {4, 4}, TrialTime::of_seconds(0.25)},
  };
  std::ostringstream out;
  write_grid(out, grid);
  std::istringstream in(out.str());
  SearchGrid back = read_grid(in);
  CHECK(back.step == grid.step);
  CHECK(back.k == grid.k);
  REQUIRE(back.cells.size() == 4);
  CHECK(*back.cell(1, 1).time == TrialTime::of_seconds(1.5));
  CHECK(back.cell(1, 2).time->is_failed());
  CHECK_FALSE(back.cell(2, 1).time.has_value());
  CHECK(back.cell(2, 2).part == Partitioning{4, 4});
}

TEST_CASE("resuming a partial grid only evaluates pending cells") {
  std::atomic<int> calls{0};
  Executor exec = [&calls](const DatasetDescriptor&, const AlgorithmDescriptor&,
                           const EnvironmentDescriptor&, const Partitioning& p) {
    ++calls;
    return TrialTime::of_seconds(double(p.p_r + p.p_c));
  };
  EnvironmentDescriptor e{1, 4, 1ULL << 30};
  DatasetDescriptor d = dims(512, 512);

  GridSearchOutcome full = run_grid_search(d, any_algo(), e, exec);
  CHECK(calls.exchange(0) == 4);

  SearchGrid partial = full.grid;
  partial.cell(1, 2).time.reset();
  partial.cell(2, 2).time.reset();
  GridSearchOptions opts;
  opts.resume = &partial;
  GridSearchOutcome resumed = run_grid_search(d, any_algo(), e, exec, opts);
  CHECK(calls.load() == 2);
  CHECK(resumed.executor_calls == 2);
  for (std::size_t n = 0; n < full.grid.cells.size(); ++n)
    CHECK(*resumed.grid.cells[n].time == *full.grid.cells[n].time);
  CHECK(resumed.best == full.best);
}

TEST_CASE("resume rejects a grid from different settings") {
  Executor exec = [](const DatasetDescriptor&, const AlgorithmDescriptor&,
                     const EnvironmentDescriptor&,
                     const Partitioning&) { return TrialTime::of_seconds(1); };
  EnvironmentDescriptor e{1, 4, 1 << 30};
  GridSearchOutcome out = run_grid_search(dims(512, 512), any_algo(), e, exec);
  GridSearchOptions opts;
  opts.resume = &out.grid;
  // different dataset -> different clamped partitionings is fine here (512 vs
  // 1024 not clamped), so use a mismatching environment instead: k changes.
  CHECK_THROWS_AS(
      run_grid_search(dims(512, 512), any_algo(), EnvironmentDescriptor{1, 8, 1 << 30}, exec, opts),
      InputError);
}
