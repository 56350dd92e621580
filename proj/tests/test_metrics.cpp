#include <random>
#include <sstream>

#include "blockwise/errors.hpp"
#include "blockwise/metrics.hpp"
#include "doctest.h"

using namespace blockwise;

// Table 7 measurements: (predicted time, manual time) per test dataset.
static constexpr double kPredicted[3] = {270.0, 1123.0, 1770.0};
static constexpr double kManual[3] = {484.0, 1096.0, 1825.0};

TEST_CASE("makespan_ratio hand-checked values") {
  CHECK(makespan_ratio(484.0, 270.0) == doctest::Approx(1.7926).epsilon(1e-4));
  CHECK(makespan_ratio(100.0, 100.0) == doctest::Approx(1.0));
  CHECK(makespan_ratio(236.0, 270.0) == doctest::Approx(0.8741).epsilon(1e-4));
}

TEST_CASE("makespan_reduction hand-checked values") {
  CHECK(makespan_reduction(484.0, 270.0) == doctest::Approx(0.4421).epsilon(1e-4));
  CHECK(makespan_reduction(5.5, 5.5) == doctest::Approx(0.0));
  // negative when the manual partitioning beat the prediction
  CHECK(makespan_reduction(1096.0, 1123.0) == doctest::Approx(-0.02464).epsilon(1e-3));
}

TEST_CASE("metrics reject non-positive or non-finite times") {
  CHECK_THROWS_AS(makespan_ratio(0.0, 1.0), NonPositiveTime);
  CHECK_THROWS_AS(makespan_ratio(1.0, -2.0), NonPositiveTime);
  CHECK_THROWS_AS(makespan_reduction(std::numeric_limits<double>::infinity(), 1.0),
                  NonPositiveTime);
  CHECK_THROWS_AS(makespan_reduction(1.0, 0.0), NonPositiveTime);
}

TEST_CASE("reduction = 1 - 1/ratio algebraic identity") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> logt(-3.0, 6.0);
  std::uniform_real_distribution<double> logr(-2.0, 2.0);
  for (int n = 0; n < 2000; ++n) {
    double t_star = std::pow(10.0, logt(rng));
    double t_other = t_star * std::pow(10.0, logr(rng));
    double ratio = makespan_ratio(t_other, t_star);
    double reduction = makespan_reduction(t_other, t_star);
    CHECK(std::abs(reduction - (1.0 - 1.0 / ratio)) < 1e-12);
    CHECK((ratio > 1.0) == (reduction > 0.0));
  }
}

TEST_CASE("compare against a single manual partitioning") {
  std::vector<std::pair<Partitioning, TrialTime>> sweep{
      {Partitioning{6, 21}, TrialTime::of_seconds(484.0)}};
  MakespanComparison cmp = compare(270.0, sweep);
  CHECK(cmp.ratio_vs_best == doctest::Approx(1.7926).epsilon(1e-4));
  CHECK(cmp.best_other == 484.0);
  CHECK(cmp.avg_other == 484.0);
  CHECK(cmp.worst_other == 484.0);
}

TEST_CASE("aggregate over the three multi-node measurements") {
  double ratio_sum = 0.0, reduction_sum = 0.0;
  for (int n = 0; n < 3; ++n) {
    std::vector<std::pair<Partitioning, TrialTime>> sweep{
        {Partitioning{1, 1}, TrialTime::of_seconds(kManual[n])}};
    MakespanComparison cmp = compare(kPredicted[n], sweep);
    ratio_sum += cmp.ratio_vs_best;
    reduction_sum += cmp.reduction_vs_best;
  }
  CHECK(ratio_sum / 3.0 == doctest::Approx(1.2666).epsilon(1e-3));
  CHECK(reduction_sum / 3.0 == doctest::Approx(0.1492).epsilon(1e-3));
}

TEST_CASE("compare excludes FAILED entries and orders best <= avg <= worst") {
  std::vector<std::pair<Partitioning, TrialTime>> sweep{
      {Partitioning{2, 2}, TrialTime::of_seconds(12.0)},
      {Partitioning{4, 4}, TrialTime::failed()},
      {Partitioning{8, 8}, TrialTime::of_seconds(4.0)},
      {Partitioning{16, 16}, TrialTime::of_seconds(8.0)},
  };
  MakespanComparison cmp = compare(4.0, sweep);
  CHECK(cmp.times_other.size() == 3);
  CHECK(cmp.best_other == 4.0);
  CHECK(cmp.avg_other == doctest::Approx(8.0));
  CHECK(cmp.worst_other == 12.0);
  CHECK(cmp.best_other <= cmp.avg_other);
  CHECK(cmp.avg_other <= cmp.worst_other);
  // t_star equal to the sweep minimum
  CHECK(cmp.ratio_vs_best == doctest::Approx(1.0));
  CHECK(cmp.reduction_vs_best == doctest::Approx(0.0));
}

TEST_CASE("compare is permutation-invariant") {
  std::vector<std::pair<Partitioning, TrialTime>> sweep;
  std::mt19937_64 rng(5);
  for (int n = 0; n < 20; ++n)
    sweep.emplace_back(Partitioning{rng() % 64 + 1, rng() % 64 + 1},
                       TrialTime::of_seconds(double(rng() % 1000 + 1)));
  MakespanComparison base = compare(17.0, sweep);
  for (int round = 0; round < 10; ++round) {
    std::shuffle(sweep.begin(), sweep.end(), rng);
    MakespanComparison cmp = compare(17.0, sweep);
    CHECK(cmp.best_other == base.best_other);
    CHECK(cmp.avg_other == doctest::Approx(base.avg_other).epsilon(1e-12));
    CHECK(cmp.worst_other == base.worst_other);
  }
}

TEST_CASE("compare with an all-FAILED sweep throws") {
  std::vector<std::pair<Partitioning, TrialTime>> sweep{
      {Partitioning{2, 2}, TrialTime::failed()}};
  CHECK_THROWS_AS(compare(1.0, sweep), AllFailed);
}

namespace {

SearchGrid grid_from_times(int step, int k, const std::vector<std::optional<double>>& times) {
  SearchGrid grid;
  grid.step = step;
  grid.k = k;
  std::uint64_t p = 1;
  std::vector<std::uint64_t> powers;
  for (int i = 1; i <= k; ++i) {
    p *= static_cast<std::uint64_t>(step);
    powers.push_back(p);
  }
  std::size_t n = 0;
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j, ++n) {
      GridCell cell;
      cell.i = i;
      cell.j = j;
      cell.part = Partitioning{powers[i - 1], powers[j - 1]};
      cell.time = times[n] ? TrialTime::of_seconds(*times[n]) : TrialTime::failed();
      grid.cells.push_back(cell);
    }
  return grid;
}

}  // namespace

TEST_CASE("export_heatmap emits one row per cell with marker flags") {
  std::vector<std::optional<double>> times(36);
  for (std::size_t n = 0; n < times.size(); ++n) times[n] = 10.0 + double(n);
  times[7] = 2.5;              // best cell: i=2, j=2 -> (4, 4)
  times[35] = std::nullopt;    // FAILED
  SearchGrid grid = grid_from_times(2, 6, times);

  std::ostringstream out;
  export_heatmap(out, grid, Partitioning{2, 4}, Partitioning{4, 4});
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "p_r\tp_c\ttime\tpredicted\tbest");
  int rows = 0, predicted_flags = 0, best_flags = 0, failed_rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    auto last_tab = line.rfind('\t');
    auto prev_tab = line.rfind('\t', last_tab - 1);
    int best = std::stoi(line.substr(last_tab + 1));
    int predicted = std::stoi(line.substr(prev_tab + 1, last_tab - prev_tab - 1));
    best_flags += best;
    predicted_flags += predicted;
    bool failed = line.find("FAILED") != std::string::npos;
    failed_rows += failed;
    if (failed) CHECK(best == 0);
  }
  CHECK(rows == 36);
  CHECK(predicted_flags == 1);
  CHECK(best_flags == 1);
  CHECK(failed_rows == 1);
}

TEST_CASE("export_heatmap with predicted == best sets both flags on one row") {
  std::vector<std::optional<double>> times{9.0, 4.0, 6.0, 5.0};
  SearchGrid grid = grid_from_times(2, 2, times);
  std::ostringstream out;
  export_heatmap(out, grid, Partitioning{2, 4}, Partitioning{2, 4});
  CHECK(out.str().find("2\t4\t4\t1\t1") != std::string::npos);
}
