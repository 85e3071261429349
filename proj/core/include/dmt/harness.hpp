#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmt/plan.hpp"
#include "dmt/teaching.hpp"

namespace dmt {

/// One (variant, trial) cell of a sweep, flattened for CSV.
struct TrialRecord {
  std::string variant;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string score;
  std::size_t k = 0;
  std::size_t sample_budget = 0;
  bool success = false;
  std::size_t iterations_used = 0;
  std::size_t samples_added = 0;
  std::size_t clean_size = 0;
  double sample_percent = 0.0;
  double total_ms = 0.0;
  std::size_t timed_iterations = 0;  // iteration records behind total_ms
  std::optional<double> accuracy_before;
  std::optional<double> accuracy_after;
  std::size_t budget_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t gggm_steps = 0;
  std::string status = "ok";  // or "error: <message>"

  static TrialRecord from_report(const TeachingReport& report);
};

/// Percentage of trials that succeeded with sample_percent <= cap.
/// Throws MetricError on an empty list.
double compute_csr(std::span<const TeachingReport> reports, double cap);
double compute_csr(std::span<const TrialRecord> records, double cap);

/// Efficiency row. Iterations and sample percent average over successful
/// trials only (empty when none succeeded); time is pooled over all trials,
/// total minutes divided by the number of timed iterations.
struct EfficiencyRow {
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::optional<double> mean_iterations;
  std::optional<double> minutes_per_iteration;
  std::optional<double> mean_sample_percent;

  /// One decimal for iterations and time, two for percent, "—" when empty.
  std::string iterations_text() const;
  std::string time_text() const;
  std::string percent_text() const;
};

EfficiencyRow efficiency_row(std::span<const TeachingReport> reports);
EfficiencyRow efficiency_row(std::span<const TrialRecord> records);

struct CsrPoint {
  double cap = 0.0;
  double csr = 0.0;
};

/// CSR at `points` evenly spaced caps in (0, max_cap].
std::vector<CsrPoint> csr_curve(std::span<const TrialRecord> records, double max_cap,
                                std::size_t points);

struct AggregateRow {
  std::string variant;
  std::string method;
  std::string score;
  std::size_t k = 0;
  double csr = 0.0;
  EfficiencyRow efficiency;
  std::vector<CsrPoint> curve;
};

struct SweepResult {
  std::vector<TrialRecord> records;  // variant-major, trial-minor
  std::vector<AggregateRow> aggregate;
  std::size_t cells_run = 0;
  std::size_t cells_resumed = 0;
};

struct SweepOptions {
  std::filesystem::path out_dir = "out";
  /// Worker threads; 0 reads DMT_WORKERS, falling back to the core count.
  std::size_t workers = 0;
  bool resume = true;
  bool quiet = false;
};

/// Runs every (variant, trial) cell of the plan. Variants share the dataset,
/// targets and seed of each trial. Each finished cell is written to
/// out_dir/cells/ so an interrupted sweep resumes where it stopped. A cell
/// that throws counts as a failed trial. Writes trials.csv, aggregate.csv,
/// csr_curve_<variant>.svg, csr_curves.svg and report.json.
SweepResult run_plan(const ExperimentPlan& plan, const SweepOptions& options);

/// Aggregates records grouped by variant, in first-appearance order.
std::vector<AggregateRow> aggregate(std::span<const TrialRecord> records, double csr_cap,
                                    std::size_t curve_points);

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_trials_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows, double csr_cap);
std::string aggregate_to_json(const std::string& plan_name, std::span<const AggregateRow> rows,
                              double csr_cap);
std::string csr_curve_svg(std::span<const AggregateRow> rows, double max_cap);

/// Recomputes aggregate.csv, curves and report.json from out_dir/trials.csv.
std::vector<AggregateRow> reaggregate(const std::filesystem::path& out_dir, double csr_cap,
                                      std::size_t curve_points);

std::size_t default_workers();

}  // namespace dmt
