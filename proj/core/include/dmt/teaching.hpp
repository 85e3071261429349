#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmt/data.hpp"
#include "dmt/gggm.hpp"
#include "dmt/scoring.hpp"
#include "dmt/selection.hpp"
#include "dmt/student.hpp"

namespace dmt {

enum class CombineStrategy { Addition, Replacement };
enum class SuccessRule { ArgmaxNow, Last5LogitMean };

struct TeachingConfig {
  SelectionPolicy selection;
  GggmConfig gggm;
  ScoreSpec score;
  std::size_t max_iterations = 30;  // T
  CombineStrategy combine = CombineStrategy::Addition;
  TrainConfig train;
  SuccessRule success_rule = SuccessRule::Last5LogitMean;

  void validate(const DatasetSchema& schema) const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t added = 0;  // cumulative
  double sample_percent = 0.0;
  double duration_ms = 0.0;
  std::vector<int> target_predictions;
  bool success = false;
  std::vector<std::int64_t> base_ids;
  std::size_t reselected_perturbed = 0;  // bases that were themselves perturbed items
};

struct TeachingReport {
  std::string method = "dmt";
  bool success = false;
  std::size_t iterations_used = 0;
  std::size_t samples_added = 0;
  std::size_t clean_size = 0;
  double sample_percent = 0.0;
  std::vector<int> initial_predictions;  // on the clean model
  std::vector<IterationRecord> iterations;
  std::optional<double> clean_test_accuracy_before;
  std::optional<double> clean_test_accuracy_after;
  std::size_t perturbed_total = 0;
  std::size_t budget_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t gggm_steps = 0;

  double total_duration_ms() const;
  double mean_iteration_ms() const;
};

struct TeachingOutcome {
  TeachingReport report;
  Dataset final_dataset;
  ModelParams model;
  std::vector<GggmStepTrace> traces;
};

/// Addition appends `perturbed` with fresh ids; Replacement swaps each origin
/// item (named by the perturbed item's provenance) in place, keeping its id.
Dataset combine(const Dataset& previous, const Dataset& perturbed, CombineStrategy strategy);

/// True iff every target is predicted as its target label under `rule`.
bool check_success(const ModelParams& theta, const LogitTrace& trace, const TargetSpec& targets,
                   SuccessRule rule);
/// Per-target predictions under `rule`.
std::vector<int> target_predictions(const ModelParams& theta, const LogitTrace& trace,
                                    const TargetSpec& targets, SuccessRule rule);

/// Training config with seeds derived from the run seed.
TrainConfig seeded_train_config(const TrainConfig& base, std::uint64_t seed);

/// The iterative teaching loop: select, perturb, combine, retrain, check.
/// A success check also runs on the clean model before the first iteration.
TeachingOutcome run_dmt(const Dataset& d_clean, const TargetSpec& targets,
                        const TeachingConfig& cfg, std::uint64_t seed,
                        const Dataset* clean_test = nullptr);

/// Timing fields (durations) are omitted when include_timing is false,
/// which makes the output a pure function of the inputs.
std::string report_to_json(const TeachingReport& report, bool include_timing = true);
/// iter,added,sample_pct,duration_ms,target_pred,success,reselected
void write_iteration_csv(std::ostream& out, const TeachingReport& report);

const char* to_string(CombineStrategy c);
const char* to_string(SuccessRule r);
CombineStrategy parse_combine(const std::string& s);
SuccessRule parse_success_rule(const std::string& s);

}  // namespace dmt
