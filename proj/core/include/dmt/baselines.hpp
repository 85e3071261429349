#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmt/data.hpp"
#include "dmt/student.hpp"
#include "dmt/teaching.hpp"

namespace dmt {

enum class BaselineMethod { AtOnce, FeatureCollision, GradientMatching };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::AtOnce;
  double beta = 0.1;  // feature-collision similarity penalty
  std::size_t pgd_steps = 200;
  double pgd_lr = 0.05;
  std::size_t sample_budget = 10;
  std::size_t flip_budget = 8;  // epsilon
  std::uint64_t seed = 0;

  void validate() const;
};

/// Continuous relaxation of a binary instance, entries in [0, 1].
struct RelaxedInstance {
  std::size_t num_features = 0;
  std::size_t arity = 0;
  std::vector<double> values;  // row-major M x N
  std::int64_t origin = -1;

  static RelaxedInstance from(const Instance& x, std::int64_t origin = -1);
};

/// Flips the origin bits whose relaxed value crossed 0.5, largest drift
/// first (ties by position), at most `budget` flips. In StrictOneHot mode a
/// row moves to its largest relaxed value, costing two flips.
Instance round_to_budget(const RelaxedInstance& relaxed, const Instance& origin,
                         std::size_t budget, EncodingMode mode = EncodingMode::MultiHot);

struct CraftResult {
  Instance instance;
  RelaxedInstance relaxed;
  std::vector<double> objective;  // at initialization and after every step
};

/// Proximal projected gradient descent on
///   |phi(x) - phi(target)|^2 + beta * |x - x_base|^2
/// over [0,1]^{M*N}, then rounding. With several targets phi(target) is the
/// mean target embedding.
CraftResult feature_collision_craft(const ModelParams& theta, const LabeledInstance& base,
                                    const TargetSpec& targets, const BaselineConfig& cfg,
                                    EncodingMode mode = EncodingMode::MultiHot);

struct MatchingResult {
  Dataset crafted;  // ids = base ids, Perturbed provenance
  std::vector<RelaxedInstance> relaxed;
  std::vector<double> objective;  // at initialization and after every step
};

/// Joint projected gradient descent on
///   1 - cos(sum_i grad_theta(x_i, y_i), mean_j grad_theta(x_j, target_j))
/// followed by rounding of every base. Throws DegenerateObjectiveError when
/// the target gradient vanishes.
MatchingResult gradient_matching_craft(const ModelParams& theta, const Dataset& bases,
                                       const TargetSpec& targets, const BaselineConfig& cfg);

/// Single-shot teaching: one iteration with k = sample_budget.
TeachingOutcome at_once(const Dataset& d_clean, const TargetSpec& targets,
                        const BaselineConfig& cfg, const TeachingConfig& teach_cfg,
                        std::uint64_t seed, const Dataset* clean_test = nullptr);

/// Runs any baseline end to end: train, select sample_budget bases, craft,
/// add, retrain once, check. The report uses the teaching schema.
TeachingOutcome run_baseline(const Dataset& d_clean, const TargetSpec& targets,
                             const BaselineConfig& cfg, const TeachingConfig& teach_cfg,
                             std::uint64_t seed, const Dataset* clean_test = nullptr);

const char* to_string(BaselineMethod m);
BaselineMethod parse_baseline_method(const std::string& s);

}  // namespace dmt
