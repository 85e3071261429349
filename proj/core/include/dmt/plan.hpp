#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dmt/baselines.hpp"
#include "dmt/synth.hpp"
#include "dmt/teaching.hpp"

namespace dmt {

/// One column of an experiment grid: the DMT loop or a baseline.
struct VariantSpec {
  std::string name;
  bool is_baseline = false;
  TeachingConfig teaching;
  BaselineConfig baseline;

  std::string method() const;
};

/// Experiment plan. Plan files are line-oriented `key = value` documents:
///
///   # comment
///   name = tamper_small
///   trials = 20            # or: seeds = 1, 2, 3
///   base_seed = 1
///   task = tampering       # or improvement
///   target_index = 0
///   csr_cap = 40
///   curve_points = 20
///
///   [data]                 # synthetic generator settings, or file = path
///   features = 16
///   ...
///
///   [defaults]             # applied to every variant before its own keys
///   epochs = 100
///
///   [variant dist_k10]
///   method = dmt           # dmt | at_once | feature_collision | gradient_matching
///   score = dist
///   k = 10
///
/// Values may be double-quoted. Lists are comma separated. Unknown keys are
/// errors. README.md lists every key.
struct ExperimentPlan {
  std::string name = "plan";
  std::vector<std::uint64_t> seeds;
  TaskKind task = TaskKind::Tampering;
  std::size_t target_index = 0;
  double csr_cap = 100.0;
  std::size_t curve_points = 20;

  SynthConfig data;
  std::optional<std::filesystem::path> data_file;     // dataset JSON instead of synthetic
  std::optional<std::filesystem::path> targets_file;  // required with data_file
  std::optional<std::filesystem::path> test_file;

  std::vector<VariantSpec> variants;

  std::size_t trials() const { return seeds.size(); }
  /// Throws ConfigError on an empty grid, duplicate variant names or
  /// inconsistent data settings.
  void validate() const;
  /// Replaces the seed list with `count` consecutive seeds from `base`.
  void override_seed(std::uint64_t base);
};

/// Throws ParseError with the line number on malformed input.
ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Applies one `[data]` generator setting (shared with the CLI).
void apply_synth_key(SynthConfig& d, const std::string& key, const std::string& value);

/// Applies one `key = value` setting to a variant (shared with the CLI).
void apply_variant_key(VariantSpec& v, const std::string& key, const std::string& value);

}  // namespace dmt
