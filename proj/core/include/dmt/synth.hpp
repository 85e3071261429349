#pragma once

#include <cstdint>
#include <vector>

#include "dmt/data.hpp"

namespace dmt {

/// Seeded generator of per-class Bernoulli bit profiles.
///
/// Each feature row m gets a "signature" value per class. A fraction
/// `separation` of the rows use a distinct signature for every class; the
/// rest share one signature across classes. Signature bits are active with
/// probability `p_high`, every other bit with `p_low`. Explicit `profiles`
/// (C vectors of M*N probabilities) bypass this construction.
struct SynthConfig {
  std::size_t num_features = 16;
  std::size_t arity = 4;
  std::size_t num_classes = 2;
  std::vector<std::size_t> samples_per_class{400, 400};
  std::vector<std::size_t> test_per_class{200, 200};
  double separation = 1.0;
  double noise = 0.0;  // per-bit flip rate (row resample rate in one-hot mode)
  double p_high = 0.8;
  double p_low = 0.02;
  std::vector<std::vector<double>> profiles;
  EncodingMode mode = EncodingMode::MultiHot;

  // Tampering candidates: correctly classified samples that borrow
  // `boundary_rows` rows from the desired class.
  std::size_t tampering_candidates = 20;
  std::size_t boundary_rows = 6;

  // Improvement groups: clusters whose ground truth is class a but whose
  // rows come mostly (`mislabeled_rows`) from another class's profile.
  std::size_t improvement_groups = 5;
  std::size_t group_size = 5;
  std::size_t mislabeled_rows = 10;
  double group_jitter = 0.03;  // per-bit flip rate around the group center

  /// Throws ConfigError on out-of-range probabilities or empty classes.
  void validate() const;
};

struct SynthData {
  Dataset train;
  Dataset test;
  std::vector<TargetSpec> tampering;    // one single-target spec per candidate
  std::vector<TargetSpec> improvement;  // one group spec per candidate
  std::vector<std::vector<double>> profiles;
};

SynthData synth_generate(const SynthConfig& config, std::uint64_t seed);

/// Class with the highest log-likelihood under the Bernoulli profiles
/// (lower index on ties).
int profile_classify(const std::vector<std::vector<double>>& profiles, const Instance& x);

}  // namespace dmt
