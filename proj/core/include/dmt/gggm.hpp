#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmt/data.hpp"
#include "dmt/scoring.hpp"
#include "dmt/student.hpp"

namespace dmt {

enum class Feasibility { AnyFlip, OneHotSubstitutions };

/// What the candidate filter differentiates.
enum class GradientSource {
  LossAtTeachingLabel,  // d loss(x, base label) / dx
  TargetClassLogit,     // d logit_{target label} / dx
};

struct GggmConfig {
  std::size_t budget = 8;          // epsilon, in bit flips
  std::size_t candidate_size = 4;  // q
  bool allow_empty_subset = true;
  std::size_t max_subset_size = 4;
  Feasibility feasibility = Feasibility::AnyFlip;
  GradientSource gradient_source = GradientSource::LossAtTeachingLabel;

  /// Throws ConfigError unless budget >= 1, 1 <= q <= input_dim and
  /// max_subset_size >= 1.
  void validate(std::size_t input_dim) const;
  std::size_t steps() const;
};

/// One candidate change: a single flip (AnyFlip) or a same-row
/// delete+insert pair (OneHotSubstitutions).
struct Candidate {
  FlipList flips;
  double magnitude = 0.0;

  /// Ordering key: the flip positions in list order.
  std::vector<Position> key() const;
  bool operator==(const Candidate&) const = default;
};

/// The q feasible candidates with the largest gradient magnitude; ties by
/// position order. `r` is the flat M*N gradient at x_hat.
/// Padding positions of `schema`, when given, are never candidates.
std::vector<Candidate> top_q_candidates(std::span<const double> r, const Instance& x_hat,
                                        std::size_t q, Feasibility feasibility,
                                        const DatasetSchema* schema = nullptr);

struct SubsetChoice {
  std::vector<std::size_t> members;  // indices into the candidate list
  FlipList flips;
  double score = 0.0;
};

/// Exhaustive search over subsets of `candidates` (size <= max_subset_size,
/// empty included when allowed) whose result stays within the budget of
/// `origin`. Minimizes score, then subset size, then position order.
SubsetChoice best_subset(const Scorer& scorer, const Instance& x_hat, int label,
                         const Instance& origin, std::span<const Candidate> candidates,
                         const GggmConfig& cfg);

struct GggmStepTrace {
  std::int64_t origin_id = -1;
  std::size_t step = 0;
  std::vector<double> gradient;
  std::vector<Candidate> candidates;
  FlipList chosen;
  double score_before = 0.0;
  double score_after = 0.0;
};

struct PerturbResult {
  Instance x_hat;
  FlipList flips;  // net flips from the origin
  std::vector<GggmStepTrace> steps;
};

/// Budgeted greedy perturbation of one base sample.
PerturbResult gggm_perturb(const ModelParams& theta, const LabeledInstance& base,
                           const TargetSpec& targets, const ScoreSpec& score,
                           const GggmConfig& cfg, const DatasetSchema* schema = nullptr);

struct GggmResult {
  Dataset perturbed;  // one item per base, id = base id, Perturbed provenance
  std::vector<GggmStepTrace> traces;
};

GggmResult gggm(const ModelParams& theta, const Dataset& d_base, const TargetSpec& targets,
                const ScoreSpec& score, const GggmConfig& cfg);

/// One JSON object per line.
void write_trace_jsonl(std::ostream& out, std::span<const GggmStepTrace> traces);

const char* to_string(Feasibility f);
Feasibility parse_feasibility(const std::string& s);

}  // namespace dmt
