#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmt/data.hpp"
#include "dmt/student.hpp"

namespace dmt {

enum class ScoreKind { Dist, Align };
enum class DistSpace { Probabilities, Logits };

struct ScoreSpec {
  ScoreKind kind = ScoreKind::Dist;
  double lambda = 0.5;  // Align only, in [0, 1]
  DistSpace dist_space = DistSpace::Probabilities;
  /// Negates the clean-sample alignment term (experimental switch).
  bool flip_clean_term = false;

  void validate() const;
};

/// Cosine similarity; 0 when either vector has norm below 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Mean over targets of || f(x_j) - f(x_hat) ||_2 in the chosen output space.
double g_dist(const ModelParams& theta, const Instance& x_hat, const TargetSpec& targets,
              DistSpace space = DistSpace::Probabilities);

/// Cosine of grad_theta(x_a, y_a) and grad_theta(x_b, y_b).
double align(const ModelParams& theta, const Instance& x_a, int y_a, const Instance& x_b, int y_b);

/// -lambda * cos(g_hat, mean target gradient) - (1 - lambda) * cos(g_hat, g_clean).
double g_align(const ModelParams& theta, const Instance& x_hat, int y_hat, const Instance& x_clean,
               int y_clean, const TargetSpec& targets, double lambda,
               bool flip_clean_term = false);

/// Mean over targets of grad_theta(x_j, target label).
std::vector<double> mean_target_gradient(const ModelParams& theta, const TargetSpec& targets);

/// Score evaluator with the target-side quantities precomputed. Lower is
/// better. Produces exactly the values of g_dist / g_align.
class Scorer {
 public:
  Scorer(const ModelParams& theta, const TargetSpec& targets, const ScoreSpec& spec);

  /// Fixes the unperturbed sample used by the Align clean term.
  void set_clean(const Instance& x_clean, int y_clean);

  double operator()(const Instance& x_hat, int y_hat) const;

  const ScoreSpec& spec() const { return spec_; }

 private:
  const ModelParams& theta_;
  ScoreSpec spec_;
  std::vector<std::vector<double>> target_outputs_;
  std::vector<double> target_gradient_;
  std::vector<double> clean_gradient_;
};

const char* to_string(ScoreKind k);
const char* to_string(DistSpace s);
ScoreKind parse_score_kind(const std::string& s);
DistSpace parse_dist_space(const std::string& s);

}  // namespace dmt
