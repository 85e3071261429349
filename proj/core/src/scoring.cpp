#include "dmt/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "dmt/errors.hpp"

namespace dmt {

namespace {

constexpr double kZeroNorm = 1e-12;

std::vector<double> output(const ModelParams& theta, const Instance& x, DistSpace space) {
  const std::vector<double> v = x.to_real();
  return space == DistSpace::Probabilities ? predict_probs(theta, v) : logits(theta, v);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double mean_distance(const std::vector<std::vector<double>>& target_outputs,
                     std::span<const double> out) {
  double sum = 0.0;
  for (const auto& t : target_outputs) sum += euclidean(t, out);
  return sum / static_cast<double>(target_outputs.size());
}

double combine_align(double lambda, double to_target, double to_clean, bool flip) {
  const double clean_term = flip ? -to_clean : to_clean;
  return -lambda * to_target - (1.0 - lambda) * clean_term;
}

}  // namespace

void ScoreSpec::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("score: lambda must lie in [0, 1]");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kZeroNorm || nb < kZeroNorm) return 0.0;
  const double c = dot / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double g_dist(const ModelParams& theta, const Instance& x_hat, const TargetSpec& targets,
              DistSpace space) {
  if (targets.targets.empty()) throw ConfigError("g_dist: no targets");
  std::vector<std::vector<double>> outs;
  for (const Target& t : targets.targets) outs.push_back(output(theta, t.instance, space));
  return mean_distance(outs, output(theta, x_hat, space));
}

double align(const ModelParams& theta, const Instance& x_a, int y_a, const Instance& x_b,
             int y_b) {
  return cosine_similarity(grad_theta(theta, x_a, y_a), grad_theta(theta, x_b, y_b));
}

std::vector<double> mean_target_gradient(const ModelParams& theta, const TargetSpec& targets) {
  if (targets.targets.empty()) throw ConfigError("no targets");
  std::vector<double> mean(theta.size(), 0.0);
  for (const Target& t : targets.targets) {
    const std::vector<double> g = grad_theta(theta, t.instance, t.target_label);
    for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i];
  }
  for (double& v : mean) v /= static_cast<double>(targets.targets.size());
  return mean;
}

double g_align(const ModelParams& theta, const Instance& x_hat, int y_hat, const Instance& x_clean,
               int y_clean, const TargetSpec& targets, double lambda, bool flip_clean_term) {
  const std::vector<double> g_hat = grad_theta(theta, x_hat, y_hat);
  const std::vector<double> g_target = mean_target_gradient(theta, targets);
  const std::vector<double> g_clean = grad_theta(theta, x_clean, y_clean);
  return combine_align(lambda, cosine_similarity(g_hat, g_target),
                       cosine_similarity(g_hat, g_clean), flip_clean_term);
}

Scorer::Scorer(const ModelParams& theta, const TargetSpec& targets, const ScoreSpec& spec)
    : theta_(theta), spec_(spec) {
  spec_.validate();
  if (targets.targets.empty()) throw ConfigError("scorer: no targets");
  if (spec_.kind == ScoreKind::Dist) {
    for (const Target& t : targets.targets) {
      target_outputs_.push_back(output(theta, t.instance, spec_.dist_space));
    }
  } else {
    target_gradient_ = mean_target_gradient(theta, targets);
  }
}

void Scorer::set_clean(const Instance& x_clean, int y_clean) {
  if (spec_.kind == ScoreKind::Align) clean_gradient_ = grad_theta(theta_, x_clean, y_clean);
}

double Scorer::operator()(const Instance& x_hat, int y_hat) const {
  if (spec_.kind == ScoreKind::Dist) {
    return mean_distance(target_outputs_, output(theta_, x_hat, spec_.dist_space));
  }
  if (clean_gradient_.empty()) throw ConfigError("scorer: clean sample not set");
  const std::vector<double> g_hat = grad_theta(theta_, x_hat, y_hat);
  return combine_align(spec_.lambda, cosine_similarity(g_hat, target_gradient_),
                       cosine_similarity(g_hat, clean_gradient_), spec_.flip_clean_term);
}

const char* to_string(ScoreKind k) { return k == ScoreKind::Dist ? "dist" : "align"; }
const char* to_string(DistSpace s) {
  return s == DistSpace::Probabilities ? "probabilities" : "logits";
}

ScoreKind parse_score_kind(const std::string& s) {
  if (s == "dist" || s == "Dist") return ScoreKind::Dist;
  if (s == "align" || s == "Align") return ScoreKind::Align;
  throw ConfigError("unknown score kind '" + s + "'");
}

DistSpace parse_dist_space(const std::string& s) {
  if (s == "probabilities" || s == "probs") return DistSpace::Probabilities;
  if (s == "logits") return DistSpace::Logits;
  throw ConfigError("unknown distance space '" + s + "'");
}

}  // namespace dmt
