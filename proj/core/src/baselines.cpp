#include "dmt/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dmt/errors.hpp"
#include "dmt/scoring.hpp"
#include "dmt/selection.hpp"

namespace dmt {

namespace {

constexpr double kZeroNorm = 1e-12;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_finite(double value, std::size_t step) {
  if (!std::isfinite(value)) {
    throw DivergenceError("baseline objective became non-finite", static_cast<long>(step));
  }
}

std::vector<double> mean_target_embedding(const ModelParams& theta, const TargetSpec& targets) {
  std::vector<double> mean;
  for (const Target& t : targets.targets) {
    const std::vector<double> e = embedding(theta, t.instance.to_real());
    if (mean.empty()) mean.assign(e.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) mean[i] += e[i];
  }
  for (double& v : mean) v /= static_cast<double>(targets.targets.size());
  return mean;
}

std::vector<double> summed_gradient(const ModelParams& theta, const std::vector<RelaxedInstance>& xs,
                                    const std::vector<int>& labels) {
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> gi = grad_theta(theta, xs[i].values, labels[i]);
    for (std::size_t p = 0; p < g.size(); ++p) g[p] += gi[p];
  }
  return g;
}

TeachingReport vacuous_or_clean_report(const std::string& method) {
  TeachingReport r;
  r.method = method;
  return r;
}

}  // namespace

void BaselineConfig::validate() const {
  if (pgd_steps < 1) throw ConfigError("baseline: pgd_steps must be >= 1");
  if (!(pgd_lr > 0.0)) throw ConfigError("baseline: pgd_lr must be positive");
  if (!(beta >= 0.0)) throw ConfigError("baseline: beta must be non-negative");
}

RelaxedInstance RelaxedInstance::from(const Instance& x, std::int64_t origin) {
  return {x.num_features(), x.arity(), x.to_real(), origin};
}

Instance round_to_budget(const RelaxedInstance& relaxed, const Instance& origin,
                         std::size_t budget, EncodingMode mode) {
  if (relaxed.values.size() != origin.size() || relaxed.arity != origin.arity()) {
    throw ShapeError("round_to_budget: shape mismatch");
  }
  Instance out = origin;
  const std::size_t arity = origin.arity();
  const auto& v = relaxed.values;

  if (mode == EncodingMode::MultiHot) {
    std::vector<std::size_t> crossed;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool bit = origin.bits()[i] != 0;
      if ((!bit && v[i] > 0.5) || (bit && v[i] < 0.5)) crossed.push_back(i);
    }
    std::stable_sort(crossed.begin(), crossed.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(v[a] - origin.bits()[a]) > std::abs(v[b] - origin.bits()[b]);
    });
    for (std::size_t k = 0; k < std::min(budget, crossed.size()); ++k) {
      const std::size_t i = crossed[k];
      out.set(i / arity, i % arity, origin.bits()[i] == 0);
    }
    return out;
  }

  struct Move {
    std::size_t row, from, to;
    double drift;
  };
  std::vector<Move> moves;
  for (std::size_t m = 0; m < origin.num_features(); ++m) {
    std::size_t from = arity;
    for (std::size_t n = 0; n < arity; ++n) {
      if (origin.get(m, n)) from = n;
    }
    if (from == arity) continue;
    std::size_t to = 0;
    for (std::size_t n = 1; n < arity; ++n) {
      if (v[m * arity + n] > v[m * arity + to]) to = n;
    }
    if (to == from || !(v[m * arity + to] > v[m * arity + from])) continue;
    moves.push_back({m, from, to, v[m * arity + to] + (1.0 - v[m * arity + from])});
  }
  std::stable_sort(moves.begin(), moves.end(),
                   [](const Move& a, const Move& b) { return a.drift > b.drift; });
  for (std::size_t k = 0; k < std::min(budget / 2, moves.size()); ++k) {
    out.set(moves[k].row, moves[k].from, false);
    out.set(moves[k].row, moves[k].to, true);
  }
  return out;
}

CraftResult feature_collision_craft(const ModelParams& theta, const LabeledInstance& base,
                                    const TargetSpec& targets, const BaselineConfig& cfg,
                                    EncodingMode mode) {
  cfg.validate();
  if (targets.targets.empty()) throw ConfigError("feature collision: no targets");
  const std::vector<double> phi_target = mean_target_embedding(theta, targets);
  const std::vector<double> anchor = base.instance.to_real();

  CraftResult out;
  out.relaxed = RelaxedInstance::from(base.instance, base.id);
  std::vector<double>& x = out.relaxed.values;
  auto objective = [&](const std::vector<double>& phi) {
    return squared_distance(phi, phi_target) + cfg.beta * squared_distance(x, anchor);
  };

  std::vector<double> phi = embedding(theta, x);
  out.objective.push_back(objective(phi));
  check_finite(out.objective.back(), 0);
  const double shrink = 2.0 * cfg.pgd_lr * cfg.beta;
  for (std::size_t step = 1; step <= cfg.pgd_steps; ++step) {
    std::vector<double> residual(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) residual[i] = 2.0 * (phi[i] - phi_target[i]);
    const std::vector<double> g = embedding_vjp(theta, x, residual);
    // Gradient step on the collision term, then the exact proximal map of
    // the penalty restricted to the box.
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double y = x[i] - cfg.pgd_lr * g[i];
      x[i] = std::clamp((y + shrink * anchor[i]) / (1.0 + shrink), 0.0, 1.0);
    }
    phi = embedding(theta, x);
    out.objective.push_back(objective(phi));
    check_finite(out.objective.back(), step);
  }
  out.instance = round_to_budget(out.relaxed, base.instance, cfg.flip_budget, mode);
  return out;
}

MatchingResult gradient_matching_craft(const ModelParams& theta, const Dataset& bases,
                                       const TargetSpec& targets, const BaselineConfig& cfg) {
  cfg.validate();
  if (bases.empty()) throw ConfigError("gradient matching: no bases");
  const std::vector<double> target_grad = mean_target_gradient(theta, targets);
  const double target_norm = norm(target_grad);
  if (target_norm < kZeroNorm) {
    throw DegenerateObjectiveError("gradient matching: target gradient has zero norm");
  }

  MatchingResult out;
  std::vector<int> labels;
  for (const LabeledInstance& item : bases.items()) {
    out.relaxed.push_back(RelaxedInstance::from(item.instance, item.id));
    labels.push_back(item.label);
  }

  std::vector<double> g_sum = summed_gradient(theta, out.relaxed, labels);
  out.objective.push_back(1.0 - cosine_similarity(g_sum, target_grad));
  check_finite(out.objective.back(), 0);
  for (std::size_t step = 1; step <= cfg.pgd_steps; ++step) {
    const double g_norm = norm(g_sum);
    // u = d cos(G, t) / dG
    std::vector<double> u(target_grad.size());
    if (g_norm < kZeroNorm) {
      for (std::size_t p = 0; p < u.size(); ++p) u[p] = target_grad[p] / target_norm;
    } else {
      const double c = cosine_similarity(g_sum, target_grad);
      for (std::size_t p = 0; p < u.size(); ++p) {
        u[p] = target_grad[p] / (g_norm * target_norm) - c * g_sum[p] / (g_norm * g_norm);
      }
    }
    std::vector<std::vector<double>> grads;
    for (std::size_t i = 0; i < out.relaxed.size(); ++i) {
      grads.push_back(grad_input_of_grad_dot(theta, out.relaxed[i].values, labels[i], u));
    }
    for (std::size_t i = 0; i < out.relaxed.size(); ++i) {
      std::vector<double>& x = out.relaxed[i].values;
      // Descent on 1 - cos means ascent on cos.
      for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] = std::clamp(x[d] + cfg.pgd_lr * grads[i][d], 0.0, 1.0);
      }
    }
    g_sum = summed_gradient(theta, out.relaxed, labels);
    out.objective.push_back(1.0 - cosine_similarity(g_sum, target_grad));
    check_finite(out.objective.back(), step);
  }

  out.crafted = Dataset(bases.schema());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const LabeledInstance& base = bases[i];
    Instance rounded =
        round_to_budget(out.relaxed[i], base.instance, cfg.flip_budget, bases.schema().mode);
    FlipList flips = diff_flips(base.instance, rounded);
    out.crafted.add_item({base.id, std::move(rounded), base.label,
                          Provenance::from_origin(base.id, std::move(flips))});
  }
  return out;
}

TeachingOutcome at_once(const Dataset& d_clean, const TargetSpec& targets,
                        const BaselineConfig& cfg, const TeachingConfig& teach_cfg,
                        std::uint64_t seed, const Dataset* clean_test) {
  TeachingOutcome out;
  if (cfg.sample_budget == 0) {
    targets.validate(d_clean.schema());
    const TrainConfig train_cfg = seeded_train_config(teach_cfg.train, seed);
    TrainResult trained = train(d_clean, train_cfg, &targets);
    out.report = vacuous_or_clean_report(to_string(BaselineMethod::AtOnce));
    out.report.clean_size = d_clean.size();
    out.report.initial_predictions =
        target_predictions(trained.params, trained.trace, targets, teach_cfg.success_rule);
    out.report.success =
        check_success(trained.params, trained.trace, targets, teach_cfg.success_rule);
    if (clean_test != nullptr) {
      out.report.clean_test_accuracy_before = accuracy(trained.params, *clean_test);
      out.report.clean_test_accuracy_after = out.report.clean_test_accuracy_before;
    }
    out.final_dataset = d_clean;
    out.model = std::move(trained.params);
    return out;
  }
  TeachingConfig single = teach_cfg;
  single.max_iterations = 1;
  single.selection.k = cfg.sample_budget;
  single.gggm.budget = cfg.flip_budget;
  single.combine = CombineStrategy::Addition;
  out = run_dmt(d_clean, targets, single, seed, clean_test);
  out.report.method = to_string(BaselineMethod::AtOnce);
  return out;
}

TeachingOutcome run_baseline(const Dataset& d_clean, const TargetSpec& targets,
                             const BaselineConfig& cfg, const TeachingConfig& teach_cfg,
                             std::uint64_t seed, const Dataset* clean_test) {
  cfg.validate();
  if (cfg.method == BaselineMethod::AtOnce) {
    return at_once(d_clean, targets, cfg, teach_cfg, seed, clean_test);
  }
  targets.validate(d_clean.schema());
  const TrainConfig train_cfg = seeded_train_config(teach_cfg.train, seed);
  const auto started = std::chrono::steady_clock::now();

  TeachingOutcome out;
  TeachingReport& report = out.report;
  report.method = to_string(cfg.method);
  report.clean_size = d_clean.size();
  TrainResult trained = train(d_clean, train_cfg, &targets);
  report.initial_predictions =
      target_predictions(trained.params, trained.trace, targets, teach_cfg.success_rule);
  if (clean_test != nullptr) report.clean_test_accuracy_before = accuracy(trained.params, *clean_test);
  bool success = check_success(trained.params, trained.trace, targets, teach_cfg.success_rule);
  Dataset current = d_clean;

  if (!success && cfg.sample_budget > 0) {
    IterationRecord record;
    record.iteration = 1;
    SelectionPolicy policy = teach_cfg.selection;
    policy.k = cfg.sample_budget;
    record.base_ids = select_base(d_clean, targets, policy);
    Dataset bases(d_clean.schema());
    for (std::int64_t id : record.base_ids) bases.add_item(*d_clean.find(id));

    Dataset crafted(d_clean.schema());
    if (cfg.method == BaselineMethod::FeatureCollision) {
      for (const LabeledInstance& base : bases.items()) {
        CraftResult r = feature_collision_craft(trained.params, base, targets, cfg,
                                                d_clean.schema().mode);
        FlipList flips = diff_flips(base.instance, r.instance);
        crafted.add_item({base.id, std::move(r.instance), base.label,
                          Provenance::from_origin(base.id, std::move(flips))});
      }
    } else {
      crafted = gradient_matching_craft(trained.params, bases, targets, cfg).crafted;
    }
    for (const LabeledInstance& item : crafted.items()) {
      ++report.perturbed_total;
      if (hamming_diff(bases.find(item.id)->instance, item.instance) > cfg.flip_budget) {
        ++report.budget_violations;
      }
    }
    current = combine(current, crafted, CombineStrategy::Addition);
    report.samples_added = crafted.size();
    trained = train(current, train_cfg, &targets);
    record.target_predictions =
        target_predictions(trained.params, trained.trace, targets, teach_cfg.success_rule);
    success = check_success(trained.params, trained.trace, targets, teach_cfg.success_rule);
    record.success = success;
    record.added = report.samples_added;
    record.sample_percent =
        100.0 * static_cast<double>(report.samples_added) / static_cast<double>(d_clean.size());
    record.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    report.iterations.push_back(std::move(record));
  }
  report.success = success;
  report.iterations_used = report.iterations.size();
  report.sample_percent =
      100.0 * static_cast<double>(report.samples_added) / static_cast<double>(d_clean.size());
  if (clean_test != nullptr) report.clean_test_accuracy_after = accuracy(trained.params, *clean_test);
  out.final_dataset = std::move(current);
  out.model = std::move(trained.params);
  return out;
}

const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::AtOnce:
      return "at_once";
    case BaselineMethod::FeatureCollision:
      return "feature_collision";
    case BaselineMethod::GradientMatching:
      return "gradient_matching";
  }
  return "unknown";
}

BaselineMethod parse_baseline_method(const std::string& s) {
  if (s == "at_once" || s == "AtOnce") return BaselineMethod::AtOnce;
  if (s == "feature_collision" || s == "frogs") return BaselineMethod::FeatureCollision;
  if (s == "gradient_matching" || s == "witches_brew") return BaselineMethod::GradientMatching;
  throw ConfigError("unknown baseline method '" + s + "'");
}

}  // namespace dmt
