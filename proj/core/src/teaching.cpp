#include "dmt/teaching.hpp"

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dmt/errors.hpp"
#include "dmt/rng.hpp"

namespace dmt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

void TeachingConfig::validate(const DatasetSchema& schema) const {
  selection.validate();
  gggm.validate(schema.input_dim());
  score.validate();
  train.validate();
  if (max_iterations < 1) throw ConfigError("teaching: max_iterations must be >= 1");
  if (schema.mode == EncodingMode::StrictOneHot &&
      gggm.feasibility != Feasibility::OneHotSubstitutions) {
    throw ConfigError("teaching: one-hot datasets need one_hot_substitutions feasibility");
  }
}

double TeachingReport::total_duration_ms() const {
  double total = 0.0;
  for (const IterationRecord& it : iterations) total += it.duration_ms;
  return total;
}

double TeachingReport::mean_iteration_ms() const {
  return iterations.empty() ? 0.0 : total_duration_ms() / static_cast<double>(iterations.size());
}

Dataset combine(const Dataset& previous, const Dataset& perturbed, CombineStrategy strategy) {
  if (!(previous.schema() == perturbed.schema())) throw CombineError("combine: schema mismatch");
  Dataset out = previous;
  for (const LabeledInstance& item : perturbed.items()) {
    if (strategy == CombineStrategy::Addition) {
      out.add(item.instance, item.label, item.provenance);
      continue;
    }
    const std::int64_t origin = item.provenance.origin_id;
    if (!item.provenance.perturbed || out.find(origin) == nullptr) {
      throw CombineError("replacement origin id " + std::to_string(origin) +
                         " is not in the previous dataset");
    }
    out.replace({origin, item.instance, item.label, item.provenance});
  }
  return out;
}

std::vector<int> target_predictions(const ModelParams& theta, const LogitTrace& trace,
                                    const TargetSpec& targets, SuccessRule rule) {
  std::vector<int> out;
  for (std::size_t t = 0; t < targets.targets.size(); ++t) {
    if (rule == SuccessRule::Last5LogitMean && t < trace.logits.size() &&
        !trace.logits[t].empty()) {
      out.push_back(last5_prediction(trace, t));
    } else {
      out.push_back(predict(theta, targets.targets[t].instance));
    }
  }
  return out;
}

bool check_success(const ModelParams& theta, const LogitTrace& trace, const TargetSpec& targets,
                   SuccessRule rule) {
  const std::vector<int> preds = target_predictions(theta, trace, targets, rule);
  for (std::size_t t = 0; t < preds.size(); ++t) {
    if (preds[t] != targets.targets[t].target_label) return false;
  }
  return true;
}

TrainConfig seeded_train_config(const TrainConfig& base, std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.init_seed = mix_seed(seed, base.init_seed);
  cfg.shuffle_seed = mix_seed(seed, base.shuffle_seed + 0x100);
  return cfg;
}

TeachingOutcome run_dmt(const Dataset& d_clean, const TargetSpec& targets,
                        const TeachingConfig& cfg, std::uint64_t seed,
                        const Dataset* clean_test) {
  cfg.validate(d_clean.schema());
  targets.validate(d_clean.schema());
  if (d_clean.empty()) throw TrainingError("clean dataset is empty");

  const TrainConfig train_cfg = seeded_train_config(cfg.train, seed);
  TeachingOutcome out;
  TeachingReport& report = out.report;
  report.clean_size = d_clean.size();

  TrainResult trained = train(d_clean, train_cfg, &targets);
  report.initial_predictions =
      target_predictions(trained.params, trained.trace, targets, cfg.success_rule);
  if (clean_test != nullptr) {
    report.clean_test_accuracy_before = accuracy(trained.params, *clean_test);
  }
  Dataset current = d_clean;
  bool success = check_success(trained.params, trained.trace, targets, cfg.success_rule);

  for (std::size_t t = 1; t <= cfg.max_iterations && !success; ++t) {
    const auto started = Clock::now();
    IterationRecord record;
    record.iteration = t;

    record.base_ids = select_base(current, targets, cfg.selection);
    Dataset d_base(current.schema());
    for (std::int64_t id : record.base_ids) {
      const LabeledInstance* item = current.find(id);
      if (item->provenance.perturbed) ++record.reselected_perturbed;
      d_base.add_item(*item);
    }

    GggmResult crafted = gggm(trained.params, d_base, targets, cfg.score, cfg.gggm);
    for (const GggmStepTrace& s : crafted.traces) {
      ++report.gggm_steps;
      if (cfg.gggm.allow_empty_subset && s.score_after > s.score_before) {
        ++report.monotonicity_violations;
      }
    }
    for (const LabeledInstance& item : crafted.perturbed.items()) {
      ++report.perturbed_total;
      const Instance& origin = d_base.find(item.provenance.origin_id)->instance;
      if (hamming_diff(origin, item.instance) > cfg.gggm.budget) ++report.budget_violations;
    }

    current = combine(current, crafted.perturbed, cfg.combine);
    report.samples_added += crafted.perturbed.size();

    trained = train(current, train_cfg, &targets,
                    cfg.train.warm_start ? &trained.params : nullptr);
    record.target_predictions =
        target_predictions(trained.params, trained.trace, targets, cfg.success_rule);
    success = check_success(trained.params, trained.trace, targets, cfg.success_rule);
    record.success = success;
    record.added = report.samples_added;
    record.sample_percent =
        100.0 * static_cast<double>(report.samples_added) / static_cast<double>(d_clean.size());
    record.duration_ms = elapsed_ms(started);
    report.iterations.push_back(std::move(record));
    for (GggmStepTrace& s : crafted.traces) out.traces.push_back(std::move(s));
  }

  report.success = success;
  report.iterations_used = report.iterations.size();
  report.sample_percent =
      100.0 * static_cast<double>(report.samples_added) / static_cast<double>(d_clean.size());
  if (clean_test != nullptr) {
    report.clean_test_accuracy_after = accuracy(trained.params, *clean_test);
  }
  out.final_dataset = std::move(current);
  out.model = std::move(trained.params);
  return out;
}

std::string report_to_json(const TeachingReport& report, bool include_timing) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const IterationRecord& it : report.iterations) {
    nlohmann::json rec{{"iteration", it.iteration},
                       {"added", it.added},
                       {"sample_percent", it.sample_percent},
                       {"target_predictions", it.target_predictions},
                       {"success", it.success},
                       {"base_ids", it.base_ids},
                       {"reselected_perturbed", it.reselected_perturbed}};
    if (include_timing) rec["duration_ms"] = it.duration_ms;
    iterations.push_back(rec);
  }
  nlohmann::json doc{{"method", report.method},
                     {"success", report.success},
                     {"iterations_used", report.iterations_used},
                     {"samples_added", report.samples_added},
                     {"clean_size", report.clean_size},
                     {"sample_percent", report.sample_percent},
                     {"initial_predictions", report.initial_predictions},
                     {"perturbed_total", report.perturbed_total},
                     {"budget_violations", report.budget_violations},
                     {"monotonicity_violations", report.monotonicity_violations},
                     {"gggm_steps", report.gggm_steps},
                     {"iterations", iterations}};
  doc["clean_test_accuracy_before"] = report.clean_test_accuracy_before
                                          ? nlohmann::json(*report.clean_test_accuracy_before)
                                          : nlohmann::json(nullptr);
  doc["clean_test_accuracy_after"] = report.clean_test_accuracy_after
                                         ? nlohmann::json(*report.clean_test_accuracy_after)
                                         : nlohmann::json(nullptr);
  if (include_timing) doc["total_duration_ms"] = report.total_duration_ms();
  return doc.dump(2) + "\n";
}

void write_iteration_csv(std::ostream& out, const TeachingReport& report) {
  out << "method,iter,added,sample_pct,duration_ms,target_pred,success,reselected\n";
  for (const IterationRecord& it : report.iterations) {
    out << report.method << ',' << it.iteration << ',' << it.added << ',' << it.sample_percent
        << ',' << it.duration_ms << ',';
    for (std::size_t i = 0; i < it.target_predictions.size(); ++i) {
      out << (i ? ";" : "") << it.target_predictions[i];
    }
    out << ',' << (it.success ? 1 : 0) << ',' << it.reselected_perturbed << '\n';
  }
}

const char* to_string(CombineStrategy c) {
  return c == CombineStrategy::Addition ? "addition" : "replacement";
}

const char* to_string(SuccessRule r) {
  return r == SuccessRule::ArgmaxNow ? "argmax_now" : "last5_logit_mean";
}

CombineStrategy parse_combine(const std::string& s) {
  if (s == "addition" || s == "Addition") return CombineStrategy::Addition;
  if (s == "replacement" || s == "Replacement") return CombineStrategy::Replacement;
  throw ConfigError("unknown combine strategy '" + s + "'");
}

SuccessRule parse_success_rule(const std::string& s) {
  if (s == "argmax_now" || s == "ArgmaxNow") return SuccessRule::ArgmaxNow;
  if (s == "last5_logit_mean" || s == "last5" || s == "Last5LogitMean") {
    return SuccessRule::Last5LogitMean;
  }
  throw ConfigError("unknown success rule '" + s + "'");
}

}  // namespace dmt
