#include "dmt/selection.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "dmt/errors.hpp"

namespace dmt {

void SelectionPolicy::validate() const {
  if (k < 1) throw ConfigError("selection: k must be >= 1");
}

ClassFilter default_class_filter(TaskKind) { return ClassFilter::TargetClassOnly; }

double mean_target_distance(const Instance& x, const TargetSpec& targets) {
  double sum = 0.0;
  for (const Target& t : targets.targets) sum += jaccard_distance(x, t.instance);
  return sum / static_cast<double>(targets.targets.size());
}

std::vector<std::int64_t> select_base(const Dataset& d, const TargetSpec& targets,
                                      const SelectionPolicy& policy) {
  policy.validate();
  if (targets.targets.empty()) throw SelectionError("no targets to select around");

  std::vector<std::pair<double, std::int64_t>> pool;
  pool.reserve(d.size());
  for (const LabeledInstance& item : d.items()) {
    if (!policy.allow_reselect_perturbed && item.provenance.perturbed) continue;
    if (policy.class_filter == ClassFilter::TargetClassOnly) {
      const bool match = std::any_of(targets.targets.begin(), targets.targets.end(),
                                     [&](const Target& t) { return t.target_label == item.label; });
      if (!match) continue;
    }
    if (policy.exclude_exact_target) {
      const bool exact = std::any_of(targets.targets.begin(), targets.targets.end(),
                                     [&](const Target& t) { return t.instance == item.instance; });
      if (exact) continue;
    }
    pool.emplace_back(mean_target_distance(item.instance, targets), item.id);
  }
  if (pool.size() < policy.k) {
    throw SelectionError("candidate pool has " + std::to_string(pool.size()) +
                         " items, fewer than k=" + std::to_string(policy.k));
  }
  std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(policy.k), pool.end());
  std::vector<std::int64_t> ids;
  ids.reserve(policy.k);
  for (std::size_t i = 0; i < policy.k; ++i) ids.push_back(pool[i].second);
  return ids;
}

const char* to_string(ClassFilter f) {
  return f == ClassFilter::TargetClassOnly ? "target_class" : "any_class";
}

ClassFilter parse_class_filter(const std::string& s) {
  if (s == "target_class" || s == "TargetClassOnly") return ClassFilter::TargetClassOnly;
  if (s == "any_class" || s == "AnyClass") return ClassFilter::AnyClass;
  throw ConfigError("unknown class filter '" + s + "'");
}

}  // namespace dmt
