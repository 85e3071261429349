#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dmt/data.hpp"

namespace dmt {

enum class ClassFilter { TargetClassOnly, AnyClass };

struct SelectionPolicy {
  std::size_t k = 10;  // step size
  ClassFilter class_filter = ClassFilter::TargetClassOnly;
  bool allow_reselect_perturbed = true;
  bool exclude_exact_target = true;

  void validate() const;
};

/// Default class filter for a task.
ClassFilter default_class_filter(TaskKind task);

/// The k pool items with the smallest mean Jaccard distance to the targets,
/// ordered by (distance, id). TargetClassOnly keeps items whose label is one
/// of the target labels. Throws SelectionError when the pool is too small.
std::vector<std::int64_t> select_base(const Dataset& d, const TargetSpec& targets,
                                      const SelectionPolicy& policy);

/// Mean Jaccard distance from x to every target instance.
double mean_target_distance(const Instance& x, const TargetSpec& targets);

const char* to_string(ClassFilter f);
ClassFilter parse_class_filter(const std::string& s);

}  // namespace dmt
