#include "dmt/data.hpp"

#include <algorithm>
#include <set>

#include "dmt/errors.hpp"

namespace dmt {

void DatasetSchema::validate() const {
  if (num_features < 1) throw ConfigError("schema: num_features must be >= 1");
  if (arity < 1) throw ConfigError("schema: arity must be >= 1");
  if (num_classes < 2) throw ConfigError("schema: num_classes must be >= 2");
  if (!feature_names.empty() && feature_names.size() != num_features) {
    throw ConfigError("schema: feature_names must have one entry per feature");
  }
  if (!feature_arities.empty()) {
    if (feature_arities.size() != num_features) {
      throw ConfigError("schema: feature_arities must have one entry per feature");
    }
    for (std::size_t a : feature_arities) {
      if (a < 1 || a > arity) {
        throw ConfigError("schema: feature arity must lie in [1, arity]");
      }
    }
  }
}

Instance Instance::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw ShapeError("instance rows must be non-empty");
  }
  Instance x(rows.size(), rows.front().size());
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].size() != x.arity()) throw ShapeError("ragged instance rows");
    for (std::size_t n = 0; n < rows[m].size(); ++n) {
      if (rows[m][n] != 0 && rows[m][n] != 1) {
        throw ShapeError("instance bits must be 0 or 1");
      }
      x.set(m, n, rows[m][n] == 1);
    }
  }
  return x;
}

Instance Instance::from_active(std::size_t num_features, std::size_t arity,
                               std::span<const Position> active) {
  Instance x(num_features, arity);
  for (const Position& p : active) {
    if (p.feature >= num_features || p.value >= arity) {
      throw ShapeError("active position outside the instance shape");
    }
    x.set(p, true);
  }
  return x;
}

std::vector<Position> Instance::active() const {
  std::vector<Position> out;
  for (std::size_t m = 0; m < num_features_; ++m) {
    for (std::size_t n = 0; n < arity_; ++n) {
      if (get(m, n)) {
        out.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n)});
      }
    }
  }
  return out;
}

std::size_t Instance::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<double> Instance::to_real() const {
  return std::vector<double>(bits_.begin(), bits_.end());
}

void validate_flips(const FlipList& flips) {
  std::set<Position> seen;
  for (const Flip& f : flips) {
    if (!seen.insert(f.position).second) {
      throw InvalidFlipError("duplicate flip at (" + std::to_string(f.position.feature) +
                             "," + std::to_string(f.position.value) + ")");
    }
  }
}

FlipList reverse_flips(const FlipList& flips) {
  FlipList out(flips.rbegin(), flips.rend());
  for (Flip& f : out) {
    f.direction = f.direction == FlipDirection::Insert ? FlipDirection::Delete
                                                       : FlipDirection::Insert;
  }
  return out;
}

FlipList diff_flips(const Instance& from, const Instance& to) {
  if (!from.same_shape(to)) throw ShapeError("diff_flips: shape mismatch");
  FlipList out;
  for (std::size_t m = 0; m < from.num_features(); ++m) {
    for (std::size_t n = 0; n < from.arity(); ++n) {
      if (from.get(m, n) != to.get(m, n)) {
        out.push_back({{static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n)},
                       from.get(m, n) ? FlipDirection::Delete : FlipDirection::Insert});
      }
    }
  }
  return out;
}

std::int64_t Dataset::add(Instance instance, int label, Provenance provenance) {
  const std::int64_t id = next_id_;
  add_item({id, std::move(instance), label, std::move(provenance)});
  return id;
}

void Dataset::add_item(LabeledInstance item) {
  if (id_index_.contains(item.id)) {
    throw ConfigError("duplicate dataset id " + std::to_string(item.id));
  }
  id_index_.emplace(item.id, items_.size());
  next_id_ = std::max(next_id_, item.id + 1);
  items_.push_back(std::move(item));
}

void Dataset::replace(LabeledInstance item) {
  auto it = id_index_.find(item.id);
  if (it == id_index_.end()) {
    throw CombineError("replace: id " + std::to_string(item.id) + " not in dataset");
  }
  items_[it->second] = std::move(item);
}

const LabeledInstance* Dataset::find(std::int64_t id) const {
  auto it = id_index_.find(id);
  return it == id_index_.end() ? nullptr : &items_[it->second];
}

void Dataset::validate() const {
  schema_.validate();
  for (const LabeledInstance& item : items_) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= schema_.num_classes) {
      throw LabelError("item " + std::to_string(item.id) + " has label " +
                       std::to_string(item.label) + " outside [0, C)");
    }
    validate_instance(schema_, item.instance);
    validate_flips(item.provenance.flips);
  }
}

void TargetSpec::validate(const DatasetSchema& schema) const {
  if (targets.empty()) throw ConfigError("target spec must be non-empty");
  for (const Target& t : targets) {
    validate_instance(schema, t.instance);
    if (t.target_label < 0 || static_cast<std::size_t>(t.target_label) >= schema.num_classes) {
      throw LabelError("target label " + std::to_string(t.target_label) + " outside [0, C)");
    }
    if (t.original_label &&
        (*t.original_label < 0 ||
         static_cast<std::size_t>(*t.original_label) >= schema.num_classes)) {
      throw LabelError("original label outside [0, C)");
    }
    if (task == TaskKind::Improvement) {
      if (!t.original_label || *t.original_label != t.target_label) {
        throw ConfigError("improvement targets must carry their ground truth as the target label");
      }
    }
  }
}

bool is_strict_one_hot(const Instance& x) {
  for (std::size_t m = 0; m < x.num_features(); ++m) {
    std::size_t on = 0;
    for (std::size_t n = 0; n < x.arity(); ++n) on += x.get(m, n) ? 1 : 0;
    if (on != 1) return false;
  }
  return true;
}

void validate_instance(const DatasetSchema& schema, const Instance& x) {
  if (x.num_features() != schema.num_features || x.arity() != schema.arity) {
    throw ShapeError("instance shape " + std::to_string(x.num_features()) + "x" +
                     std::to_string(x.arity()) + " does not match schema " +
                     std::to_string(schema.num_features) + "x" +
                     std::to_string(schema.arity));
  }
  if (!schema.feature_arities.empty()) {
    for (const Position& p : x.active()) {
      if (schema.is_padding(p)) throw ModeError("padding bit is set");
    }
  }
  if (schema.mode == EncodingMode::StrictOneHot && !is_strict_one_hot(x)) {
    throw ModeError("instance violates the one-hot row constraint");
  }
}

std::size_t hamming_diff(const Instance& a, const Instance& b) {
  if (!a.same_shape(b)) throw ShapeError("hamming_diff: shape mismatch");
  auto lhs = a.bits();
  auto rhs = b.bits();
  std::size_t d = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) d += lhs[i] != rhs[i] ? 1 : 0;
  return d;
}

double jaccard_distance(const Instance& a, const Instance& b) {
  if (!a.same_shape(b)) throw ShapeError("jaccard_distance: shape mismatch");
  auto lhs = a.bits();
  auto rhs = b.bits();
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    inter += (lhs[i] & rhs[i]);
    uni += (lhs[i] | rhs[i]);
  }
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

Instance modify(const Instance& x, const FlipList& flips, EncodingMode mode) {
  validate_flips(flips);
  Instance out = x;
  for (const Flip& f : flips) {
    if (f.position.feature >= x.num_features() || f.position.value >= x.arity()) {
      throw ShapeError("flip position outside the instance shape");
    }
    const bool bit = out.get(f.position);
    const bool want = f.direction == FlipDirection::Delete;
    if (bit != want) {
      throw InvalidFlipError(std::string(want ? "delete" : "insert") + " at (" +
                             std::to_string(f.position.feature) + "," +
                             std::to_string(f.position.value) + ") does not match bit " +
                             (bit ? "1" : "0"));
    }
    out.set(f.position, !bit);
  }
  if (mode == EncodingMode::StrictOneHot) {
    // Each touched row needs exactly one delete paired with one insert.
    std::vector<int> deletes(x.num_features(), 0);
    std::vector<int> inserts(x.num_features(), 0);
    for (const Flip& f : flips) {
      (f.direction == FlipDirection::Delete ? deletes : inserts)[f.position.feature]++;
    }
    for (std::size_t m = 0; m < x.num_features(); ++m) {
      if (deletes[m] != inserts[m] || deletes[m] > 1) {
        throw ModeError("one-hot flips must be same-row delete+insert pairs (row " +
                        std::to_string(m) + ")");
      }
    }
    if (!is_strict_one_hot(out)) throw ModeError("result violates the one-hot row constraint");
  }
  return out;
}

const char* to_string(EncodingMode mode) {
  return mode == EncodingMode::MultiHot ? "multihot" : "onehot";
}

const char* to_string(TaskKind kind) {
  return kind == TaskKind::Improvement ? "improvement" : "tampering";
}

EncodingMode parse_encoding_mode(const std::string& s) {
  if (s == "multihot" || s == "multi_hot" || s == "MultiHot") return EncodingMode::MultiHot;
  if (s == "onehot" || s == "strict_one_hot" || s == "StrictOneHot") {
    return EncodingMode::StrictOneHot;
  }
  throw ConfigError("unknown encoding mode '" + s + "'");
}

TaskKind parse_task_kind(const std::string& s) {
  if (s == "improvement" || s == "Improvement") return TaskKind::Improvement;
  if (s == "tampering" || s == "Tampering") return TaskKind::Tampering;
  throw ConfigError("unknown task kind '" + s + "'");
}

}  // namespace dmt
