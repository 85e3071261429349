#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dmt {

enum class EncodingMode { MultiHot, StrictOneHot };

/// A (feature, nominal value) coordinate in the M x N bit matrix.
struct Position {
  std::uint32_t feature = 0;
  std::uint32_t value = 0;

  auto operator<=>(const Position&) const = default;
};

struct DatasetSchema {
  std::size_t num_features = 1;  // M
  std::size_t arity = 1;         // N, uniform across features
  std::size_t num_classes = 2;   // C
  std::vector<std::string> feature_names;
  /// Optional true arity per feature. Values at or above a feature's arity
  /// are padding and must stay zero. Empty means every feature uses `arity`.
  std::vector<std::size_t> feature_arities;
  EncodingMode mode = EncodingMode::MultiHot;

  std::size_t input_dim() const { return num_features * arity; }
  std::size_t arity_of(std::size_t feature) const {
    return feature_arities.empty() ? arity : feature_arities[feature];
  }
  bool is_padding(Position p) const { return p.value >= arity_of(p.feature); }

  /// Throws ConfigError unless M >= 1, N >= 1, C >= 2 and names/arities fit.
  void validate() const;

  bool operator==(const DatasetSchema&) const = default;
};

/// Binary M x N multi-hot matrix, row-major.
class Instance {
 public:
  Instance() = default;
  Instance(std::size_t num_features, std::size_t arity)
      : num_features_(num_features), arity_(arity), bits_(num_features * arity, 0) {}

  static Instance from_rows(const std::vector<std::vector<int>>& rows);
  static Instance from_active(std::size_t num_features, std::size_t arity,
                              std::span<const Position> active);

  std::size_t num_features() const { return num_features_; }
  std::size_t arity() const { return arity_; }
  std::size_t size() const { return bits_.size(); }

  bool get(std::size_t feature, std::size_t value) const {
    return bits_[feature * arity_ + value] != 0;
  }
  bool get(Position p) const { return get(p.feature, p.value); }
  void set(std::size_t feature, std::size_t value, bool on) {
    bits_[feature * arity_ + value] = on ? 1 : 0;
  }
  void set(Position p, bool on) { set(p.feature, p.value, on); }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::vector<Position> active() const;
  std::size_t count() const;
  /// Flat real-valued copy, used as the relaxed model input.
  std::vector<double> to_real() const;
  bool same_shape(const Instance& other) const {
    return num_features_ == other.num_features_ && arity_ == other.arity_;
  }

  bool operator==(const Instance&) const = default;

 private:
  std::size_t num_features_ = 0;
  std::size_t arity_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class FlipDirection { Insert, Delete };

struct Flip {
  Position position;
  FlipDirection direction = FlipDirection::Insert;

  bool operator==(const Flip&) const = default;
};

using FlipList = std::vector<Flip>;

/// Throws InvalidFlipError on duplicate positions.
void validate_flips(const FlipList& flips);
/// Inverse flip list: reversed order, opposite directions.
FlipList reverse_flips(const FlipList& flips);
/// The flips that turn `from` into `to`, in lexicographic position order.
FlipList diff_flips(const Instance& from, const Instance& to);

struct Provenance {
  bool perturbed = false;
  std::int64_t origin_id = -1;
  FlipList flips;

  static Provenance clean() { return {}; }
  static Provenance from_origin(std::int64_t origin, FlipList applied) {
    return {true, origin, std::move(applied)};
  }

  bool operator==(const Provenance&) const = default;
};

struct LabeledInstance {
  std::int64_t id = 0;
  Instance instance;
  int label = 0;
  Provenance provenance;

  bool operator==(const LabeledInstance&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetSchema schema) : schema_(std::move(schema)) {}

  const DatasetSchema& schema() const { return schema_; }
  const std::vector<LabeledInstance>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const LabeledInstance& operator[](std::size_t i) const { return items_[i]; }

  /// Appends with a fresh id (one past the largest id seen so far).
  std::int64_t add(Instance instance, int label,
                   Provenance provenance = Provenance::clean());
  /// Appends keeping the caller's id. Throws ConfigError if the id is taken.
  void add_item(LabeledInstance item);
  /// Swaps in a new item at the position holding item.id.
  void replace(LabeledInstance item);

  const LabeledInstance* find(std::int64_t id) const;
  std::int64_t next_id() const { return next_id_; }

  /// Checks ids, labels, shapes and encoding mode of every item.
  void validate() const;

  bool operator==(const Dataset& other) const {
    return schema_ == other.schema_ && items_ == other.items_;
  }

 private:
  DatasetSchema schema_;
  std::vector<LabeledInstance> items_;
  std::unordered_map<std::int64_t, std::size_t> id_index_;
  std::int64_t next_id_ = 0;
};

enum class TaskKind { Improvement, Tampering };

struct Target {
  Instance instance;
  int target_label = 0;                // the desired prediction
  std::optional<int> original_label;   // ground truth when known

  bool operator==(const Target&) const = default;
};

struct TargetSpec {
  std::vector<Target> targets;
  TaskKind task = TaskKind::Tampering;

  /// Throws ConfigError when empty, out of range or inconsistent with task.
  void validate(const DatasetSchema& schema) const;

  bool operator==(const TargetSpec&) const = default;
};

/// Checks shape, padding bits and the one-hot row constraint.
void validate_instance(const DatasetSchema& schema, const Instance& x);
bool is_strict_one_hot(const Instance& x);

/// Number of differing bits. Throws ShapeError on shape mismatch.
std::size_t hamming_diff(const Instance& a, const Instance& b);

/// 1 - |A n B| / |A u B| over active positions; 0 when both are empty.
double jaccard_distance(const Instance& a, const Instance& b);

/// Applies flips to a copy of x. Every flip must match the current bit
/// (Insert on 0, Delete on 1). In StrictOneHot mode the result must keep
/// exactly one active value per row.
Instance modify(const Instance& x, const FlipList& flips,
                EncodingMode mode = EncodingMode::MultiHot);

const char* to_string(EncodingMode mode);
const char* to_string(TaskKind kind);
EncodingMode parse_encoding_mode(const std::string& s);
TaskKind parse_task_kind(const std::string& s);

}  // namespace dmt
