#include "dmt/plan.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dmt/dataset_io.hpp"
#include "dmt/errors.hpp"

namespace dmt {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

/// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(unquote(item));
  }
  return out;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return d;
}

std::size_t to_count(const std::string& v) {
  if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
  std::size_t used = 0;
  const unsigned long long n = std::stoull(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(v);
}

std::vector<std::size_t> to_counts(const std::string& v) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(v)) out.push_back(to_count(item));
  return out;
}

}  // namespace

void apply_synth_key(SynthConfig& d, const std::string& key, const std::string& value) {
  if (key == "features") d.num_features = to_count(value);
  else if (key == "arity") d.arity = to_count(value);
  else if (key == "classes") d.num_classes = to_count(value);
  else if (key == "samples_per_class") d.samples_per_class = to_counts(value);
  else if (key == "test_per_class") d.test_per_class = to_counts(value);
  else if (key == "separation") d.separation = to_double(value);
  else if (key == "noise") d.noise = to_double(value);
  else if (key == "p_high") d.p_high = to_double(value);
  else if (key == "p_low") d.p_low = to_double(value);
  else if (key == "mode") d.mode = parse_encoding_mode(value);
  else if (key == "tampering_candidates") d.tampering_candidates = to_count(value);
  else if (key == "boundary_rows") d.boundary_rows = to_count(value);
  else if (key == "improvement_groups") d.improvement_groups = to_count(value);
  else if (key == "group_size") d.group_size = to_count(value);
  else if (key == "mislabeled_rows") d.mislabeled_rows = to_count(value);
  else if (key == "group_jitter") d.group_jitter = to_double(value);
  else throw ConfigError("unknown data key '" + key + "'");
}

namespace {

void apply_data_key(ExperimentPlan& plan, const std::string& key, const std::string& value) {
  if (key == "file") plan.data_file = value;
  else if (key == "targets") plan.targets_file = value;
  else if (key == "test_file") plan.test_file = value;
  else apply_synth_key(plan.data, key, value);
}

void apply_plan_key(ExperimentPlan& plan, std::size_t& trials, std::uint64_t& base_seed,
                    const std::string& key, const std::string& value) {
  if (key == "name") plan.name = value;
  else if (key == "trials") trials = to_count(value);
  else if (key == "base_seed") base_seed = to_count(value);
  else if (key == "seeds") {
    plan.seeds.clear();
    for (std::size_t s : to_counts(value)) plan.seeds.push_back(s);
  } else if (key == "task") plan.task = parse_task_kind(value);
  else if (key == "target_index") plan.target_index = to_count(value);
  else if (key == "csr_cap") plan.csr_cap = to_double(value);
  else if (key == "curve_points") plan.curve_points = to_count(value);
  else throw ConfigError("unknown plan key '" + key + "'");
}

/// Sizes that default to the per-sample budget are kept in sync.
void normalize(VariantSpec& v) {
  v.baseline.flip_budget = v.teaching.gggm.budget;
}

}  // namespace

std::string VariantSpec::method() const {
  return is_baseline ? to_string(baseline.method) : "dmt";
}

void apply_variant_key(VariantSpec& v, const std::string& key, const std::string& value) {
  TeachingConfig& t = v.teaching;
  BaselineConfig& b = v.baseline;
  if (key == "method") {
    v.is_baseline = value != "dmt";
    if (v.is_baseline) b.method = parse_baseline_method(value);
  } else if (key == "score") t.score.kind = parse_score_kind(value);
  else if (key == "lambda") t.score.lambda = to_double(value);
  else if (key == "dist_space") t.score.dist_space = parse_dist_space(value);
  else if (key == "flip_clean_term") t.score.flip_clean_term = to_bool(value);
  else if (key == "k") t.selection.k = to_count(value);
  else if (key == "class_filter") t.selection.class_filter = parse_class_filter(value);
  else if (key == "reselect") t.selection.allow_reselect_perturbed = to_bool(value);
  else if (key == "exclude_target") t.selection.exclude_exact_target = to_bool(value);
  else if (key == "budget") t.gggm.budget = to_count(value);
  else if (key == "q") t.gggm.candidate_size = to_count(value);
  else if (key == "max_subset") t.gggm.max_subset_size = to_count(value);
  else if (key == "allow_empty") t.gggm.allow_empty_subset = to_bool(value);
  else if (key == "feasibility") t.gggm.feasibility = parse_feasibility(value);
  else if (key == "gradient_source") {
    if (value == "loss") t.gggm.gradient_source = GradientSource::LossAtTeachingLabel;
    else if (value == "target_logit") t.gggm.gradient_source = GradientSource::TargetClassLogit;
    else throw ConfigError("unknown gradient source '" + value + "'");
  } else if (key == "T") t.max_iterations = to_count(value);
  else if (key == "combine") t.combine = parse_combine(value);
  else if (key == "success_rule") t.success_rule = parse_success_rule(value);
  else if (key == "arch") t.train.model.architecture = parse_architecture(value);
  else if (key == "hidden") t.train.model.hidden = to_count(value);
  else if (key == "activation") t.train.model.activation = parse_activation(value);
  else if (key == "epochs") t.train.epochs = to_count(value);
  else if (key == "batch") t.train.batch_size = to_count(value);
  else if (key == "lr") t.train.learning_rate = to_double(value);
  else if (key == "l2") t.train.l2_penalty = to_double(value);
  else if (key == "init_scale") t.train.init_scale = to_double(value);
  else if (key == "warm_start") t.train.warm_start = to_bool(value);
  else if (key == "sample_budget") b.sample_budget = to_count(value);
  else if (key == "beta") b.beta = to_double(value);
  else if (key == "pgd_steps") b.pgd_steps = to_count(value);
  else if (key == "pgd_lr") b.pgd_lr = to_double(value);
  else throw ConfigError("unknown variant key '" + key + "'");
  normalize(v);
}

void ExperimentPlan::validate() const {
  if (seeds.empty()) throw ConfigError("plan: no trials");
  if (variants.empty()) throw ConfigError("plan: the variant grid is empty");
  std::set<std::string> names;
  for (const VariantSpec& v : variants) {
    if (v.name.empty()) throw ConfigError("plan: variant without a name");
    if (!names.insert(v.name).second) throw ConfigError("plan: duplicate variant '" + v.name + "'");
    v.teaching.selection.validate();
    v.teaching.score.validate();
    v.teaching.train.validate();
    v.baseline.validate();
  }
  if (data_file && !targets_file) throw ConfigError("plan: data file needs a targets file");
  if (!data_file) data.validate();
  if (!(csr_cap > 0.0)) throw ConfigError("plan: csr_cap must be positive");
  if (curve_points < 1) throw ConfigError("plan: curve_points must be >= 1");
}

void ExperimentPlan::override_seed(std::uint64_t base) {
  const std::size_t count = seeds.size();
  seeds.clear();
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(base + i);
}

ExperimentPlan parse_plan(const std::string& text) {
  ExperimentPlan plan;
  VariantSpec defaults;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> variant_keys;
  std::size_t trials = 0;
  std::uint64_t base_seed = 1;
  enum class Section { Plan, Data, Defaults, Variant } section = Section::Plan;

  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        const std::string header = trim(line.substr(1, line.size() - 2));
        if (header == "plan") {
          section = Section::Plan;
        } else if (header == "data") {
          section = Section::Data;
        } else if (header == "defaults") {
          section = Section::Defaults;
        } else if (header.rfind("variant", 0) == 0) {
          const std::string name = unquote(trim(header.substr(7)));
          if (name.empty()) throw ConfigError("variant section needs a name");
          section = Section::Variant;
          variant_keys.push_back({name, {}});
        } else {
          throw ConfigError("unknown section [" + header + "]");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = unquote(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("empty key");
      switch (section) {
        case Section::Plan:
          apply_plan_key(plan, trials, base_seed, key, value);
          break;
        case Section::Data:
          apply_data_key(plan, key, value);
          break;
        case Section::Defaults:
          apply_variant_key(defaults, key, value);
          break;
        case Section::Variant:
          // Validate now for the line number; applied on top of defaults below.
          {
            VariantSpec probe;
            apply_variant_key(probe, key, value);
          }
          variant_keys.back().second.emplace_back(key, value);
          break;
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("plan line ") + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
  }

  for (auto& [name, keys] : variant_keys) {
    VariantSpec v = defaults;
    v.name = name;
    for (const auto& [key, value] : keys) apply_variant_key(v, key, value);
    plan.variants.push_back(std::move(v));
  }
  if (plan.seeds.empty()) {
    for (std::size_t i = 0; i < trials; ++i) plan.seeds.push_back(base_seed + i);
  } else if (trials != 0 && trials != plan.seeds.size()) {
    throw ParseError("plan: trials does not match the seed list length");
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text_file(path));
}

}  // namespace dmt
