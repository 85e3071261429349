#include "dmt/gggm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dmt/errors.hpp"

namespace dmt {

namespace {

Position position_of(std::size_t flat, std::size_t arity) {
  return {static_cast<std::uint32_t>(flat / arity), static_cast<std::uint32_t>(flat % arity)};
}

Flip flip_at(const Instance& x, Position p) {
  return {p, x.get(p) ? FlipDirection::Delete : FlipDirection::Insert};
}

std::vector<Position> sorted_positions(const FlipList& flips) {
  std::vector<Position> out;
  out.reserve(flips.size());
  for (const Flip& f : flips) out.push_back(f.position);
  std::sort(out.begin(), out.end());
  return out;
}

struct Evaluated {
  std::vector<std::size_t> members;
  FlipList flips;
  std::vector<Position> key;
  double score = 0.0;
};

bool better(const Evaluated& a, const Evaluated& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
  return a.key < b.key;
}

}  // namespace

void GggmConfig::validate(std::size_t input_dim) const {
  if (budget < 1) throw ConfigError("gggm: budget must be >= 1");
  if (candidate_size < 1 || candidate_size > input_dim) {
    throw ConfigError("gggm: candidate_size must lie in [1, M*N]");
  }
  if (max_subset_size < 1) throw ConfigError("gggm: max_subset_size must be >= 1");
}

std::size_t GggmConfig::steps() const { return std::max<std::size_t>(1, budget / candidate_size); }

std::vector<Position> Candidate::key() const {
  std::vector<Position> out;
  for (const Flip& f : flips) out.push_back(f.position);
  return out;
}

std::vector<Candidate> top_q_candidates(std::span<const double> r, const Instance& x_hat,
                                        std::size_t q, Feasibility feasibility,
                                        const DatasetSchema* schema) {
  if (r.size() != x_hat.size()) throw ShapeError("gradient and instance sizes differ");
  const std::size_t arity = x_hat.arity();
  auto usable = [&](Position p) { return schema == nullptr || !schema->is_padding(p); };

  std::vector<Candidate> all;
  if (feasibility == Feasibility::AnyFlip) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Position p = position_of(i, arity);
      if (!usable(p)) continue;
      all.push_back({{flip_at(x_hat, p)}, std::abs(r[i])});
    }
  } else {
    for (std::size_t m = 0; m < x_hat.num_features(); ++m) {
      for (std::size_t from = 0; from < arity; ++from) {
        if (!x_hat.get(m, from)) continue;
        for (std::size_t to = 0; to < arity; ++to) {
          const Position p_to{static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(to)};
          if (to == from || x_hat.get(p_to) || !usable(p_to)) continue;
          const Position p_from{static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(from)};
          all.push_back({{{p_from, FlipDirection::Delete}, {p_to, FlipDirection::Insert}},
                         std::abs(r[m * arity + from]) + std::abs(r[m * arity + to])});
        }
      }
    }
  }
  // Candidates are generated in position order, so a stable sort keeps the
  // lexicographic tie-break.
  std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    return a.magnitude > b.magnitude;
  });
  if (all.size() > q) all.resize(q);
  return all;
}

SubsetChoice best_subset(const Scorer& scorer, const Instance& x_hat, int label,
                         const Instance& origin, std::span<const Candidate> candidates,
                         const GggmConfig& cfg) {
  const bool one_hot = cfg.feasibility == Feasibility::OneHotSubstitutions;
  const EncodingMode mode = one_hot ? EncodingMode::StrictOneHot : EncodingMode::MultiHot;
  const auto base_distance = static_cast<long>(hamming_diff(origin, x_hat));
  const std::size_t max_size = std::min(cfg.max_subset_size, candidates.size());

  std::optional<Evaluated> best;
  std::vector<std::size_t> members;

  auto evaluate = [&]() {
    FlipList flips;
    long distance = base_distance;
    std::vector<std::uint32_t> rows;
    for (std::size_t idx : members) {
      for (const Flip& f : candidates[idx].flips) {
        distance += x_hat.get(f.position) == origin.get(f.position) ? 1 : -1;
        flips.push_back(f);
      }
      if (one_hot) rows.push_back(candidates[idx].flips.front().position.feature);
    }
    if (distance > static_cast<long>(cfg.budget)) return;
    if (one_hot) {
      std::sort(rows.begin(), rows.end());
      if (std::adjacent_find(rows.begin(), rows.end()) != rows.end()) return;
    }
    Evaluated e;
    e.members = members;
    e.key = sorted_positions(flips);
    e.score = scorer(modify(x_hat, flips, mode), label);
    e.flips = std::move(flips);
    if (!best || better(e, *best)) best = std::move(e);
  };

  // Combinations in increasing size, each in increasing index order.
  auto recurse = [&](auto&& self, std::size_t start, std::size_t remaining) -> void {
    if (remaining == 0) {
      evaluate();
      return;
    }
    for (std::size_t i = start; i + remaining <= candidates.size(); ++i) {
      members.push_back(i);
      self(self, i + 1, remaining - 1);
      members.pop_back();
    }
  };
  const std::size_t min_size = cfg.allow_empty_subset ? 0 : 1;
  for (std::size_t size = min_size; size <= max_size; ++size) recurse(recurse, 0, size);

  if (!best) {
    // Nothing admissible: keep the current state.
    return {{}, {}, scorer(x_hat, label)};
  }
  return {std::move(best->members), std::move(best->flips), best->score};
}

PerturbResult gggm_perturb(const ModelParams& theta, const LabeledInstance& base,
                           const TargetSpec& targets, const ScoreSpec& score,
                           const GggmConfig& cfg, const DatasetSchema* schema) {
  cfg.validate(base.instance.size());
  const EncodingMode mode = cfg.feasibility == Feasibility::OneHotSubstitutions
                                ? EncodingMode::StrictOneHot
                                : EncodingMode::MultiHot;
  Scorer scorer(theta, targets, score);
  scorer.set_clean(base.instance, base.label);

  PerturbResult out;
  out.x_hat = base.instance;
  int empty_streak = 0;
  for (std::size_t step = 0; step < cfg.steps(); ++step) {
    GggmStepTrace trace;
    trace.origin_id = base.id;
    trace.step = step;
    const std::vector<double> x_real = out.x_hat.to_real();
    trace.gradient = cfg.gradient_source == GradientSource::LossAtTeachingLabel
                         ? grad_input(theta, x_real, base.label)
                         : grad_input_logit(theta, x_real, targets.targets.front().target_label);
    trace.candidates =
        top_q_candidates(trace.gradient, out.x_hat, cfg.candidate_size, cfg.feasibility, schema);
    trace.score_before = scorer(out.x_hat, base.label);
    const SubsetChoice choice =
        best_subset(scorer, out.x_hat, base.label, base.instance, trace.candidates, cfg);
    trace.chosen = choice.flips;
    if (!choice.flips.empty()) out.x_hat = modify(out.x_hat, choice.flips, mode);
    trace.score_after = choice.flips.empty() ? trace.score_before : choice.score;
    out.steps.push_back(std::move(trace));

    empty_streak = choice.flips.empty() ? empty_streak + 1 : 0;
    if (empty_streak >= 2) break;
  }
  out.flips = diff_flips(base.instance, out.x_hat);
  return out;
}

GggmResult gggm(const ModelParams& theta, const Dataset& d_base, const TargetSpec& targets,
                const ScoreSpec& score, const GggmConfig& cfg) {
  if (d_base.empty()) throw ConfigError("gggm: empty base dataset");
  GggmResult out{Dataset(d_base.schema()), {}};
  for (const LabeledInstance& base : d_base.items()) {
    PerturbResult r = gggm_perturb(theta, base, targets, score, cfg, &d_base.schema());
    out.perturbed.add_item({base.id, std::move(r.x_hat), base.label,
                            Provenance::from_origin(base.id, std::move(r.flips))});
    for (GggmStepTrace& s : r.steps) out.traces.push_back(std::move(s));
  }
  return out;
}

void write_trace_jsonl(std::ostream& out, std::span<const GggmStepTrace> traces) {
  auto flips_json = [](const FlipList& flips) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Flip& f : flips) {
      arr.push_back({f.position.feature, f.position.value,
                     f.direction == FlipDirection::Insert ? "insert" : "delete"});
    }
    return arr;
  };
  for (const GggmStepTrace& t : traces) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const Candidate& c : t.candidates) {
      candidates.push_back({{"flips", flips_json(c.flips)}, {"magnitude", c.magnitude}});
    }
    nlohmann::json rec{{"origin", t.origin_id},       {"step", t.step},
                       {"gradient", t.gradient},      {"candidates", candidates},
                       {"chosen", flips_json(t.chosen)}, {"score_before", t.score_before},
                       {"score_after", t.score_after}};
    out << rec.dump() << '\n';
  }
}

const char* to_string(Feasibility f) {
  return f == Feasibility::AnyFlip ? "any_flip" : "one_hot_substitutions";
}

Feasibility parse_feasibility(const std::string& s) {
  if (s == "any_flip" || s == "AnyFlip") return Feasibility::AnyFlip;
  if (s == "one_hot_substitutions" || s == "OneHotSubstitutions") {
    return Feasibility::OneHotSubstitutions;
  }
  throw ConfigError("unknown feasibility '" + s + "'");
}

}  // namespace dmt
