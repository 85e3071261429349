#include "dmt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmt/errors.hpp"
#include "dmt/rng.hpp"

namespace dmt {

namespace {

using Profile = std::vector<double>;

std::vector<Profile> build_profiles(const SynthConfig& cfg, Rng& rng) {
  if (!cfg.profiles.empty()) return cfg.profiles;
  const std::size_t m_count = cfg.num_features;
  const std::size_t n_count = cfg.arity;
  const std::size_t c_count = cfg.num_classes;

  std::vector<std::size_t> rows(m_count);
  std::iota(rows.begin(), rows.end(), 0);
  rng.shuffle(std::span(rows));
  const auto distinct =
      static_cast<std::size_t>(std::lround(cfg.separation * static_cast<double>(m_count)));
  std::vector<bool> is_distinct(m_count, false);
  for (std::size_t i = 0; i < distinct; ++i) is_distinct[rows[i]] = true;

  std::vector<Profile> profiles(c_count, Profile(m_count * n_count, cfg.p_low));
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t shift = rng.index(n_count);
    for (std::size_t c = 0; c < c_count; ++c) {
      const std::size_t sig = is_distinct[m] ? (c + shift) % n_count : shift;
      profiles[c][m * n_count + sig] = cfg.p_high;
    }
  }
  return profiles;
}

void sample_row(const Profile& p, std::size_t m, EncodingMode mode, Rng& rng, Instance& x) {
  const std::size_t n_count = x.arity();
  if (mode == EncodingMode::MultiHot) {
    for (std::size_t n = 0; n < n_count; ++n) x.set(m, n, rng.bernoulli(p[m * n_count + n]));
    return;
  }
  double total = 0.0;
  for (std::size_t n = 0; n < n_count; ++n) total += p[m * n_count + n];
  std::size_t pick = 0;
  if (total <= 0.0) {
    pick = rng.index(n_count);
  } else {
    double u = rng.uniform() * total;
    pick = n_count - 1;
    for (std::size_t n = 0; n < n_count; ++n) {
      u -= p[m * n_count + n];
      if (u < 0.0) {
        pick = n;
        break;
      }
    }
  }
  for (std::size_t n = 0; n < n_count; ++n) x.set(m, n, n == pick);
}

void apply_noise(double rate, EncodingMode mode, Rng& rng, Instance& x) {
  if (rate <= 0.0) return;
  for (std::size_t m = 0; m < x.num_features(); ++m) {
    if (mode == EncodingMode::MultiHot) {
      for (std::size_t n = 0; n < x.arity(); ++n) {
        if (rng.bernoulli(rate)) x.set(m, n, !x.get(m, n));
      }
    } else if (rng.bernoulli(rate)) {
      const std::size_t pick = rng.index(x.arity());
      for (std::size_t n = 0; n < x.arity(); ++n) x.set(m, n, n == pick);
    }
  }
}

/// Draws each row from `primary` except for `borrowed` random rows drawn
/// from `secondary`.
Instance sample_mixture(const SynthConfig& cfg, const Profile& primary, const Profile& secondary,
                        std::size_t borrowed, Rng& rng) {
  std::vector<std::size_t> rows(cfg.num_features);
  std::iota(rows.begin(), rows.end(), 0);
  rng.shuffle(std::span(rows));
  std::vector<bool> from_secondary(cfg.num_features, false);
  for (std::size_t i = 0; i < std::min(borrowed, rows.size()); ++i) from_secondary[rows[i]] = true;
  Instance x(cfg.num_features, cfg.arity);
  for (std::size_t m = 0; m < cfg.num_features; ++m) {
    sample_row(from_secondary[m] ? secondary : primary, m, cfg.mode, rng, x);
  }
  return x;
}

int other_class(std::size_t c, std::size_t num_classes, Rng& rng) {
  const std::size_t offset = 1 + rng.index(num_classes - 1);
  return static_cast<int>((c + offset) % num_classes);
}

Dataset sample_split(const SynthConfig& cfg, const std::vector<Profile>& profiles,
                     const std::vector<std::size_t>& per_class, Rng& rng) {
  DatasetSchema schema;
  schema.num_features = cfg.num_features;
  schema.arity = cfg.arity;
  schema.num_classes = cfg.num_classes;
  schema.mode = cfg.mode;

  std::vector<std::pair<Instance, int>> rows;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      Instance x(cfg.num_features, cfg.arity);
      for (std::size_t m = 0; m < cfg.num_features; ++m) {
        sample_row(profiles[c], m, cfg.mode, rng, x);
      }
      apply_noise(cfg.noise, cfg.mode, rng, x);
      rows.emplace_back(std::move(x), static_cast<int>(c));
    }
  }
  rng.shuffle(std::span(rows));
  Dataset d(schema);
  for (auto& [x, label] : rows) d.add(std::move(x), label);
  return d;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_features < 1 || arity < 1) throw ConfigError("synth: M and N must be >= 1");
  if (num_classes < 2) throw ConfigError("synth: C must be >= 2");
  if (samples_per_class.size() != num_classes) {
    throw ConfigError("synth: samples_per_class needs one entry per class");
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (samples_per_class[c] == 0) {
      throw ConfigError("synth: class " + std::to_string(c) + " has zero samples");
    }
  }
  if (!test_per_class.empty() && test_per_class.size() != num_classes) {
    throw ConfigError("synth: test_per_class needs one entry per class (or none)");
  }
  auto is_prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  if (!is_prob(separation)) throw ConfigError("synth: separation must lie in [0, 1]");
  if (!is_prob(noise)) throw ConfigError("synth: noise must lie in [0, 1]");
  if (!is_prob(p_high) || !is_prob(p_low)) throw ConfigError("synth: invalid probabilities");
  if (!is_prob(group_jitter)) throw ConfigError("synth: group_jitter must lie in [0, 1]");
  if (profiles.empty()) {
    if (separation > 0.0 && arity < num_classes) {
      throw ConfigError("synth: distinct class signatures need arity >= num_classes");
    }
  } else {
    if (profiles.size() != num_classes) throw ConfigError("synth: one profile per class");
    for (const auto& p : profiles) {
      if (p.size() != num_features * arity) throw ConfigError("synth: profile has wrong size");
      if (!std::all_of(p.begin(), p.end(), is_prob)) {
        throw ConfigError("synth: invalid probabilities in profile");
      }
    }
  }
  if (boundary_rows > num_features || mislabeled_rows > num_features) {
    throw ConfigError("synth: borrowed rows exceed the feature count");
  }
}

int profile_classify(const std::vector<std::vector<double>>& profiles, const Instance& x) {
  constexpr double kFloor = 1e-9;
  int best = 0;
  double best_ll = -INFINITY;
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = std::clamp(profiles[c][i], kFloor, 1.0 - kFloor);
      ll += x.bits()[i] ? std::log(p) : std::log1p(-p);
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = static_cast<int>(c);
    }
  }
  return best;
}

SynthData synth_generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng profile_rng(mix_seed(seed, 1));
  Rng train_rng(mix_seed(seed, 2));
  Rng test_rng(mix_seed(seed, 3));
  Rng target_rng(mix_seed(seed, 4));

  SynthData out;
  out.profiles = build_profiles(config, profile_rng);
  out.train = sample_split(config, out.profiles, config.samples_per_class, train_rng);
  std::vector<std::size_t> test_counts = config.test_per_class;
  if (test_counts.empty()) test_counts.assign(config.num_classes, 0);
  out.test = sample_split(config, out.profiles, test_counts, test_rng);

  constexpr int kMaxAttempts = 1000;
  for (std::size_t i = 0; i < config.tampering_candidates; ++i) {
    const std::size_t c = i % config.num_classes;
    const int desired = other_class(c, config.num_classes, target_rng);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      Instance x = sample_mixture(config, out.profiles[c], out.profiles[desired],
                                  config.boundary_rows, target_rng);
      if (profile_classify(out.profiles, x) != static_cast<int>(c)) continue;
      TargetSpec spec;
      spec.task = TaskKind::Tampering;
      spec.targets.push_back({std::move(x), desired, static_cast<int>(c)});
      out.tampering.push_back(std::move(spec));
      break;
    }
  }

  for (std::size_t g = 0; g < config.improvement_groups; ++g) {
    const std::size_t truth = g % config.num_classes;
    const int lookalike = other_class(truth, config.num_classes, target_rng);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      Instance center = sample_mixture(config, out.profiles[lookalike], out.profiles[truth],
                                       config.num_features - config.mislabeled_rows, target_rng);
      if (profile_classify(out.profiles, center) != lookalike) continue;
      TargetSpec spec;
      spec.task = TaskKind::Improvement;
      for (std::size_t k = 0; k < config.group_size; ++k) {
        Instance member = center;
        if (k > 0) {
          for (std::size_t m = 0; m < config.num_features; ++m) {
            if (config.mode == EncodingMode::StrictOneHot) {
              if (target_rng.bernoulli(config.group_jitter * static_cast<double>(config.arity))) {
                sample_row(out.profiles[lookalike], m, config.mode, target_rng, member);
              }
            } else {
              for (std::size_t n = 0; n < config.arity; ++n) {
                if (target_rng.bernoulli(config.group_jitter)) member.set(m, n, !member.get(m, n));
              }
            }
          }
        }
        spec.targets.push_back({std::move(member), static_cast<int>(truth), static_cast<int>(truth)});
      }
      out.improvement.push_back(std::move(spec));
      break;
    }
  }
  return out;
}

}  // namespace dmt
