#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "dmt/errors.hpp"
#include "dmt/gggm.hpp"
#include "dmt/synth.hpp"
#include "naive_gggm.hpp"
#include "support.hpp"

using namespace dmt;
using namespace dmt::testing;

namespace {

TargetSpec single(const Instance& x, int label) {
  TargetSpec t;
  t.targets.push_back({x, label, std::nullopt});
  return t;
}

}  // namespace

TEST_CASE("candidate filter") {
  const Instance x(3, 3);
  std::vector<double> r(9, 0.0);
  r[1 * 3 + 2] = 3.0;
  r[0 * 3 + 0] = -2.0;
  r[2 * 3 + 1] = 1.0;
  const auto two = top_q_candidates(r, x, 2, Feasibility::AnyFlip);
  REQUIRE(two.size() == 2);
  CHECK(two[0].key() == std::vector<Position>{{1, 2}});
  CHECK(two[1].key() == std::vector<Position>{{0, 0}});
  CHECK(two[1].magnitude == 2.0);
  CHECK(two[0].flips[0].direction == FlipDirection::Insert);

  const auto one = top_q_candidates(r, x, 1, Feasibility::AnyFlip);
  CHECK(one[0].key() == std::vector<Position>{{1, 2}});

  const std::vector<double> flat(9, 0.5);
  const auto ties = top_q_candidates(flat, x, 4, Feasibility::AnyFlip);
  CHECK(ties[0].key() == std::vector<Position>{{0, 0}});
  CHECK(ties[3].key() == std::vector<Position>{{1, 0}});

  SUBCASE("padding is never a candidate") {
    DatasetSchema s;
    s.num_features = 3;
    s.arity = 3;
    s.feature_arities = {3, 2, 3};
    const auto all = top_q_candidates(r, x, 9, Feasibility::AnyFlip, &s);
    CHECK(all.size() == 8);
    for (const Candidate& c : all) CHECK_FALSE(c.key()[0] == Position{1, 2});
  }

  SUBCASE("one-hot substitutions") {
    Instance oh(2, 3);
    oh.set(0, 0, true);
    oh.set(1, 2, true);
    const std::vector<double> r6(r.begin(), r.begin() + 6);
    const auto subs = top_q_candidates(r6, oh, 10, Feasibility::OneHotSubstitutions);
    CHECK(subs.size() == 4);
    for (const Candidate& c : subs) {
      REQUIRE(c.flips.size() == 2);
      CHECK(c.flips[0].direction == FlipDirection::Delete);
      CHECK(c.flips[1].direction == FlipDirection::Insert);
      CHECK(c.flips[0].position.feature == c.flips[1].position.feature);
      CHECK(is_strict_one_hot(modify(oh, c.flips, EncodingMode::StrictOneHot)));
    }
  }
}

TEST_CASE("best subset matches a naive enumerator") {
  Rng rng(99);
  int agree = 0;
  const int fixtures = 60;
  for (int i = 0; i < fixtures; ++i) {
    const std::size_t c = 2 + rng.index(2);
    const ModelParams p = random_model(rng, {}, 15, c, 2.0);
    const Instance origin = random_instance(rng, 5, 3);
    Instance x = origin;
    for (std::size_t k = rng.index(3); k > 0; --k) {
      const std::size_t f = rng.index(5), v = rng.index(3);
      x.set(f, v, !x.get(f, v));
    }
    const TargetSpec t = single(random_instance(rng, 5, 3), static_cast<int>(rng.index(c)));
    ScoreSpec s;
    if (i % 2) {
      s.kind = ScoreKind::Align;
      s.lambda = rng.uniform();
    }
    GggmConfig cfg;
    cfg.candidate_size = 1 + rng.index(3);
    cfg.max_subset_size = 1 + rng.index(3);
    // The current point is always within budget of its origin.
    cfg.budget = std::max<std::size_t>(1, hamming_diff(origin, x) + rng.index(3));
    const int y = static_cast<int>(rng.index(c));
    const auto cands = top_q_candidates(grad_input(p, x, y), x, cfg.candidate_size, cfg.feasibility);
    Scorer scorer(p, t, s);
    scorer.set_clean(origin, y);
    const SubsetChoice got = best_subset(scorer, x, y, origin, cands, cfg);
    const NaiveChoice want = naive_best(p, x, y, origin, cands, t, s, cfg);
    agree += sorted(got.flips) == sorted(want.flips) && got.score == want.score;
  }
  CHECK(agree == fixtures);
}

TEST_CASE("best subset edge cases") {
  // A single feature pulls the score down when set.
  ModelParams p = ModelParams::zeros({}, 4, 2);
  p.weights[4 + 1] = 3.0;  // class 1 likes bit 1
  const Instance x(2, 2);
  Instance target(2, 2);
  target.set(0, 1, true);
  const TargetSpec t = single(target, 1);
  Scorer scorer(p, t, ScoreSpec{});
  scorer.set_clean(x, 1);
  GggmConfig cfg;

  const auto cands = top_q_candidates(grad_input(p, x, 1), x, 1, Feasibility::AnyFlip);
  REQUIRE(cands[0].key() == std::vector<Position>{{0, 1}});
  const SubsetChoice one = best_subset(scorer, x, 1, x, cands, cfg);
  CHECK(one.flips.size() == 1);
  CHECK(one.score == doctest::Approx(0.0));

  // Already optimal: the empty subset wins.
  const SubsetChoice none = best_subset(scorer, target, 1, target,
                                        top_q_candidates(grad_input(p, target, 1), target, 3,
                                                         Feasibility::AnyFlip),
                                        cfg);
  CHECK(none.flips.empty());
  CHECK(none.members.empty());
}

TEST_CASE("perturbation budget") {
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const ModelParams p = random_model(rng, {Architecture::Mlp1h, 4, Activation::Tanh}, 24, 3);
    const LabeledInstance base{7, random_instance(rng, 6, 4), static_cast<int>(rng.index(3)), {}};
    const TargetSpec t = single(random_instance(rng, 6, 4), static_cast<int>(rng.index(3)));
    GggmConfig cfg;
    cfg.budget = 1 + rng.index(8);
    cfg.candidate_size = 1 + rng.index(4);
    cfg.max_subset_size = cfg.candidate_size;
    ScoreSpec s;
    s.kind = i % 2 ? ScoreKind::Align : ScoreKind::Dist;
    const PerturbResult r = gggm_perturb(p, base, t, s, cfg);
    CHECK(hamming_diff(base.instance, r.x_hat) <= cfg.budget);
    CHECK(modify(base.instance, r.flips) == r.x_hat);
    for (const GggmStepTrace& st : r.steps) CHECK(st.score_after <= st.score_before);
  }
}

TEST_CASE("one-hot perturbation stays one-hot") {
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    const ModelParams p = random_model(rng, {}, 20, 2);
    const LabeledInstance base{0, random_one_hot(rng, 5, 4), 1, {}};
    const TargetSpec t = single(random_one_hot(rng, 5, 4), 1);
    GggmConfig cfg;
    cfg.feasibility = Feasibility::OneHotSubstitutions;
    cfg.budget = 2 + 2 * rng.index(3);
    cfg.candidate_size = 3;
    const PerturbResult r = gggm_perturb(p, base, t, ScoreSpec{}, cfg);
    CHECK(is_strict_one_hot(r.x_hat));
    CHECK(hamming_diff(base.instance, r.x_hat) <= cfg.budget);
  }
}

TEST_CASE("no-op at the minimum") {
  Rng rng(4);
  const ModelParams p = random_model(rng, {}, 12, 2);
  const Instance x = random_instance(rng, 4, 3);
  GggmConfig cfg;
  cfg.budget = 3;
  cfg.candidate_size = 3;
  // g_dist is zero at the target itself.
  const PerturbResult r = gggm_perturb(p, {0, x, 1, {}}, single(x, 1), ScoreSpec{}, cfg);
  CHECK(r.x_hat == x);
  CHECK(r.flips.empty());
}

TEST_CASE("two single-flip steps follow the top-1 chain") {
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    const ModelParams p = random_model(rng, {}, 8, 2, 2.0);
    const Instance x0 = random_instance(rng, 4, 2);
    const TargetSpec t = single(random_instance(rng, 4, 2), 1);
    const int y = static_cast<int>(rng.index(2));
    GggmConfig cfg;
    cfg.budget = 2;
    cfg.candidate_size = 1;
    cfg.max_subset_size = 1;

    // Oracle: enumerate the chain x0 -> x0+c1 -> x0+c1+c2 and replay the
    // keep-or-flip decision at each link.
    auto top1 = [&](const Instance& x) {
      const std::vector<double> r = grad_input(p, x, y);
      std::size_t best = 0;
      for (std::size_t k = 1; k < r.size(); ++k)
        if (std::abs(r[k]) > std::abs(r[best])) best = k;
      Instance out = x;
      out.set(best / 2, best % 2, !x.get(best / 2, best % 2));
      return out;
    };
    auto score = [&](const Instance& x) { return g_dist(p, x, t); };
    Instance x = x0;
    for (int step = 0; step < 2; ++step) {
      const Instance next = top1(x);
      if (hamming_diff(x0, next) <= 2 && score(next) < score(x)) x = next;
    }
    const PerturbResult r = gggm_perturb(p, {0, x0, y, {}}, t, ScoreSpec{}, cfg);
    CHECK(r.x_hat == x);
    CHECK(score(r.x_hat) <= score(x0));
  }
}

TEST_CASE("dataset-level perturbation") {
  const SynthData data = synth_generate(SynthConfig{}, 2);
  TrainConfig tc;
  tc.epochs = 20;
  const ModelParams p = train(data.train, tc).params;
  const TargetSpec& t = data.tampering[0];
  GggmConfig cfg;

  Dataset one(data.train.schema());
  one.add_item(data.train[3]);
  const GggmResult r1 = gggm(p, one, t, ScoreSpec{}, cfg);
  CHECK(r1.perturbed.size() == 1);
  CHECK(r1.perturbed[0].id == data.train[3].id);
  CHECK(r1.perturbed[0].provenance.perturbed);
  CHECK(r1.perturbed[0].provenance.origin_id == data.train[3].id);

  Dataset dup(data.train.schema());
  LabeledInstance a = data.train[3], b = data.train[3];
  b.id = 9999;
  dup.add_item(a);
  dup.add_item(b);
  const GggmResult r2 = gggm(p, dup, t, ScoreSpec{}, cfg);
  CHECK(r2.perturbed[0].instance == r2.perturbed[1].instance);

  Dataset many(data.train.schema());
  for (std::size_t i = 0; i < 30; ++i) many.add_item(data.train[i * 20]);
  const GggmResult r3 = gggm(p, many, t, ScoreSpec{}, cfg);
  for (const LabeledInstance& it : r3.perturbed.items())
    CHECK(hamming_diff(it.instance, many.find(it.id)->instance) <= cfg.budget);

  std::ostringstream out;
  write_trace_jsonl(out, r3.traces);
  const std::string text = out.str();
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == r3.traces.size());

  GggmConfig bad;
  bad.candidate_size = 0;
  CHECK_THROWS_AS(bad.validate(64), ConfigError);
  bad.candidate_size = 65;
  CHECK_THROWS_AS(bad.validate(64), ConfigError);
  GggmConfig steps;
  steps.budget = 3;
  steps.candidate_size = 4;
  CHECK(steps.steps() == 1);
  steps.budget = 9;
  CHECK(steps.steps() == 2);
}
