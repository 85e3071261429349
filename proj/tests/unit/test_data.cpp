#include <doctest.h>

#include <filesystem>
#include <set>

#include "dmt/dataset_io.hpp"
#include "dmt/errors.hpp"
#include "dmt/synth.hpp"
#include "support.hpp"

using namespace dmt;
using namespace dmt::testing;

TEST_CASE("hamming distance") {
  const Instance a = Instance::from_rows({{1, 0}, {0, 1}});
  const Instance b = Instance::from_rows({{0, 1}, {0, 1}});
  CHECK(hamming_diff(a, a) == 0);
  CHECK(hamming_diff(a, b) == 2);

  Instance c = a;
  c.set(1, 0, true);
  CHECK(hamming_diff(a, c) == 1);

  CHECK_THROWS_AS(hamming_diff(a, Instance(3, 2)), ShapeError);
}

TEST_CASE("jaccard distance") {
  const std::vector<Position> pa{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<Position> pb{{1, 0}, {2, 0}, {3, 0}};
  const Instance a = Instance::from_active(4, 2, pa);
  const Instance b = Instance::from_active(4, 2, pb);
  CHECK(jaccard_distance(a, b) == doctest::Approx(0.5));
  CHECK(jaccard_distance(a, a) == 0.0);

  const std::vector<Position> pc{{3, 1}};
  CHECK(jaccard_distance(a, Instance::from_active(4, 2, pc)) == 1.0);
  CHECK(jaccard_distance(Instance(4, 2), Instance(4, 2)) == 0.0);
  CHECK_THROWS_AS(jaccard_distance(a, Instance(4, 3)), ShapeError);
}

TEST_CASE("modify") {
  Rng rng(7);
  const Instance x = random_instance(rng, 5, 3);
  CHECK(modify(x, {}) == x);

  SUBCASE("single insert") {
    Position p{};
    for (std::uint32_t f = 0; f < 5; ++f)
      for (std::uint32_t v = 0; v < 3; ++v)
        if (!x.get(f, v)) p = {f, v};
    const Instance y = modify(x, {{p, FlipDirection::Insert}});
    CHECK(y.get(p));
    CHECK(hamming_diff(x, y) == 1);
  }

  SUBCASE("one-hot substitution") {
    Instance oh(4, 4);
    for (std::size_t f = 0; f < 4; ++f) oh.set(f, 0, true);
    oh.set(2, 0, false);
    oh.set(2, 1, true);
    const FlipList sub{{{2, 1}, FlipDirection::Delete}, {{2, 3}, FlipDirection::Insert}};
    const Instance y = modify(oh, sub, EncodingMode::StrictOneHot);
    CHECK(y.get(2, 3));
    CHECK_FALSE(y.get(2, 1));
    CHECK(hamming_diff(oh, y) == 2);
    CHECK(is_strict_one_hot(y));

    CHECK_THROWS_AS(modify(oh, {{{2, 3}, FlipDirection::Insert}}, EncodingMode::StrictOneHot),
                    ModeError);
  }

  SUBCASE("direction mismatch") {
    Instance z(2, 2);
    CHECK_THROWS_AS(modify(z, {{{0, 0}, FlipDirection::Delete}}), InvalidFlipError);
    z.set(0, 0, true);
    CHECK_THROWS_AS(modify(z, {{{0, 0}, FlipDirection::Insert}}), InvalidFlipError);
  }

  SUBCASE("duplicate positions") {
    CHECK_THROWS_AS(validate_flips({{{0, 0}, FlipDirection::Insert}, {{0, 0}, FlipDirection::Delete}}),
                    InvalidFlipError);
  }
}

TEST_CASE("flip lists round trip") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance a = random_instance(rng, 6, 3);
    const Instance b = random_instance(rng, 6, 3);
    const FlipList f = diff_flips(a, b);
    CHECK(f.size() == hamming_diff(a, b));
    CHECK(modify(a, f) == b);
    CHECK(modify(b, reverse_flips(f)) == a);
  }
}

TEST_CASE("dataset ids and replace") {
  Dataset d = make_dataset(2, 2, 2, {{Instance(2, 2), 0}, {Instance(2, 2), 1}});
  CHECK(d.size() == 2);
  CHECK(d[0].id == 0);
  CHECK(d[1].id == 1);
  CHECK(d.find(1)->label == 1);
  CHECK(d.find(9) == nullptr);

  LabeledInstance dup = d[0];
  CHECK_THROWS_AS(d.add_item(dup), ConfigError);

  LabeledInstance missing = d[0];
  missing.id = 42;
  CHECK_THROWS_AS(d.replace(missing), CombineError);
}

namespace {

/// Nearest-centroid classifier fit on the data itself.
double centroid_accuracy(const Dataset& d) {
  const std::size_t dim = d.schema().input_dim();
  const std::size_t c = d.schema().num_classes;
  std::vector<std::vector<double>> mean(c, std::vector<double>(dim, 0.0));
  std::vector<double> count(c, 0.0);
  for (const LabeledInstance& it : d.items()) {
    const std::vector<double> x = it.instance.to_real();
    for (std::size_t i = 0; i < dim; ++i) mean[it.label][i] += x[i];
    count[it.label] += 1.0;
  }
  for (std::size_t k = 0; k < c; ++k)
    for (double& v : mean[k]) v /= count[k];
  std::size_t hits = 0;
  for (const LabeledInstance& it : d.items()) {
    const std::vector<double> x = it.instance.to_real();
    int best = 0;
    double best_d = 1e300;
    for (std::size_t k = 0; k < c; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += (x[i] - mean[k][i]) * (x[i] - mean[k][i]);
      if (s < best_d) {
        best_d = s;
        best = static_cast<int>(k);
      }
    }
    hits += best == it.label;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace

TEST_CASE("synthetic generator") {
  SynthConfig cfg;

  SUBCASE("separable profiles") {
    const SynthData data = synth_generate(cfg, 3);
    CHECK(data.train.size() == 800);
    CHECK(data.test.size() == 400);
    CHECK(centroid_accuracy(data.train) == 1.0);
    // No high-probability bit is shared between the class profiles.
    for (std::size_t i = 0; i < data.profiles[0].size(); ++i)
      CHECK_FALSE((data.profiles[0][i] > 0.5 && data.profiles[1][i] > 0.5));
  }

  SUBCASE("deterministic") {
    const SynthData a = synth_generate(cfg, 5);
    const SynthData b = synth_generate(cfg, 5);
    CHECK(dataset_to_json(a.train) == dataset_to_json(b.train));
    CHECK(a.tampering == b.tampering);
    CHECK(a.improvement == b.improvement);
    const SynthData c = synth_generate(cfg, 6);
    CHECK_FALSE(dataset_to_json(a.train) == dataset_to_json(c.train));
  }

  SUBCASE("empty class") {
    cfg.samples_per_class = {400, 0};
    CHECK_THROWS_AS(synth_generate(cfg, 1), ConfigError);
  }

  SUBCASE("bad probability") {
    cfg.p_high = 1.5;
    CHECK_THROWS_AS(synth_generate(cfg, 1), ConfigError);
  }

  SUBCASE("targets") {
    const SynthData data = synth_generate(cfg, 2);
    REQUIRE_FALSE(data.tampering.empty());
    for (const TargetSpec& t : data.tampering) {
      CHECK(t.targets.size() == 1);
      CHECK(t.task == TaskKind::Tampering);
      CHECK(t.targets[0].target_label != *t.targets[0].original_label);
      CHECK(profile_classify(data.profiles, t.targets[0].instance) ==
            *t.targets[0].original_label);
    }
    for (const TargetSpec& t : data.improvement) {
      CHECK(t.targets.size() == cfg.group_size);
      CHECK(t.task == TaskKind::Improvement);
      for (const Target& g : t.targets) CHECK(g.target_label == *g.original_label);
    }
  }

  SUBCASE("one-hot mode") {
    cfg.mode = EncodingMode::StrictOneHot;
    cfg.noise = 0.1;
    const SynthData data = synth_generate(cfg, 4);
    for (const LabeledInstance& it : data.train.items()) CHECK(is_strict_one_hot(it.instance));
  }
}

TEST_CASE("dataset files") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "dmt_test_data";
  std::filesystem::create_directories(dir);
  SynthConfig cfg;
  cfg.samples_per_class = {20, 20};
  cfg.test_per_class = {5, 5};
  SynthData data = synth_generate(cfg, 9);
  // One perturbed item so provenance is exercised.
  const LabeledInstance& base = data.train[0];
  const FlipList f = diff_flips(base.instance, data.train[25].instance);
  data.train.add(modify(base.instance, f), base.label, Provenance::from_origin(base.id, f));

  save_dataset(data.train, dir / "train.json");
  CHECK(load_dataset(dir / "train.json") == data.train);

  save_targets(data.tampering[0], dir / "t.json");
  CHECK(load_targets(dir / "t.json") == data.tampering[0]);

  SUBCASE("bad bit value") {
    const std::string text = R"({"schema":{"m":1,"n":2,"c":2,"mode":"multihot"},
      "items":[{"id":0,"label":0,"provenance":{"kind":"clean"},"dense":[[0,2]]}]})";
    CHECK_THROWS_AS(dataset_from_json(text), ParseError);
  }

  SUBCASE("label out of range") {
    const std::string text = R"({"schema":{"m":1,"n":2,"c":3,"mode":"multihot"},
      "items":[{"id":0,"label":0,"provenance":{"kind":"clean"},"bits":[]},
               {"id":7,"label":5,"provenance":{"kind":"clean"},"bits":[[0,1]]}]})";
    try {
      dataset_from_json(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK(what.find("record 1") != std::string::npos);
      CHECK(what.find('5') != std::string::npos);
    }
  }

  SUBCASE("malformed json") {
    CHECK_THROWS_AS(dataset_from_json("{\"schema\":"), ParseError);
  }
  std::filesystem::remove_all(dir);
}
