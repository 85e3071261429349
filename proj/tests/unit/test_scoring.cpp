#include <doctest.h>

#include <cmath>

#include "dmt/scoring.hpp"
#include "support.hpp"

using namespace dmt;
using namespace dmt::testing;

namespace {

TargetSpec single(const Instance& x, int label) {
  TargetSpec t;
  t.targets.push_back({x, label, std::nullopt});
  return t;
}

/// C classes over a 1 x 2 input; bit v selects column v of W.
ModelParams column_model(const std::vector<double>& col0, const std::vector<double>& col1) {
  ModelParams p = ModelParams::zeros({}, 2, col0.size());
  for (std::size_t k = 0; k < col0.size(); ++k) {
    p.weights[k * 2 + 0] = col0[k];
    p.weights[k * 2 + 1] = col1[k];
  }
  return p;
}

const Instance kBit0 = Instance::from_rows({{1, 0}});
const Instance kBit1 = Instance::from_rows({{0, 1}});

}  // namespace

TEST_CASE("prediction distance") {
  const double l9 = std::log(9.0);
  const ModelParams p = column_model({l9, 0.0}, {0.0, l9});
  CHECK(predict_probs(p, kBit0)[0] == doctest::Approx(0.9));
  CHECK(g_dist(p, kBit1, single(kBit0, 1)) == doctest::Approx(1.1314).epsilon(1e-4));
  CHECK(g_dist(p, kBit0, single(kBit0, 1)) == 0.0);

  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const ModelParams q = random_model(rng, {}, 12, 3);
    const Instance a = random_instance(rng, 4, 3), b = random_instance(rng, 4, 3);
    const Instance x = random_instance(rng, 4, 3);
    TargetSpec both = single(a, 0);
    both.targets.push_back({b, 0, std::nullopt});
    for (DistSpace s : {DistSpace::Probabilities, DistSpace::Logits}) {
      const double da = g_dist(q, x, single(a, 0), s), db = g_dist(q, x, single(b, 0), s);
      CHECK(g_dist(q, x, both, s) == doctest::Approx((da + db) / 2.0));
      CHECK(da >= 0.0);
    }
  }
}

TEST_CASE("gradient alignment") {
  SUBCASE("self") {
    Rng rng(2);
    const ModelParams p = random_model(rng, {}, 12, 3);
    const Instance x = random_instance(rng, 4, 3);
    CHECK(align(p, x, 1, x, 1) == doctest::Approx(1.0));
  }

  SUBCASE("antipodal") {
    const ModelParams p = ModelParams::zeros({}, 2, 2);
    CHECK(align(p, kBit0, 0, kBit0, 1) == doctest::Approx(-1.0));
  }

  SUBCASE("orthogonal") {
    // p(bit0) = (0.2, 0.2, 0.6), p(bit1) = (2/9, 2/9, 5/9):
    // (p_a - e0) . (p_b - e1) = -0.16 + 0.2*(2/9 - 1) + ... = 0 and the inputs are disjoint.
    const ModelParams p = column_model({std::log(0.2), std::log(0.2), std::log(0.6)},
                                       {std::log(2.0 / 9), std::log(2.0 / 9), std::log(5.0 / 9)});
    const std::vector<double> ga = grad_theta(p, kBit0, 0), gb = grad_theta(p, kBit1, 1);
    double dot = 0.0;
    for (std::size_t i = 0; i < ga.size(); ++i) dot += ga[i] * gb[i];
    CHECK(std::abs(dot) < 1e-12);
    CHECK(std::abs(align(p, kBit0, 0, kBit1, 1)) < 1e-12);
  }

  SUBCASE("zero gradient guard") {
    const std::vector<double> z(4, 0.0), v{1, 2, 3, 4};
    CHECK(cosine_similarity(z, v) == 0.0);
    CHECK(cosine_similarity(v, z) == 0.0);
  }

  SUBCASE("symmetric and scale invariant") {
    Rng rng(23);
    for (int i = 0; i < 20; ++i) {
      const ModelParams p = random_model(rng, {Architecture::Mlp1h, 5, Activation::Tanh}, 12, 3);
      const Instance a = random_instance(rng, 4, 3), b = random_instance(rng, 4, 3);
      CHECK(align(p, a, 0, b, 2) == doctest::Approx(align(p, b, 2, a, 0)));
      std::vector<double> gb = grad_theta(p, b, 2);
      const double base = cosine_similarity(grad_theta(p, a, 0), gb);
      for (double& g : gb) g *= 3.7;
      CHECK(cosine_similarity(grad_theta(p, a, 0), gb) == doctest::Approx(base));
    }
  }
}

TEST_CASE("alignment score") {
  const ModelParams zero = ModelParams::zeros({}, 2, 2);
  // Clean term antipodal, target term aligned.
  CHECK(g_align(zero, kBit0, 1, kBit0, 0, single(kBit0, 1), 0.5) == doctest::Approx(0.0));
  CHECK(g_align(zero, kBit0, 0, kBit0, 0, single(kBit1, 1), 0.0) == doctest::Approx(-1.0));

  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    const ModelParams p = random_model(rng, {}, 12, 3);
    const Instance xh = random_instance(rng, 4, 3), xc = random_instance(rng, 4, 3);
    TargetSpec t = single(random_instance(rng, 4, 3), 2);
    t.targets.push_back({random_instance(rng, 4, 3), 2, std::nullopt});
    const double lambda = rng.uniform();
    const double g = g_align(p, xh, 1, xc, 1, t, lambda);
    CHECK(g >= -1.0);
    CHECK(g <= 1.0);
    CHECK(g_align(p, xh, 1, xc, 1, t, 1.0) ==
          doctest::Approx(-cosine_similarity(grad_theta(p, xh, 1), mean_target_gradient(p, t))));

    ScoreSpec spec;
    spec.kind = ScoreKind::Align;
    spec.lambda = lambda;
    Scorer s(p, t, spec);
    s.set_clean(xc, 1);
    CHECK(s(xh, 1) == g);
    CHECK(s(xh, 1) == s(xh, 1));

    ScoreSpec dist;
    Scorer sd(p, t, dist);
    CHECK(sd(xh, 1) == g_dist(p, xh, t));
  }
}
