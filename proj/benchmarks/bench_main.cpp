#include <benchmark/benchmark.h>

#include "dmt/gggm.hpp"
#include "dmt/selection.hpp"
#include "dmt/synth.hpp"
#include "dmt/teaching.hpp"

using namespace dmt;

namespace {

const SynthData& data() {
  static const SynthData d = synth_generate(SynthConfig{}, 1);
  return d;
}

const ModelParams& clean_model() {
  static const ModelParams p = train(data().train, TrainConfig{}).params;
  return p;
}

}  // namespace

static void BM_Train(benchmark::State& state) {
  TrainConfig cfg;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(data().train, cfg).params.weights.data());
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(data().train.size()));
}
BENCHMARK(BM_Train)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_TrainMlp(benchmark::State& state) {
  TrainConfig cfg;
  cfg.model = {Architecture::Mlp1h, 32, Activation::Relu};
  for (auto _ : state) benchmark::DoNotOptimize(train(data().train, cfg).params.weights.data());
}
BENCHMARK(BM_TrainMlp)->Unit(benchmark::kMillisecond);

static void BM_SelectBase(benchmark::State& state) {
  SelectionPolicy policy;
  policy.k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(select_base(data().train, data().tampering[0], policy));
}
BENCHMARK(BM_SelectBase)->Arg(10)->Arg(100);

static void BM_GggmPerturb(benchmark::State& state) {
  GggmConfig cfg;
  cfg.candidate_size = static_cast<std::size_t>(state.range(0));
  cfg.max_subset_size = cfg.candidate_size;
  ScoreSpec score;
  score.kind = state.range(1) ? ScoreKind::Align : ScoreKind::Dist;
  const LabeledInstance& base = data().train[0];
  for (auto _ : state)
    benchmark::DoNotOptimize(gggm_perturb(clean_model(), base, data().tampering[0], score, cfg).x_hat);
}
BENCHMARK(BM_GggmPerturb)->ArgsProduct({{2, 4, 8}, {0, 1}});

static void BM_TeachingIteration(benchmark::State& state) {
  TeachingConfig cfg;
  cfg.max_iterations = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_dmt(data().train, data().tampering[0], cfg, 1).report.samples_added);
}
BENCHMARK(BM_TeachingIteration)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
