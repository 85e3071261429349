// Acceptance run: one PASS/FAIL line per criterion on stdout, details on
// each line, progress on stderr. Exit code is nonzero if any criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dmt/baselines.hpp"
#include "dmt/harness.hpp"
#include "dmt/synth.hpp"
#include "dmt/teaching.hpp"
#include "naive_gggm.hpp"
#include "support.hpp"

using namespace dmt;
using namespace dmt::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "[acceptance] %s\n", s.c_str()); }

/// Perturbed items and GGGM steps seen by the end-to-end criteria.
struct Audit {
  std::size_t perturbed = 0;
  std::size_t budget_violations = 0;
  std::size_t one_hot_items = 0;
  std::size_t one_hot_violations = 0;
  std::size_t steps = 0;
  std::size_t monotonicity_violations = 0;

  void dataset(const Dataset& d, std::size_t budget) {
    const bool one_hot = d.schema().mode == EncodingMode::StrictOneHot;
    for (const LabeledInstance& it : d.items()) {
      if (!it.provenance.perturbed) continue;
      ++perturbed;
      const LabeledInstance* origin = d.find(it.provenance.origin_id);
      if (origin == nullptr || hamming_diff(origin->instance, it.instance) > budget ||
          !(modify(origin->instance, it.provenance.flips,
                   one_hot ? EncodingMode::StrictOneHot : EncodingMode::MultiHot) == it.instance))
        ++budget_violations;
      if (one_hot) {
        ++one_hot_items;
        one_hot_violations += !is_strict_one_hot(it.instance);
      }
    }
  }

  void traces(const std::vector<GggmStepTrace>& ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      ++steps;
      bool bad = ts[i].score_after > ts[i].score_before;
      // Consecutive steps on one base continue from the previous score.
      if (i > 0 && ts[i].step > 0 && ts[i - 1].origin_id == ts[i].origin_id &&
          ts[i].score_before > ts[i - 1].score_after)
        bad = true;
      monotonicity_violations += bad;
    }
  }

  void outcome(const TeachingOutcome& out, std::size_t budget) {
    dataset(out.final_dataset, budget);
    traces(out.traces);
  }
};

// Gradients against central differences.
Verdict gradients() {
  const auto t0 = Clock::now();
  const std::vector<ModelSpec> specs{{Architecture::SoftmaxRegression, 0, Activation::Tanh},
                                     {Architecture::Mlp1h, 16, Activation::Tanh},
                                     {Architecture::Mlp1h, 16, Activation::Relu}};
  Rng rng(20240601);
  double worst = 0.0;
  std::size_t checked = 0, bad = 0;
  for (const ModelSpec& spec : specs) {
    std::size_t n = 0;
    while (n < 20) {
      const std::size_t d = 64, c = 2 + rng.index(3);
      const ModelParams p = random_model(rng, spec, d, c, 0.5);
      const std::vector<double> x = random_vector(rng, d);
      const int y = static_cast<int>(rng.index(c));
      if (spec.activation == Activation::Relu && spec.architecture == Architecture::Mlp1h) {
        // Skip samples within a step of the Relu kink, where the difference is not a derivative.
        bool near = false;
        for (std::size_t j = 0; j < spec.hidden; ++j) {
          double a = p.weights[spec.hidden * d + j];
          for (std::size_t i = 0; i < d; ++i) a += p.weights[j * d + i] * x[i];
          near = near || std::abs(a) < 1e-3;
        }
        if (near) continue;
      }
      ++n;
      const auto fd_theta = central_difference(
          [&](const std::vector<double>& w) {
            ModelParams q = p;
            q.weights = w;
            return loss(q, x, y);
          },
          p.weights);
      const auto fd_x = central_difference([&](const std::vector<double>& v) { return loss(p, v, y); }, x);
      const double e = std::max(relative_error(grad_theta(p, x, y), fd_theta),
                                relative_error(grad_input(p, x, y), fd_x));
      worst = std::max(worst, e);
      bad += e > 1e-4;
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0,
          fmt("%zu samples over 3 architectures, max rel err %.2e, %.2f s", checked, worst, secs)};
}

// Subset search against brute force.
Verdict subset_oracle() {
  Rng rng(77);
  const int fixtures = 200;
  int agree = 0;
  for (int i = 0; i < fixtures; ++i) {
    const std::size_t m = 4 + rng.index(4), n = 2 + rng.index(3), c = 2 + rng.index(2);
    const ModelSpec spec = i % 3 == 2 ? ModelSpec{Architecture::Mlp1h, 5, Activation::Tanh} : ModelSpec{};
    const ModelParams p = random_model(rng, spec, m * n, c, 2.0);
    const Instance origin = random_instance(rng, m, n);
    Instance x = origin;
    for (std::size_t k = rng.index(3); k > 0; --k) {
      const std::size_t f = rng.index(m), v = rng.index(n);
      x.set(f, v, !x.get(f, v));
    }
    TargetSpec t;
    t.targets.push_back({random_instance(rng, m, n), static_cast<int>(rng.index(c)), std::nullopt});
    ScoreSpec s;
    if (i % 2) {
      s.kind = ScoreKind::Align;
      s.lambda = rng.uniform();
    }
    GggmConfig cfg;
    cfg.candidate_size = 1 + rng.index(3);
    cfg.max_subset_size = 1 + rng.index(3);
    cfg.allow_empty_subset = rng.index(4) != 0;
    cfg.budget = std::max<std::size_t>(1, hamming_diff(origin, x) + rng.index(3));
    const int y = static_cast<int>(rng.index(c));
    const auto cands = top_q_candidates(grad_input(p, x, y), x, cfg.candidate_size, cfg.feasibility);
    Scorer scorer(p, t, s);
    scorer.set_clean(origin, y);
    const SubsetChoice got = best_subset(scorer, x, y, origin, cands, cfg);
    const NaiveChoice want = naive_best(p, x, y, origin, cands, t, s, cfg);
    agree += sorted(got.flips) == sorted(want.flips) && got.score == want.score;
  }
  return {agree == fixtures, fmt("%d/%d fixtures agree", agree, fixtures)};
}

TeachingConfig base_config() { return TeachingConfig{}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work_dir = "acceptance_work";
  app.add_option("--work-dir", work_dir, "Scratch directory for sweeps");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);

  // The audit criteria finish last; lines are printed in criterion order at the end.
  std::map<int, std::pair<std::string, Verdict>> verdicts;
  auto emit = [&](int id, const char* name, const Verdict& v) {
    note(std::string(v.pass ? "PASS " : "FAIL ") + name);
    verdicts[id] = {name, v};
  };

  Audit audit;    // criteria 4 to 8, multi-hot
  Audit one_hot;  // dedicated one-hot sweep
  Audit traces;   // GGGM traces, criteria 4 to 8

  note("gradients");
  emit(1, "gradient correctness", gradients());
  note("subset oracle");
  emit(2, "subset search oracle", subset_oracle());

  // Criterion 4; its runs double as the Dist side of 6 and the DMT side of 7.
  note("end-to-end tampering");
  SynthConfig synth;
  std::vector<SynthData> data;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) data.push_back(synth_generate(synth, s));
  const TeachingConfig dist_cfg = base_config();
  std::vector<TeachingReport> dist;
  {
    const auto t0 = Clock::now();
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData& d = data[s - 1];
      TeachingOutcome out = run_dmt(d.train, d.tampering[0], dist_cfg, s);
      audit.outcome(out, dist_cfg.gggm.budget);
      traces.traces(out.traces);
      dist.push_back(out.report);
    }
    const double secs = seconds_since(t0);
    const double csr = compute_csr(std::span<const TeachingReport>(dist), 100.0);
    const EfficiencyRow eff = efficiency_row(std::span<const TeachingReport>(dist));
    emit(4, "end-to-end tampering",
         {csr >= 90.0 && secs < 300.0,
          fmt("CSR %.1f%% over %llu seeds, mean iterations %s, mean sample %s, %.1f s", csr,
              static_cast<unsigned long long>(kSeeds), eff.iterations_text().c_str(),
              eff.percent_text().c_str(), secs)});
  }

  note("step size");
  {
    const std::size_t k_small = 2, k_large = 8;
    int pass = 0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData& d = data[s - 1];
      TeachingConfig a = base_config(), b = base_config();
      a.selection.k = k_small;
      b.selection.k = k_large;
      const TeachingOutcome ra = run_dmt(d.train, d.tampering[0], a, s);
      const TeachingOutcome rb = run_dmt(d.train, d.tampering[0], b, s);
      audit.outcome(ra, a.gggm.budget);
      audit.outcome(rb, b.gggm.budget);
      traces.traces(ra.traces);
      traces.traces(rb.traces);
      pass += ra.report.success && rb.report.success &&
              ra.report.sample_percent < rb.report.sample_percent &&
              ra.report.iterations_used > rb.report.iterations_used;
    }
    const double frac = static_cast<double>(pass) / kSeeds;
    emit(5, "step-size trend",
         {frac >= 0.7, fmt("k=%zu vs k=%zu: %d/%llu paired trials (%.0f%%)", k_small, k_large, pass,
                           static_cast<unsigned long long>(kSeeds), 100.0 * frac)});
  }

  note("score functions");
  {
    TeachingConfig align_cfg = base_config();
    align_cfg.score.kind = ScoreKind::Align;
    int pass = 0, align_ok = 0, slower = 0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData& d = data[s - 1];
      const TeachingOutcome ra = run_dmt(d.train, d.tampering[0], align_cfg, s);
      audit.outcome(ra, align_cfg.gggm.budget);
      traces.traces(ra.traces);
      const TeachingReport& a = ra.report;
      const TeachingReport& b = dist[s - 1];
      const bool fewer = a.success && (!b.success || a.sample_percent <= b.sample_percent);
      const bool slow = a.mean_iteration_ms() >= b.mean_iteration_ms();
      align_ok += a.success;
      slower += slow;
      pass += fewer && slow;
    }
    const double frac = static_cast<double>(pass) / kSeeds;
    emit(6, "score-function trend",
         {frac >= 0.7, fmt("%d/%llu paired trials (%.0f%%); Align succeeded %d/%llu, slower per "
                           "iteration in %d",
                           pass, static_cast<unsigned long long>(kSeeds), 100.0 * frac, align_ok,
                           static_cast<unsigned long long>(kSeeds), slower)});
  }

  note("iterative vs at once");
  {
    BaselineConfig once;
    once.sample_budget = dist_cfg.selection.k * dist_cfg.max_iterations;
    once.flip_budget = dist_cfg.gggm.budget;
    int pass = 0, once_ok = 0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData& d = data[s - 1];
      const TeachingOutcome ro = at_once(d.train, d.tampering[0], once, dist_cfg, s);
      audit.outcome(ro, once.flip_budget);
      traces.traces(ro.traces);
      const TeachingReport& a = dist[s - 1];
      once_ok += ro.report.success;
      pass += a.success && (!ro.report.success || a.samples_added <= ro.report.samples_added);
    }
    const double frac = static_cast<double>(pass) / kSeeds;
    emit(7, "iterative vs at-once",
         {frac >= 0.7, fmt("budget %zu: %d/%llu paired trials (%.0f%%); at-once succeeded %d",
                           once.sample_budget, pass, static_cast<unsigned long long>(kSeeds),
                           100.0 * frac, once_ok)});
  }

  note("improvement");
  {
    TeachingConfig cfg = base_config();
    cfg.max_iterations = 40;
    int ok = 0;
    double worst_drop = 0.0, total_drop = 0.0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData& d = data[s - 1];
      const TeachingOutcome out = run_dmt(d.train, d.improvement[0], cfg, s, &d.test);
      audit.outcome(out, cfg.gggm.budget);
      traces.traces(out.traces);
      ok += out.report.success;
      const double drop =
          100.0 * (*out.report.clean_test_accuracy_before - *out.report.clean_test_accuracy_after);
      worst_drop = std::max(worst_drop, drop);
      total_drop += drop;
    }
    const double frac = static_cast<double>(ok) / kSeeds;
    emit(8, "improvement task",
         {frac >= 0.7 && worst_drop <= 3.0,
          fmt("group of %zu corrected in %d/%llu seeds (%.0f%%), accuracy drop mean %.2f pp, "
              "max %.2f pp",
              synth.group_size, ok, static_cast<unsigned long long>(kSeeds), 100.0 * frac,
              total_drop / kSeeds, worst_drop)});
  }

  note("budget audit, one-hot sweep");
  {
    SynthConfig oh = synth;
    oh.mode = EncodingMode::StrictOneHot;
    TeachingConfig cfg = base_config();
    cfg.gggm.feasibility = Feasibility::OneHotSubstitutions;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      const SynthData d = synth_generate(oh, s);
      one_hot.outcome(run_dmt(d.train, d.tampering[0], cfg, s), cfg.gggm.budget);
      for (BaselineMethod m : {BaselineMethod::FeatureCollision, BaselineMethod::GradientMatching}) {
        BaselineConfig b;
        b.method = m;
        b.flip_budget = cfg.gggm.budget;
        one_hot.outcome(run_baseline(d.train, d.tampering[0], b, cfg, s), b.flip_budget);
        audit.outcome(run_baseline(data[s - 1].train, data[s - 1].tampering[0], b, dist_cfg, s),
                      b.flip_budget);
      }
    }
    const std::size_t total = audit.perturbed + one_hot.perturbed;
    const std::size_t violations = audit.budget_violations + one_hot.budget_violations;
    emit(3, "budget audit",
         {total >= 400 && one_hot.one_hot_items >= 400 && violations == 0 &&
              one_hot.one_hot_violations == 0,
          fmt("%zu perturbed samples (%zu one-hot), %zu over budget, %zu invalid one-hot", total,
              one_hot.one_hot_items, violations, one_hot.one_hot_violations)});
  }

  note("determinism");
  {
    const ExperimentPlan plan = parse_plan(R"(name = determinism
trials = 4
base_seed = 1
csr_cap = 20
[defaults]
T = 10
[variant dist]
[variant align]
score = align
[variant once]
method = at_once
sample_budget = 100
[variant gm]
method = gradient_matching
pgd_steps = 50
)");
    std::vector<std::string> bytes;
    for (std::size_t workers : {1, 4}) {
      SweepOptions opt;
      opt.out_dir = fs::path(work_dir) / ("determinism_w" + std::to_string(workers));
      fs::remove_all(opt.out_dir);
      opt.workers = workers;
      opt.resume = false;
      opt.quiet = true;
      run_plan(plan, opt);
      std::ifstream in(opt.out_dir / "aggregate.csv", std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      bytes.push_back(ss.str());
    }
    emit(9, "determinism",
         {!bytes[0].empty() && bytes[0] == bytes[1],
          fmt("aggregate.csv with 1 and 4 workers: %zu bytes, %s", bytes[0].size(),
              bytes[0] == bytes[1] ? "identical" : "different")});
  }

  emit(10, "score monotonicity",
       {traces.steps > 0 && traces.monotonicity_violations == 0,
        fmt("%zu GGGM steps, %zu violations", traces.steps, traces.monotonicity_violations)});

  int failures = 0;
  for (const auto& [id, entry] : verdicts) {
    const auto& [name, v] = entry;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str());
    failures += !v.pass;
  }
  std::fflush(stdout);
  note(std::to_string(failures) + " of " + std::to_string(verdicts.size()) + " criteria failed");
  return failures == 0 ? 0 : 1;
}
