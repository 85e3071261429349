// dmt: data generation, training, teaching runs and sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmt/baselines.hpp"
#include "dmt/dataset_io.hpp"
#include "dmt/errors.hpp"
#include "dmt/harness.hpp"
#include "dmt/plan.hpp"
#include "dmt/synth.hpp"
#include "dmt/teaching.hpp"

namespace fs = std::filesystem;
using namespace dmt;

namespace {

std::pair<std::string, std::string> split_setting(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

VariantSpec variant_from(const std::vector<std::string>& settings) {
  VariantSpec v;
  v.name = "cli";
  for (const std::string& s : settings) {
    const auto [key, value] = split_setting(s);
    apply_variant_key(v, key, value);
  }
  return v;
}

void print_table(const std::vector<AggregateRow>& rows, double cap) {
  std::printf("%-24s %-18s %-6s %5s %9s %10s %9s %9s\n", "variant", "method", "score", "k",
              "CSR", "iteration", "time(min)", "sample%");
  for (const AggregateRow& r : rows) {
    std::printf("%-24s %-18s %-6s %5zu %8.1f%% %10s %9s %9s\n", r.variant.c_str(),
                r.method.c_str(), r.score.c_str(), r.k, r.csr, r.efficiency.iterations_text().c_str(),
                r.efficiency.time_text().c_str(), r.efficiency.percent_text().c_str());
  }
  std::printf("(CSR at sample percent <= %.2f)\n", cap);
}

void write_outcome(const TeachingOutcome& out, const std::string& report_path,
                   const std::string& csv_path, const std::string& trace_path,
                   const std::string& teacher_path, bool timing) {
  const std::string json = report_to_json(out.report, timing);
  if (report_path.empty()) {
    std::cout << json << "\n";
  } else {
    write_text_file(report_path, json + "\n");
  }
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw Error("cannot write " + csv_path);
    write_iteration_csv(f, out.report);
  }
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    if (!f) throw Error("cannot write " + trace_path);
    write_trace_jsonl(f, out.traces);
  }
  if (!teacher_path.empty()) save_dataset(out.final_dataset, teacher_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete machine teaching engine"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "Write a seeded synthetic dataset");
  std::string gen_out = "data";
  std::uint64_t gen_seed = 1;
  std::vector<std::string> gen_set;
  std::string gen_task = "tampering";
  std::size_t gen_index = 0;
  gen->add_option("-o,--out-dir", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--set", gen_set, "Generator setting key=value (plan [data] keys)");
  gen->add_option("--task", gen_task, "Target kind written to targets.json")
      ->check(CLI::IsMember({"tampering", "improvement"}));
  gen->add_option("--target-index", gen_index, "Which generated target candidate to write");

  // train
  auto* tr = app.add_subcommand("train", "Train a student and report accuracy");
  std::string tr_data, tr_test, tr_out;
  std::uint64_t tr_seed = 1;
  std::vector<std::string> tr_set;
  tr->add_option("-d,--data", tr_data, "Training dataset JSON")->required();
  tr->add_option("-t,--test", tr_test, "Test dataset JSON");
  tr->add_option("-o,--out", tr_out, "Model JSON output");
  tr->add_option("--seed", tr_seed, "Run seed");
  tr->add_option("--set", tr_set, "Training setting key=value (arch, epochs, lr, ...)");

  // teach / baseline share their options
  struct RunOpts {
    std::string data, test, targets, report, csv, trace, teacher;
    std::uint64_t seed = 1;
    std::vector<std::string> set;
    bool no_timing = false;
  };
  RunOpts teach_opts, base_opts;
  auto add_run_options = [](CLI::App* sub, RunOpts& o) {
    sub->add_option("-d,--data", o.data, "Clean training dataset JSON")->required();
    sub->add_option("--targets", o.targets, "Targets JSON")->required();
    sub->add_option("-t,--test", o.test, "Clean test dataset JSON (accuracy before/after)");
    sub->add_option("--seed", o.seed, "Run seed");
    sub->add_option("--set", o.set, "Setting key=value (plan variant keys)");
    sub->add_option("--report", o.report, "Report JSON path (stdout if omitted)");
    sub->add_option("--csv", o.csv, "Per-iteration CSV path");
    sub->add_option("--trace", o.trace, "GGGM step trace JSONL path");
    sub->add_option("--teacher", o.teacher, "Write the final teacher dataset here");
    sub->add_flag("--no-timing", o.no_timing, "Omit durations from the report JSON");
  };
  auto* teach = app.add_subcommand("teach", "Run the iterative teaching loop once");
  add_run_options(teach, teach_opts);
  auto* base = app.add_subcommand("baseline", "Run one comparison method once");
  std::string base_method = "at_once";
  base->add_option("-m,--method", base_method, "at_once | feature_collision | gradient_matching");
  add_run_options(base, base_opts);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment plan");
  std::string sweep_plan, sweep_out = "out";
  std::optional<std::uint64_t> sweep_seed;
  std::size_t sweep_workers = 0;
  bool sweep_fresh = false, sweep_quiet = false;
  sweep->add_option("-p,--plan", sweep_plan, "Plan file")->required();
  sweep->add_option("-o,--out-dir", sweep_out, "Output directory");
  sweep->add_option("--seed", sweep_seed, "Base seed replacing the plan's seed list");
  sweep->add_option("-j,--workers", sweep_workers, "Worker threads (default: DMT_WORKERS or cores)");
  sweep->add_flag("--fresh", sweep_fresh, "Ignore finished cells on disk");
  sweep->add_flag("-q,--quiet", sweep_quiet, "No per-cell progress");

  // report
  auto* rep = app.add_subcommand("report", "Re-aggregate a sweep from its trials.csv");
  std::string rep_dir = "out";
  double rep_cap = 100.0;
  std::size_t rep_points = 20;
  std::string rep_plan;
  rep->add_option("-o,--out-dir", rep_dir, "Sweep output directory");
  rep->add_option("--cap", rep_cap, "Sample-percent cap for CSR");
  rep->add_option("--curve-points", rep_points, "Points on the CSR curve");
  rep->add_option("-p,--plan", rep_plan, "Take cap and curve points from this plan");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SynthConfig cfg;
      for (const std::string& s : gen_set) {
        const auto [key, value] = split_setting(s);
        apply_synth_key(cfg, key, value);
      }
      SynthData data = synth_generate(cfg, gen_seed);
      fs::create_directories(gen_out);
      save_dataset(data.train, fs::path(gen_out) / "train.json");
      save_dataset(data.test, fs::path(gen_out) / "test.json");
      const auto& specs = gen_task == "tampering" ? data.tampering : data.improvement;
      if (gen_index >= specs.size())
        throw ConfigError("only " + std::to_string(specs.size()) + " target candidates");
      save_targets(specs[gen_index], fs::path(gen_out) / "targets.json");
      std::ofstream csv(fs::path(gen_out) / "train.csv");
      export_csv(data.train, csv);
      std::printf("train %zu, test %zu, %zu tampering / %zu improvement candidates -> %s\n",
                  data.train.size(), data.test.size(), data.tampering.size(),
                  data.improvement.size(), gen_out.c_str());
    } else if (*tr) {
      const Dataset d = load_dataset(tr_data);
      const VariantSpec v = variant_from(tr_set);
      const TrainResult r = train(d, seeded_train_config(v.teaching.train, tr_seed));
      std::printf("train accuracy %.4f\n", accuracy(r.params, d));
      if (!tr_test.empty()) std::printf("test accuracy %.4f\n", accuracy(r.params, load_dataset(tr_test)));
      std::printf("final objective %.6f\n", r.epoch_objective.back());
      if (!tr_out.empty()) save_model(r.params, tr_out);
    } else if (*teach || *base) {
      const RunOpts& o = *teach ? teach_opts : base_opts;
      const Dataset d = load_dataset(o.data);
      const TargetSpec targets = load_targets(o.targets);
      Dataset test;
      if (!o.test.empty()) test = load_dataset(o.test);
      const Dataset* test_ptr = o.test.empty() ? nullptr : &test;
      VariantSpec v = variant_from(o.set);
      TeachingOutcome out;
      if (*teach) {
        out = run_dmt(d, targets, v.teaching, o.seed, test_ptr);
      } else {
        v.baseline.method = parse_baseline_method(base_method);
        v.baseline.seed = o.seed;
        out = run_baseline(d, targets, v.baseline, v.teaching, o.seed, test_ptr);
      }
      write_outcome(out, o.report, o.csv, o.trace, o.teacher, !o.no_timing);
      std::fprintf(stderr, "%s: %s after %zu iteration(s), %zu samples added (%.2f%%)\n",
                   out.report.method.c_str(), out.report.success ? "success" : "failure",
                   out.report.iterations_used, out.report.samples_added,
                   out.report.sample_percent);
      return out.report.success ? 0 : 2;
    } else if (*sweep) {
      ExperimentPlan plan = load_plan(sweep_plan);
      if (sweep_seed) plan.override_seed(*sweep_seed);
      SweepOptions opts;
      opts.out_dir = sweep_out;
      opts.workers = sweep_workers;
      opts.resume = !sweep_fresh;
      opts.quiet = sweep_quiet;
      const SweepResult r = run_plan(plan, opts);
      print_table(r.aggregate, plan.csr_cap);
      std::printf("%zu cell(s) run, %zu resumed -> %s\n", r.cells_run, r.cells_resumed,
                  sweep_out.c_str());
    } else if (*rep) {
      if (!rep_plan.empty()) {
        const ExperimentPlan plan = load_plan(rep_plan);
        rep_cap = plan.csr_cap;
        rep_points = plan.curve_points;
      }
      print_table(reaggregate(rep_dir, rep_cap, rep_points), rep_cap);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
