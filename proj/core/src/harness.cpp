#include "dmt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dmt/baselines.hpp"
#include "dmt/dataset_io.hpp"
#include "dmt/errors.hpp"
#include "dmt/synth.hpp"

namespace dmt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEmptyCell = "—";

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string opt_text(const std::optional<double>& v, int decimals) {
  return v ? fixed(*v, decimals) : std::string(kEmptyCell);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

json record_to_json(const TrialRecord& r) {
  json j = {{"variant", r.variant},
            {"trial", r.trial},
            {"seed", r.seed},
            {"method", r.method},
            {"score", r.score},
            {"k", r.k},
            {"sample_budget", r.sample_budget},
            {"success", r.success},
            {"iterations_used", r.iterations_used},
            {"samples_added", r.samples_added},
            {"clean_size", r.clean_size},
            {"sample_percent", r.sample_percent},
            {"total_ms", r.total_ms},
            {"timed_iterations", r.timed_iterations},
            {"budget_violations", r.budget_violations},
            {"monotonicity_violations", r.monotonicity_violations},
            {"gggm_steps", r.gggm_steps},
            {"status", r.status}};
  j["accuracy_before"] = r.accuracy_before ? json(*r.accuracy_before) : json(nullptr);
  j["accuracy_after"] = r.accuracy_after ? json(*r.accuracy_after) : json(nullptr);
  return j;
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.variant = j.at("variant").get<std::string>();
  r.trial = j.at("trial").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.method = j.at("method").get<std::string>();
  r.score = j.at("score").get<std::string>();
  r.k = j.at("k").get<std::size_t>();
  r.sample_budget = j.at("sample_budget").get<std::size_t>();
  r.success = j.at("success").get<bool>();
  r.iterations_used = j.at("iterations_used").get<std::size_t>();
  r.samples_added = j.at("samples_added").get<std::size_t>();
  r.clean_size = j.at("clean_size").get<std::size_t>();
  r.sample_percent = j.at("sample_percent").get<double>();
  r.total_ms = j.at("total_ms").get<double>();
  r.timed_iterations = j.at("timed_iterations").get<std::size_t>();
  r.budget_violations = j.at("budget_violations").get<std::size_t>();
  r.monotonicity_violations = j.at("monotonicity_violations").get<std::size_t>();
  r.gggm_steps = j.at("gggm_steps").get<std::size_t>();
  r.status = j.at("status").get<std::string>();
  if (!j.at("accuracy_before").is_null()) r.accuracy_before = j["accuracy_before"].get<double>();
  if (!j.at("accuracy_after").is_null()) r.accuracy_after = j["accuracy_after"].get<double>();
  return r;
}

/// Dataset, targets and test split shared by every variant of one trial.
struct TrialData {
  Dataset train;
  Dataset test;
  bool has_test = false;
  std::optional<TargetSpec> targets;
  std::string error;
};

TrialData prepare_trial(const ExperimentPlan& plan, std::uint64_t seed) {
  TrialData t;
  try {
    if (plan.data_file) {
      t.train = load_dataset(*plan.data_file);
      t.targets = load_targets(*plan.targets_file);
      if (plan.test_file) {
        t.test = load_dataset(*plan.test_file);
        t.has_test = true;
      }
    } else {
      SynthData data = synth_generate(plan.data, seed);
      const auto& specs = plan.task == TaskKind::Tampering ? data.tampering : data.improvement;
      if (plan.target_index >= specs.size())
        throw ConfigError("target_index " + std::to_string(plan.target_index) + " but only " +
                          std::to_string(specs.size()) + " target candidates were generated");
      t.targets = specs[plan.target_index];
      t.train = std::move(data.train);
      t.test = std::move(data.test);
      t.has_test = true;
    }
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

TrialRecord run_cell(const VariantSpec& v, const TrialData& data, std::size_t trial,
                     std::uint64_t seed) {
  TrialRecord r;
  try {
    if (!data.error.empty()) throw Error(data.error);
    const Dataset* test = data.has_test ? &data.test : nullptr;
    TeachingOutcome out;
    if (v.is_baseline) {
      BaselineConfig b = v.baseline;
      b.seed = seed;
      out = run_baseline(data.train, *data.targets, b, v.teaching, seed, test);
    } else {
      out = run_dmt(data.train, *data.targets, v.teaching, seed, test);
    }
    r = TrialRecord::from_report(out.report);
  } catch (const std::exception& e) {
    r.status = std::string("error: ") + e.what();
    r.clean_size = data.train.size();
  }
  r.variant = v.name;
  r.trial = trial;
  r.seed = seed;
  r.method = v.method();
  r.score = v.is_baseline && v.baseline.method != BaselineMethod::AtOnce
                ? std::string("-")
                : std::string(to_string(v.teaching.score.kind));
  r.k = v.teaching.selection.k;
  r.sample_budget = v.is_baseline ? v.baseline.sample_budget : 0;
  return r;
}

fs::path cell_path(const fs::path& out_dir, const std::string& variant, std::size_t trial) {
  return out_dir / "cells" / variant / ("trial_" + std::to_string(trial) + ".json");
}

std::optional<TrialRecord> load_cell(const fs::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    TrialRecord r = record_from_json(j);
    if (r.seed != seed) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // partial write; recompute
  }
}

void store_cell(const fs::path& path, const TrialRecord& r) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write cell " + path.string());
    out << record_to_json(r).dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

bool record_succeeded(const TrialRecord& r) { return r.success; }

std::size_t accounted_iterations(const TrialRecord& r) { return r.timed_iterations; }

template <typename T, typename Fn>
EfficiencyRow efficiency_of(std::span<const T> items, Fn view) {
  if (items.empty()) throw MetricError("efficiency row of an empty group");
  EfficiencyRow row;
  row.trials = items.size();
  double iters = 0.0, pct = 0.0, total_ms = 0.0;
  std::size_t pooled_iterations = 0;
  for (const T& item : items) {
    const TrialRecord r = view(item);
    total_ms += r.total_ms;
    pooled_iterations += accounted_iterations(r);
    if (!record_succeeded(r)) continue;
    ++row.successes;
    iters += static_cast<double>(r.iterations_used);
    pct += r.sample_percent;
  }
  if (row.successes > 0) {
    row.mean_iterations = iters / static_cast<double>(row.successes);
    row.mean_sample_percent = pct / static_cast<double>(row.successes);
  }
  if (pooled_iterations > 0)
    row.minutes_per_iteration = total_ms / 60000.0 / static_cast<double>(pooled_iterations);
  return row;
}

template <typename T, typename Fn>
double csr_of(std::span<const T> items, double cap, Fn view) {
  if (items.empty()) throw MetricError("CSR of an empty list");
  std::size_t hits = 0;
  for (const T& item : items) {
    const TrialRecord r = view(item);
    if (r.success && r.sample_percent <= cap + 1e-9) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(items.size());
}

const TrialRecord& identity(const TrialRecord& r) { return r; }

const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % 8];
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void write_outputs(const fs::path& out_dir, const std::string& plan_name,
                   std::span<const TrialRecord> records, std::span<const AggregateRow> rows,
                   double cap) {
  fs::create_directories(out_dir);
  {
    std::ostringstream s;
    write_trials_csv(s, records);
    write_file(out_dir / "trials.csv", s.str());
  }
  {
    std::ostringstream s;
    write_aggregate_csv(s, rows, cap);
    write_file(out_dir / "aggregate.csv", s.str());
  }
  for (const AggregateRow& row : rows)
    write_file(out_dir / ("csr_curve_" + row.variant + ".svg"),
               csr_curve_svg(std::span<const AggregateRow>(&row, 1), cap));
  write_file(out_dir / "csr_curves.svg", csr_curve_svg(rows, cap));
  write_file(out_dir / "report.json", aggregate_to_json(plan_name, rows, cap));
}

}  // namespace

TrialRecord TrialRecord::from_report(const TeachingReport& report) {
  TrialRecord r;
  r.method = report.method;
  r.success = report.success;
  r.iterations_used = report.iterations_used;
  r.samples_added = report.samples_added;
  r.clean_size = report.clean_size;
  r.sample_percent = report.sample_percent;
  r.total_ms = report.total_duration_ms();
  r.timed_iterations = report.iterations.size();
  r.accuracy_before = report.clean_test_accuracy_before;
  r.accuracy_after = report.clean_test_accuracy_after;
  r.budget_violations = report.budget_violations;
  r.monotonicity_violations = report.monotonicity_violations;
  r.gggm_steps = report.gggm_steps;
  return r;
}

double compute_csr(std::span<const TeachingReport> reports, double cap) {
  return csr_of(reports, cap, [](const TeachingReport& r) { return TrialRecord::from_report(r); });
}

double compute_csr(std::span<const TrialRecord> records, double cap) {
  return csr_of(records, cap, identity);
}

EfficiencyRow efficiency_row(std::span<const TeachingReport> reports) {
  return efficiency_of(reports, [](const TeachingReport& r) { return TrialRecord::from_report(r); });
}

EfficiencyRow efficiency_row(std::span<const TrialRecord> records) {
  return efficiency_of(records, identity);
}

std::string EfficiencyRow::iterations_text() const { return opt_text(mean_iterations, 1); }
std::string EfficiencyRow::time_text() const { return opt_text(minutes_per_iteration, 1); }
std::string EfficiencyRow::percent_text() const {
  return mean_sample_percent ? fixed(*mean_sample_percent, 2) + "%" : std::string(kEmptyCell);
}

std::vector<CsrPoint> csr_curve(std::span<const TrialRecord> records, double max_cap,
                                std::size_t points) {
  if (points == 0) throw MetricError("CSR curve needs at least one point");
  std::vector<CsrPoint> out;
  out.push_back({0.0, compute_csr(records, 0.0)});
  for (std::size_t i = 1; i <= points; ++i) {
    const double cap = max_cap * static_cast<double>(i) / static_cast<double>(points);
    out.push_back({cap, compute_csr(records, cap)});
  }
  return out;
}

std::vector<AggregateRow> aggregate(std::span<const TrialRecord> records, double csr_cap,
                                    std::size_t curve_points) {
  std::vector<std::string> order;
  for (const TrialRecord& r : records)
    if (std::find(order.begin(), order.end(), r.variant) == order.end()) order.push_back(r.variant);
  std::vector<AggregateRow> rows;
  for (const std::string& name : order) {
    std::vector<TrialRecord> group;
    for (const TrialRecord& r : records)
      if (r.variant == name) group.push_back(r);
    std::sort(group.begin(), group.end(),
              [](const TrialRecord& a, const TrialRecord& b) { return a.trial < b.trial; });
    AggregateRow row;
    row.variant = name;
    row.method = group.front().method;
    row.score = group.front().score;
    row.k = group.front().method == "dmt" ? group.front().k : group.front().sample_budget;
    row.csr = compute_csr(std::span<const TrialRecord>(group), csr_cap);
    row.efficiency = efficiency_row(std::span<const TrialRecord>(group));
    row.curve = csr_curve(group, csr_cap, curve_points);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << "variant,trial,seed,method,score,k,sample_budget,success,iterations,samples_added,"
         "clean_size,sample_percent,total_ms,timed_iterations,acc_before,acc_after,budget_violations,"
         "monotonicity_violations,gggm_steps,status\n";
  auto acc = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string(); };
  for (const TrialRecord& r : records) {
    out << csv_field(r.variant) << ',' << r.trial << ',' << r.seed << ',' << r.method << ','
        << r.score << ',' << r.k << ',' << r.sample_budget << ',' << (r.success ? 1 : 0) << ','
        << r.iterations_used << ',' << r.samples_added << ',' << r.clean_size << ','
        << fixed(r.sample_percent, 6) << ',' << fixed(r.total_ms, 3) << ',' << r.timed_iterations << ','
        << acc(r.accuracy_before) << ',' << acc(r.accuracy_after) << ',' << r.budget_violations
        << ',' << r.monotonicity_violations << ',' << r.gggm_steps << ',' << csv_field(r.status)
        << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trials.csv: missing header");
  const std::vector<std::string> header = parse_csv_line(line);
  if (header.size() != 20 || header[0] != "variant")
    throw ParseError("trials.csv: unexpected header");
  std::vector<TrialRecord> out;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> f = parse_csv_line(line);
    if (f.size() != 20) throw ParseError("trials.csv: expected 20 fields", row);
    try {
      TrialRecord r;
      r.variant = f[0];
      r.trial = std::stoull(f[1]);
      r.seed = std::stoull(f[2]);
      r.method = f[3];
      r.score = f[4];
      r.k = std::stoull(f[5]);
      r.sample_budget = std::stoull(f[6]);
      r.success = f[7] == "1";
      r.iterations_used = std::stoull(f[8]);
      r.samples_added = std::stoull(f[9]);
      r.clean_size = std::stoull(f[10]);
      r.sample_percent = std::stod(f[11]);
      r.total_ms = std::stod(f[12]);
      r.timed_iterations = std::stoull(f[13]);
      if (!f[14].empty()) r.accuracy_before = std::stod(f[14]);
      if (!f[15].empty()) r.accuracy_after = std::stod(f[15]);
      r.budget_violations = std::stoull(f[16]);
      r.monotonicity_violations = std::stoull(f[17]);
      r.gggm_steps = std::stoull(f[18]);
      r.status = f[19];
      out.push_back(std::move(r));
    } catch (const std::invalid_argument&) {
      throw ParseError("trials.csv: malformed number", row);
    } catch (const std::out_of_range&) {
      throw ParseError("trials.csv: number out of range", row);
    }
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows, double csr_cap) {
  out << "variant,method,score,k,trials,successes,csr_at_" << fixed(csr_cap, 2)
      << ",iterations,time_min,sample_percent\n";
  for (const AggregateRow& r : rows) {
    out << csv_field(r.variant) << ',' << r.method << ',' << r.score << ',' << r.k << ','
        << r.efficiency.trials << ',' << r.efficiency.successes << ',' << fixed(r.csr, 1) << ','
        << r.efficiency.iterations_text() << ',' << r.efficiency.time_text() << ','
        << r.efficiency.percent_text() << '\n';
  }
}

std::string aggregate_to_json(const std::string& plan_name, std::span<const AggregateRow> rows,
                              double csr_cap) {
  json j;
  j["plan"] = plan_name;
  j["csr_cap"] = csr_cap;
  j["variants"] = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const AggregateRow& r : rows) {
    json curve = json::array();
    for (const CsrPoint& p : r.curve) curve.push_back({p.cap, p.csr});
    j["variants"].push_back({{"variant", r.variant},
                             {"method", r.method},
                             {"score", r.score},
                             {"k", r.k},
                             {"trials", r.efficiency.trials},
                             {"successes", r.efficiency.successes},
                             {"csr", r.csr},
                             {"mean_iterations", opt(r.efficiency.mean_iterations)},
                             {"minutes_per_iteration", opt(r.efficiency.minutes_per_iteration)},
                             {"mean_sample_percent", opt(r.efficiency.mean_sample_percent)},
                             {"curve", curve}});
  }
  return j.dump(2) + "\n";
}

std::string csr_curve_svg(std::span<const AggregateRow> rows, double max_cap) {
  const double W = 560, H = 360, left = 60, right = 160, top = 20, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double cap) { return left + pw * cap / max_cap; };
  auto py = [&](double csr) { return top + ph * (1.0 - csr / 100.0); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = py(25.0 * i), x = px(max_cap * i / 4.0);
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << 25 * i
      << "</text>\n";
    s << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << fixed(max_cap * i / 4.0, 1) << "</text>\n";
  }
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\">sample percent (%)</text>\n";
  s << "<text transform=\"translate(16," << top + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">CSR (%)</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const AggregateRow& r = rows[i];
    s << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << palette(i) << "\" points=\"";
    // Step function: CSR only changes at the sampled caps.
    for (std::size_t p = 0; p < r.curve.size(); ++p) {
      if (p > 0) s << ' ' << fixed(px(r.curve[p].cap), 2) << ',' << fixed(py(r.curve[p - 1].csr), 2);
      s << ' ' << fixed(px(r.curve[p].cap), 2) << ',' << fixed(py(r.curve[p].csr), 2);
    }
    s << "\"/>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(i);
    s << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 30
      << "\" y2=\"" << ly - 4 << "\" stroke-width=\"2\" stroke=\"" << palette(i) << "\"/>\n";
    s << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly << "\">" << xml_escape(r.variant)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::size_t default_workers() {
  if (const char* env = std::getenv("DMT_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_plan(const ExperimentPlan& plan, const SweepOptions& options) {
  plan.validate();
  const std::size_t trials = plan.trials();
  const std::size_t cells = plan.variants.size() * trials;

  SweepResult result;
  result.records.resize(cells);
  std::vector<bool> done(cells, false);
  if (options.resume) {
    for (std::size_t c = 0; c < cells; ++c) {
      const VariantSpec& v = plan.variants[c / trials];
      const std::size_t t = c % trials;
      if (auto r = load_cell(cell_path(options.out_dir, v.name, t), plan.seeds[t])) {
        result.records[c] = std::move(*r);
        done[c] = true;
        ++result.cells_resumed;
      }
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t c = 0; c < cells; ++c)
    if (!done[c]) pending.push_back(c);

  // Trial data is built once and shared read-only by all variants.
  std::vector<std::optional<TrialData>> data(trials);
  std::vector<std::once_flag> data_once(trials);

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options.workers ? options.workers : default_workers(),
                                        std::max<std::size_t>(1, pending.size())));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex io_mutex;
  std::vector<std::string> io_errors;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const std::size_t c = pending[i];
      const VariantSpec& v = plan.variants[c / trials];
      const std::size_t t = c % trials;
      std::call_once(data_once[t], [&] { data[t] = prepare_trial(plan, plan.seeds[t]); });
      TrialRecord r = run_cell(v, *data[t], t, plan.seeds[t]);
      try {
        store_cell(cell_path(options.out_dir, v.name, t), r);
      } catch (const std::exception& e) {
        std::lock_guard lock(io_mutex);
        io_errors.push_back("cell " + v.name + "/trial_" + std::to_string(t) + ": " + e.what());
      }
      result.records[c] = std::move(r);
      const std::size_t n = finished.fetch_add(1) + 1;
      if (!options.quiet) {
        std::lock_guard lock(io_mutex);
        std::cerr << "[" << n << "/" << pending.size() << "] " << v.name << " trial " << t
                  << (result.records[c].success ? " ok" : " fail") << "\n";
      }
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  result.cells_run = pending.size();

  if (!io_errors.empty()) throw Error(io_errors.front());

  result.aggregate = aggregate(result.records, plan.csr_cap, plan.curve_points);
  write_outputs(options.out_dir, plan.name, result.records, result.aggregate, plan.csr_cap);
  return result;
}

std::vector<AggregateRow> reaggregate(const fs::path& out_dir, double csr_cap,
                                      std::size_t curve_points) {
  std::ifstream in(out_dir / "trials.csv");
  if (!in) throw Error("cannot read " + (out_dir / "trials.csv").string());
  const std::vector<TrialRecord> records = read_trials_csv(in);
  if (records.empty()) throw MetricError("trials.csv has no rows");
  std::vector<AggregateRow> rows = aggregate(records, csr_cap, curve_points);
  std::string name = "plan";
  {
    std::ifstream prev(out_dir / "report.json");
    if (prev) {
      try {
        name = json::parse(prev).value("plan", name);
      } catch (const std::exception&) {
      }
    }
  }
  write_outputs(out_dir, name, records, rows, csr_cap);
  return rows;
}

}  // namespace dmt
