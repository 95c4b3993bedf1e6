#include "rpg/tools/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "rpg/checkpoint.hpp"
#include "rpg/error.hpp"
#include "rpg/tools/metrics_log.hpp"
#include "rpg/tools/run_config.hpp"
#include "rpg/tools/suites.hpp"
#include "rpg/tools/svg_plot.hpp"

namespace rpg::tools {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

// File stems, or parent-directory names when stems collide (run1/metrics.csv, run2/metrics.csv).
std::vector<std::string> run_labels(const std::vector<fs::path>& logs) {
  std::vector<std::string> labels;
  std::map<std::string, int> count;
  for (const fs::path& p : logs) ++count[p.stem().string()];
  for (std::size_t i = 0; i < logs.size(); ++i) {
    std::string label = logs[i].stem().string();
    if (count[label] > 1) {
      const std::string parent = fs::absolute(logs[i]).parent_path().filename().string();
      label = parent.empty() ? fmt::format("{}_{}", label, i) : parent;
    }
    labels.push_back(label);
  }
  std::map<std::string, int> seen;
  for (std::string& l : labels) {
    if (++seen[l] > 1) l += fmt::format("_{}", seen[l]);
  }
  return labels;
}

struct Metric {
  const char* key;
  const char* title;
  const char* y_label;
  double LogRow::*field;
  bool log_y;
  std::optional<double> reference;
};

const Metric kMetrics[] = {
    {"return", "Evaluation return", "return", &LogRow::ret, false, std::nullopt},
    {"ratio", "Divergence ratio |Div J| / |Hessian trace|", "ratio", &LogRow::ratio, true, 1.0},
    {"hessian_trace", "Hessian trace", "trace", &LogRow::hessian_trace, false, std::nullopt},
};

Series series_of(const MetricsLog& log, const std::string& label, double LogRow::*field) {
  Series s;
  s.label = label;
  for (const LogRow& r : log.rows) {
    s.x.push_back(static_cast<double>(r.step));
    s.y.push_back(r.*field);
  }
  return s;
}

}  // namespace

int cmd_verify(const std::optional<std::string>& suite, std::ostream& out, std::ostream& err) {
  std::vector<const SuiteInfo*> chosen;
  if (!suite) {
    for (const SuiteInfo& s : all_suites()) {
      if (s.in_default) chosen.push_back(&s);
    }
  } else if (*suite == "all") {
    for (const SuiteInfo& s : all_suites()) chosen.push_back(&s);
  } else if (const SuiteInfo* s = find_suite(*suite)) {
    chosen.push_back(s);
  } else {
    std::string names;
    for (const SuiteInfo& s : all_suites()) names += std::string(names.empty() ? "" : ", ") + s.name;
    err << fmt::format("rpg verify: unknown suite '{}' (known: {}, all)\n", *suite, names);
    return 2;
  }
  int passed = 0;
  double seconds = 0.0;
  for (const SuiteInfo* s : chosen) {
    const SuiteResult r = run_suite(*s);
    out << format_suite(r);
    out.flush();
    passed += r.passed() ? 1 : 0;
    seconds += r.seconds;
  }
  const bool ok = passed == static_cast<int>(chosen.size());
  out << fmt::format("verify: {}/{} suites passed in {:.1f} s\n", passed, chosen.size(), seconds);
  return ok ? 0 : 1;
}

int cmd_train(const fs::path& config, std::optional<std::uint64_t> seed, const fs::path& out_dir, std::ostream& out,
              std::ostream& err) {
  TrainConfig cfg;
  try {
    cfg = load_run_config(config);
  } catch (const ConfigError& e) {
    err << "rpg train: " << e.what() << '\n';
    return 1;
  }
  if (seed) cfg.seed = *seed;

  try {
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / "metrics.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw Error("cannot write " + csv_path.string());
    MetricsWriter writer(csv);
    const int updates = cfg.total_steps / cfg.update_interval;
    const int every = std::max(1, updates / 10);
    const RunSummary sum = run_training(cfg, [&](const StepRecord& rec) {
      writer.write(rec);
      if ((rec.update + 1) % every == 0 || rec.update + 1 == updates) {
        out << fmt::format("update {:>5}/{}  step {:>7}  return {:>12.5g}  ratio {:.3g}{}\n", rec.update + 1, updates,
                           rec.step, rec.eval_return, rec.ratio, rec.gate ? "  (gated)" : "");
        out.flush();
      }
    });
    csv.close();

    json doc;
    doc["schema"] = "rpg-summary 1";
    doc["seed"] = cfg.seed;
    doc["variant"] = to_string(cfg.variant);
    doc["updates"] = sum.records.size();
    doc["final_return"] = real_or_null(sum.final_return);
    doc["best_return"] = real_or_null(sum.best_return);
    doc["ratio_below_one"] = sum.ratio_below_one;
    doc["gated_updates"] = std::count_if(sum.records.begin(), sum.records.end(), [](const StepRecord& r) { return r.gate; });
    doc["aborted"] = sum.aborted;
    if (sum.aborted) doc["abort_reason"] = sum.abort_reason;
    if (sum.final_cost) doc["final_cost"] = real_or_null(*sum.final_cost);
    if (sum.riccati_cost) doc["riccati_cost"] = real_or_null(*sum.riccati_cost);
    json theta = json::array();
    for (Eigen::Index i = 0; i < sum.final_theta.size(); ++i) theta.push_back(real_or_null(sum.final_theta(i)));
    doc["final_theta"] = theta;
    doc["config"] = config_to_json(cfg);
    write_file(out_dir / "summary.json", doc.dump(2) + "\n");

    save_checkpoint((out_dir / "phi.ckpt").string(), *sum.metric_net, sum.phi);
    write_file(out_dir / "phi.json", checkpoint_json(*sum.metric_net, sum.phi) + "\n");

    out << fmt::format("final return {:.6g}, best {:.6g}, ratio < 1 in {:.1f}% of {} updates{}\n", sum.final_return,
                       sum.best_return, 100.0 * sum.ratio_below_one, sum.records.size(),
                       sum.aborted ? " (aborted: " + sum.abort_reason + ")" : "");
    out << "wrote " << out_dir.string() << "/{metrics.csv, summary.json, phi.ckpt, phi.json}\n";
    return sum.aborted ? 1 : 0;
  } catch (const std::exception& e) {
    err << "rpg train: " << e.what() << '\n';
    return 1;
  }
}

int cmd_report(const std::vector<fs::path>& logs, const std::optional<fs::path>& plot_dir, std::ostream& out,
               std::ostream& err) {
  std::vector<MetricsLog> parsed;
  try {
    for (const fs::path& p : logs) parsed.push_back(read_metrics(p));
  } catch (const LogError& e) {
    err << "rpg report: " << e.what() << '\n';
    return 1;
  }
  const std::vector<std::string> labels = run_labels(logs);

  std::size_t width = 3;
  for (const std::string& l : labels) width = std::max(width, l.size());
  out << fmt::format("{:<{}}  {:>7}  {:>12}  {:>12}  {:>9}\n", "run", width, "updates", "final_return", "best_return",
                     "ratio<1");
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const MetricsLog& log = parsed[i];
    double best = log.rows.empty() ? 0.0 : log.rows.front().ret;
    for (const LogRow& r : log.rows) best = std::max(best, r.ret);
    out << fmt::format("{:<{}}  {:>7}  {:>12.6g}  {:>12.6g}  {:>9.2f}\n", labels[i], width, log.rows.size(),
                       log.rows.empty() ? 0.0 : log.rows.back().ret, best, ratio_below_one(log));
  }

  if (!plot_dir) return 0;
  try {
    fs::create_directories(*plot_dir);
    for (const Metric& m : kMetrics) {
      for (std::size_t i = 0; i < parsed.size(); ++i) {
        ChartSpec spec{fmt::format("{}: {}", labels[i], m.title), "environment step", m.y_label,
                       {series_of(parsed[i], labels[i], m.field)}, m.reference, m.log_y};
        write_file(*plot_dir / fmt::format("{}_{}.svg", labels[i], m.key), render_line_chart(spec));
      }
      if (parsed.size() > 1) {
        ChartSpec spec{m.title, "environment step", m.y_label, {}, m.reference, m.log_y};
        for (std::size_t i = 0; i < parsed.size(); ++i) spec.series.push_back(series_of(parsed[i], labels[i], m.field));
        write_file(*plot_dir / fmt::format("overlay_{}.svg", m.key), render_line_chart(spec));
      }
    }
  } catch (const std::exception& e) {
    err << "rpg report: " << e.what() << '\n';
    return 1;
  }
  out << "plots written to " << plot_dir->string() << '\n';
  return 0;
}

}  // namespace rpg::tools
