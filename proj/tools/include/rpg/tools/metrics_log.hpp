#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/trainer.hpp"

namespace rpg::tools {

// First line of every metrics file. Bump the number when columns change.
inline constexpr const char* kMetricsSchema = "# rpg-metrics schema 1";
inline constexpr const char* kMetricsHeader = "step,return,div,hessian_trace,ratio,gate,wall_ms";

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogRow {
  long long step = 0;
  double ret = 0.0;
  double div = 0.0;
  double hessian_trace = 0.0;
  double ratio = 0.0;
  bool gate = false;
  double wall_ms = 0.0;
};

struct MetricsLog {
  std::string name;  // file stem
  std::vector<LogRow> rows;
};

// Streams one row per StepRecord. Reals use the shortest round-trip form.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::ostream& out);
  void write(const StepRecord& rec);

 private:
  std::ostream& out_;
};

std::string format_row(const StepRecord& rec);

MetricsLog parse_metrics(const std::string& text, const std::string& name);
MetricsLog read_metrics(const std::filesystem::path& path);

// Same statistic as RunSummary::ratio_below_one.
double ratio_below_one(const MetricsLog& log);

// Drops the wall_ms column so two logs can be compared byte for byte.
std::string strip_wall_time(const std::string& csv);

}  // namespace rpg::tools
