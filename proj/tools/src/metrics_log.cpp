#include "rpg/tools/metrics_log.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace rpg::tools {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(const std::string& s, const std::string& where) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw LogError(fmt::format("{}: '{}' is not a number", where, s));
  }
  return x;
}

}  // namespace

MetricsWriter::MetricsWriter(std::ostream& out) : out_(out) {
  out_ << kMetricsSchema << '\n' << kMetricsHeader << '\n';
}

void MetricsWriter::write(const StepRecord& rec) {
  out_ << format_row(rec) << '\n';
  out_.flush();
}

std::string format_row(const StepRecord& rec) {
  return fmt::format("{},{},{},{},{},{},{}", rec.step, rec.eval_return, rec.div, rec.hessian_trace, rec.ratio,
                     rec.gate ? 1 : 0, rec.wall_ms);
}

MetricsLog parse_metrics(const std::string& text, const std::string& name) {
  MetricsLog log;
  log.name = name;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = fmt::format("{}:{}", name, line_no);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line_no == 1 && line != kMetricsSchema) throw LogError(where + ": unsupported schema line '" + line + "'");
      continue;
    }
    if (!header) {
      if (line != kMetricsHeader) throw LogError(where + ": expected header '" + std::string(kMetricsHeader) + "'");
      header = true;
      continue;
    }
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 7) throw LogError(fmt::format("{}: expected 7 columns, got {}", where, f.size()));
    LogRow row;
    const double step = parse_real(f[0], where);
    row.step = static_cast<long long>(step);
    if (static_cast<double>(row.step) != step) throw LogError(where + ": step must be an integer");
    row.ret = parse_real(f[1], where);
    row.div = parse_real(f[2], where);
    row.hessian_trace = parse_real(f[3], where);
    row.ratio = parse_real(f[4], where);
    if (f[5] != "0" && f[5] != "1") throw LogError(where + ": gate must be 0 or 1");
    row.gate = f[5] == "1";
    row.wall_ms = parse_real(f[6], where);
    log.rows.push_back(row);
  }
  if (!header) throw LogError(name + ": missing header row");
  return log;
}

MetricsLog read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LogError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics(buf.str(), path.stem().string());
}

double ratio_below_one(const MetricsLog& log) {
  if (log.rows.empty()) return 0.0;
  std::size_t below = 0;
  for (const LogRow& r : log.rows) below += r.ratio < 1.0 ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(log.rows.size());
}

std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() != '#') {
      const std::size_t last = line.rfind(',');
      if (last != std::string::npos) line.erase(last);
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace rpg::tools
