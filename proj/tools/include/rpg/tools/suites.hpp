#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rpg/trainer.hpp"

namespace rpg::tools {

// One measured property: pass iff measured <= bound (or the explicit flag for
// properties that are not a residual).
struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;
};

struct SuiteResult {
  std::string name;
  std::string title;
  std::vector<Check> checks;
  int skipped = 0;
  std::string skip_reason;
  double seconds = 0.0;

  bool passed() const;
};

struct SuiteInfo {
  const char* name;
  const char* title;
  bool in_default;  // part of a bare `rpg verify`
  SuiteResult (*run)();
};

const std::vector<SuiteInfo>& all_suites();
const SuiteInfo* find_suite(std::string_view name);

// Runs the suite and fills name, title and wall time.
SuiteResult run_suite(const SuiteInfo& suite);

// Text block: one line per check plus a verdict line.
std::string format_suite(const SuiteResult& r);

// Training fixtures shared by the table4/convergence suites, the CLI tests and
// the sample configs.
TrainConfig lqr_task(Variant variant, std::uint64_t seed, int total_steps);
TrainConfig bowl_task(Variant variant, std::uint64_t seed, int updates);

// Runs training and returns the metrics CSV exactly as `rpg train` writes it.
std::string run_to_csv(const TrainConfig& cfg, RunSummary* summary = nullptr);

}  // namespace rpg::tools
