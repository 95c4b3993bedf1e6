#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpg/tools/commands.hpp"
#include "rpg/tools/run_config.hpp"
#include "rpg/tools/suites.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rpg: metric-tensor regularized policy gradients"};
  app.require_subcommand(1);

  std::string suite_names;
  for (const rpg::tools::SuiteInfo& s : rpg::tools::all_suites()) {
    suite_names += std::string("\n  ") + s.name + (s.in_default ? "" : " (opt-in)") + "  " + s.title;
  }

  auto* verify = app.add_subcommand("verify", "Run the oracle and property suites");
  std::optional<std::string> suite;
  verify->add_option("--suite", suite, "Run one suite, or 'all' for every suite including opt-in ones:" + suite_names);

  auto* train = app.add_subcommand("train", "Run the training loop from a config file");
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "run";
  train->add_option("config", config, "Config file (key = value with [sections])")->required();
  train->add_option("--seed", seed, "Override run.seed");
  train->add_option("--out", out_dir, "Output directory")->capture_default_str();
  train->footer("Accepted keys and defaults:\n" + rpg::tools::documented_defaults());

  auto* report = app.add_subcommand("report", "Summarize metrics logs and draw SVG charts");
  std::vector<std::string> logs;
  std::optional<std::string> plot_dir;
  report->add_option("logs", logs, "metrics.csv files")->required();
  report->add_option("--plot", plot_dir, "Directory for SVG charts");

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed()) return rpg::tools::cmd_verify(suite, std::cout, std::cerr);
  if (train->parsed()) return rpg::tools::cmd_train(config, seed, out_dir, std::cout, std::cerr);
  std::vector<std::filesystem::path> paths(logs.begin(), logs.end());
  std::optional<std::filesystem::path> plots;
  if (plot_dir) plots = *plot_dir;
  return rpg::tools::cmd_report(paths, plots, std::cout, std::cerr);
}
