#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rpg::tools {

// Exit codes: 0 all suites pass, 1 a check failed, 2 unknown suite name.
// suite == "all" runs every suite including the slow ones.
int cmd_verify(const std::optional<std::string>& suite, std::ostream& out, std::ostream& err);

// Writes metrics.csv, summary.json, phi.ckpt and phi.json into out_dir.
// Exit 1 on a config or runtime error.
int cmd_train(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
              const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

// Prints one summary row per log; with plot_dir, writes return / ratio /
// Hessian-trace charts per run and overlays when there are several logs.
int cmd_report(const std::vector<std::filesystem::path>& logs, const std::optional<std::filesystem::path>& plot_dir,
               std::ostream& out, std::ostream& err);

}  // namespace rpg::tools
