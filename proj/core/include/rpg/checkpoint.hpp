#pragma once

#include <string>

#include "rpg/metric_net.hpp"

namespace rpg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Versioned binary blob: magic, version, network config, layout header, raw
/// little-endian doubles.
void save_checkpoint(const std::string& path, const MetricNet& net, const MetricNetParams& phi);

/// Throws CheckpointError on a bad magic/version and LayoutMismatch when the
/// stored layout or config differs from `net`.
MetricNetParams load_checkpoint(const std::string& path, const MetricNet& net);

/// Human-readable dump of config, layout and per-block values.
std::string checkpoint_json(const MetricNet& net, const MetricNetParams& phi);

}  // namespace rpg
