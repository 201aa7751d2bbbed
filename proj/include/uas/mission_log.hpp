#pragma once

#include <string>

#include "uas/mission.hpp"

namespace uas {

inline constexpr int kLogSchemaVersion = 1;

/// Run log as JSON text with sorted keys and shortest round-trip numbers,
/// including a metrics summary. parse_log(write_log(log)) reproduces `log`.
std::string write_log(const MissionLog& log);

/// Throws ValidationError for malformed or mismatched logs.
MissionLog parse_log(const std::string& text);

MissionLog load_log(const std::string& path);

}  // namespace uas
