#pragma once

#include <string>
#include <vector>

#include "uas/mission.hpp"

namespace uas {

/// Files written by emit_outputs, relative to the output directory.
const std::vector<std::string>& run_output_files();

/// Writes run_log.json, the CSV tables and the overlay/truth plots into
/// `out_dir`, creating it if needed. Output is a pure function of the log.
/// Throws ErrorKind::Io when the directory cannot be written.
void emit_outputs(const MissionLog& log, const std::string& out_dir);

/// plan.json, plan.csv and route.svg.
void emit_plan(const PlanOnlyResult& plan, const std::string& out_dir);

/// Writes estimates.csv for a replayed measurement stream.
void emit_replay(const ReplayResult& replay, const MissionLog& log, const std::string& out_dir);

/// metrics.csv only.
void emit_metrics(const MissionLog& log, const std::string& out_dir);

std::string truth_csv(const MissionLog& log);
std::string measurements_csv(const MissionLog& log);
std::string estimates_csv(const std::vector<EstimateRecord>& agents, const std::vector<EstimateRecord>& targets);
std::string plans_csv(const std::vector<PlanRecord>& plans);
std::string metrics_csv(const MissionLog& log);
std::string overlay_svg(const MissionLog& log);
std::string truth_svg(const MissionLog& log);
std::string route_svg(const PlanOnlyResult& plan);

/// Creates `dir` (and parents) and writes `content` to dir/name.
void write_text_file(const std::string& dir, const std::string& name, const std::string& content);

}  // namespace uas
