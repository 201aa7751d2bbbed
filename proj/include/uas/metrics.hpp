#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uas/mission.hpp"
#include "uas/types.hpp"

namespace uas {

/// OSPA distance with cutoff `c` and order `p`. Zero when both sets are
/// empty. Throws ErrorKind::Contract for c <= 0 or p < 1.
double ospa(std::span<const Vec2> x, std::span<const Vec2> y, double c, double p);

struct MetricsRow {
    int step = 0;
    double time = 0.0;  // s
    double target_ospa = 0.0;
    double agent_ospa = 0.0;
    int target_estimates = 0;
    int target_truth = 0;
    int cardinality_error = 0;  // estimated minus true target count
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    /// Mean target OSPA over scans in the trailing window before the end.
    double final_window_ospa = 0.0;
    std::optional<double> completion_time;
    long replans = 0;
    MissionStatus status = MissionStatus::TimeLimit;
};

MetricsReport compute_metrics(const MissionLog& log);

}  // namespace uas
