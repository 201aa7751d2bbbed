#include "uas/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "uas/assignment.hpp"
#include "uas/error.hpp"

namespace uas {

double ospa(std::span<const Vec2> x, std::span<const Vec2> y, double c, double p) {
    if (!(c > 0.0) || !(p >= 1.0)) throw Error(ErrorKind::Contract, "ospa: need c > 0 and p >= 1");
    const std::size_t m = x.size(), n = y.size();
    if (m == 0 && n == 0) return 0.0;
    if (m == 0 || n == 0) return c;
    const std::size_t big = std::max(m, n);
    // Padding rows/columns cost c^p, the same as a cut-off match.
    CostMatrix d = CostMatrix::Constant(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(big), std::pow(c, p));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::pow(std::min((x[i] - y[j]).norm(), c), p);
    const auto match = hungarian(d);
    const double total = assignment_cost(d, match);
    return std::min(c, std::pow(total / static_cast<double>(big), 1.0 / p));
}

MetricsReport compute_metrics(const MissionLog& log) {
    MetricsReport rep;
    rep.status = log.status;
    rep.completion_time = log.completion_time;
    rep.replans = log.counters.replans;
    const auto& o = log.scenario.ospa;
    for (std::size_t k = 0; k < log.scans.size(); ++k) {
        const ScanRecord& s = log.scans[k];
        MetricsRow row;
        row.step = s.scan.step;
        row.time = static_cast<double>(s.tick) * MissionClock::kDt;
        std::vector<Vec2> te, ae;
        if (k < log.target_estimates.size())
            for (const auto& e : log.target_estimates[k].estimates.estimates) te.push_back(e.position());
        if (k < log.agent_estimates.size())
            for (const auto& e : log.agent_estimates[k].estimates.estimates) ae.push_back(e.position());
        row.target_ospa = ospa(te, s.target_truth, o.cutoff, o.order);
        row.agent_ospa = ospa(ae, s.agent_truth, o.cutoff, o.order);
        row.target_estimates = static_cast<int>(te.size());
        row.target_truth = static_cast<int>(s.target_truth.size());
        row.cardinality_error = row.target_estimates - row.target_truth;
        rep.rows.push_back(row);
    }
    const long window_ticks = std::lround(o.window / MissionClock::kDt);
    double sum = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < rep.rows.size(); ++k)
        if (log.scans[k].tick > log.end_tick - window_ticks) {
            sum += rep.rows[k].target_ospa;
            ++count;
        }
    rep.final_window_ospa = count > 0 ? sum / count : 0.0;
    return rep;
}

}  // namespace uas
