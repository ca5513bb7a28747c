#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "enroute/error.hpp"
#include "enroute/leaderboard.hpp"

namespace enroute {

struct VelocityReport {
    std::string team;
    double window_t0 = 0.0;
    double window_t1 = 0.0;
    double points_per_hour = 0.0;
    std::optional<double> time_to_threshold_hours;
    std::optional<double> early_late_ratio;
    std::optional<double> avg_points_per_solve;
};

// Mean scoring rate over [t0, t1], endpoints interpolated.
inline double window_velocity(const LeaderboardSeries& series, double t0, double t1) {
    if (!(t1 > t0))
        raise(ErrorKind::domain_error, "window end must exceed start");
    if (t0 > series.last_time())
        raise(ErrorKind::out_of_range,
              "series '" + series.team + "' ends before t0=" + std::to_string(t0));
    return (series.score_at(t1) - series.score_at(t0)) / (t1 - t0);
}

// Front-loadedness: velocity before the split over velocity after it.
// Infinity when the late window is flat.
inline double early_late_ratio(const LeaderboardSeries& series, double split, double end) {
    double early = window_velocity(series, 0.0, split);
    double late = window_velocity(series, split, end);
    if (late == 0.0) return std::numeric_limits<double>::infinity();
    return early / late;
}

// First crossing time of the threshold, linearly interpolated between the
// bracketing samples. A team entering at or above the threshold crosses at
// its entry time.
inline double time_to_threshold(const LeaderboardSeries& series, double threshold) {
    series.validate();
    if (series.final_score() < threshold)
        raise(ErrorKind::not_reached,
              "series '" + series.team + "' never reaches " + std::to_string(threshold));
    const auto& pts = series.points;
    if (pts.front().score >= threshold) return pts.front().t_hours;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].score >= threshold) {
            const ScorePoint& a = pts[i - 1];
            const ScorePoint& b = pts[i];
            if (b.score == a.score || b.t_hours == a.t_hours) return b.t_hours;
            return a.t_hours + (b.t_hours - a.t_hours) * (threshold - a.score) / (b.score - a.score);
        }
    }
    return pts.back().t_hours;   // unreachable given the final_score guard
}

// threshold / time-to-threshold; infinity when the crossing is at t=0.
inline double velocity_to_threshold(const LeaderboardSeries& series, double threshold) {
    double t = time_to_threshold(series, threshold);
    if (t == 0.0) return std::numeric_limits<double>::infinity();
    return threshold / t;
}

struct RankEntry {
    std::string team;
    double score = 0.0;
    int rank = 0;                       // dense rank, 1 is best
    double percentile_outperformed = 0; // share of the field strictly below
};

// Share of a field of `field` teams outperformed by the team at `rank`.
inline double percentile_outperformed(int rank, int field) {
    if (rank < 1 || field < 1 || rank > field)
        raise(ErrorKind::domain_error, "rank must lie in [1, field]");
    return static_cast<double>(field - rank) / static_cast<double>(field);
}

// Dense ranking of interpolated scores at time t. When the series set is a
// sample of a larger field, field_size scales the percentile: unsampled
// teams are assumed to rank below the sampled ones.
inline std::vector<RankEntry> rank_trajectory(const std::vector<LeaderboardSeries>& all, double t,
                                              std::optional<int> field_size = std::nullopt) {
    if (all.empty())
        raise(ErrorKind::empty_sequence, "no series to rank");
    int field = field_size.value_or(static_cast<int>(all.size()));
    if (field < static_cast<int>(all.size()))
        raise(ErrorKind::domain_error, "field size smaller than the sample");

    std::vector<RankEntry> entries;
    entries.reserve(all.size());
    for (const auto& s : all) entries.push_back({s.team, s.score_at(t), 0, 0.0});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RankEntry& a, const RankEntry& b) { return a.score > b.score; });
    int rank = 0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i == 0 || entries[i].score != prev) ++rank;
        prev = entries[i].score;
        entries[i].rank = rank;
        entries[i].percentile_outperformed = percentile_outperformed(rank, field);
    }
    return entries;
}

// Solves (or points) per hour over a window.
inline double solve_rate(double count, double window_hours) {
    if (!(window_hours > 0))
        raise(ErrorKind::domain_error, "window must be positive");
    return count / window_hours;
}

inline double avg_points_per_solve(double points, double solves) {
    if (!(solves > 0))
        raise(ErrorKind::domain_error, "solve count must be positive");
    return points / solves;
}

// One team's velocity row: early-window rate plus the optional derived
// columns. Threshold crossings the team never makes stay empty.
inline VelocityReport make_velocity_report(const LeaderboardSeries& series, double split,
                                           double end,
                                           std::optional<double> threshold = std::nullopt,
                                           std::optional<double> solves = std::nullopt) {
    VelocityReport report;
    report.team = series.team;
    report.window_t0 = 0.0;
    report.window_t1 = split;
    report.points_per_hour = window_velocity(series, 0.0, split);
    report.early_late_ratio = early_late_ratio(series, split, end);
    if (threshold) {
        try {
            report.time_to_threshold_hours = time_to_threshold(series, *threshold);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::not_reached) throw;
        }
    }
    if (solves) report.avg_points_per_solve = avg_points_per_solve(series.final_score(), *solves);
    return report;
}

} // namespace enroute
