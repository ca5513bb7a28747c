#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "enroute/error.hpp"

namespace enroute {

struct ScorePoint {
    double t_hours = 0.0;
    double score = 0.0;
};

// Cumulative score trajectory of one team. Times and scores are
// nondecreasing; scores never drop in this format.
struct LeaderboardSeries {
    std::string team;
    std::vector<ScorePoint> points;

    void validate() const {
        if (points.empty())
            raise(ErrorKind::malformed_series, "series '" + team + "' has no points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].t_hours < 0)
                raise(ErrorKind::malformed_series, "series '" + team + "': negative time");
            if (i > 0) {
                if (points[i].t_hours < points[i - 1].t_hours)
                    raise(ErrorKind::malformed_series,
                          "series '" + team + "': time decreases at index " + std::to_string(i));
                if (points[i].score < points[i - 1].score)
                    raise(ErrorKind::malformed_series,
                          "series '" + team + "': score drops at index " + std::to_string(i));
            }
        }
    }

    double entry_time() const { return points.front().t_hours; }
    double last_time() const { return points.back().t_hours; }
    double final_score() const { return points.back().score; }

    // Step-then-linear interpolation: zero before the first recorded point
    // (teams score nothing before entering), linear between points, and the
    // last score holds after the series ends.
    double score_at(double t) const {
        if (t < points.front().t_hours) return 0.0;
        if (t >= points.back().t_hours) return points.back().score;
        // first point past t; its predecessor is the last sample at or
        // before t (the latest one when several share a timestamp)
        auto next = std::upper_bound(points.begin(), points.end(), t,
                                     [](double v, const ScorePoint& p) { return v < p.t_hours; });
        const ScorePoint& a = *(next - 1);
        if (a.t_hours == t) return a.score;
        const ScorePoint& b = *next;
        return a.score + (b.score - a.score) * (t - a.t_hours) / (b.t_hours - a.t_hours);
    }
};

// Delimited text with a header line `team,t_hours,score`; `#` lines are
// comments. Rows for one team must appear in time order.
inline std::vector<LeaderboardSeries> load_leaderboard(std::istream& in,
                                                       const std::string& origin = "<stream>") {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<LeaderboardSeries> series;
    std::map<std::string, std::size_t> index;

    auto fail = [&](const std::string& what) {
        raise(ErrorKind::malformed_series,
              origin + " line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "team,t_hours,score")
                fail("expected header 'team,t_hours,score', got '" + line + "'");
            header_seen = true;
            continue;
        }
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) fail("expected 3 comma-separated fields");
        std::string team = line.substr(0, c1);
        ScorePoint pt;
        try {
            pt.t_hours = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            pt.score = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            fail("non-numeric time or score");
        }
        auto [it, inserted] = index.try_emplace(team, series.size());
        if (inserted) series.push_back({team, {}});
        series[it->second].points.push_back(pt);
    }
    if (!header_seen && line_no > 0)
        raise(ErrorKind::malformed_series, origin + ": missing header");
    for (const auto& s : series) s.validate();
    return series;
}

inline std::vector<LeaderboardSeries> load_leaderboard(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io_error, "cannot open leaderboard file " + path);
    return load_leaderboard(in, path);
}

inline const LeaderboardSeries& find_series(const std::vector<LeaderboardSeries>& all,
                                            const std::string& team) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const LeaderboardSeries& s) { return s.team == team; });
    if (it == all.end())
        raise(ErrorKind::out_of_range, "no series for team '" + team + "'");
    return *it;
}

} // namespace enroute
