#pragma once
// Trajectory evaluation: navigation error, success, oracle success, dynamic
// time warping, normalized DTW and success-weighted nDTW, plus batch
// aggregation in the benchmark table format.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "lookaside/geometry.hpp"
#include "lookaside/sim.hpp"

namespace lookaside::metrics {

inline constexpr double kSuccessThresholdM = 20.0;
inline constexpr double kDensifySpacingM = 5.0;  // the forward-step grain

struct EvalResult {
    double ne = 0.0;    // meters, final distance to goal
    int sr = 0;         // stop within threshold
    int osr = 0;        // any point within threshold
    double dtw = 0.0;   // meters
    double ndtw = 0.0;  // (0, 1]
    double sdtw = 0.0;  // sr * ndtw
};

inline double nav_error(const sim::Trajectory& traj, const geom::WorldPoint& goal) {
    if (traj.entries.empty()) throw Error("empty trajectory");
    return geom::distance(traj.entries.back().pose.position, goal);
}

inline int success(const sim::Trajectory& traj, const geom::WorldPoint& goal,
                   double threshold_m = kSuccessThresholdM) {
    return nav_error(traj, goal) <= threshold_m ? 1 : 0;
}

inline int oracle_success(const sim::Trajectory& traj, const geom::WorldPoint& goal,
                          double threshold_m = kSuccessThresholdM) {
    if (traj.entries.empty()) throw Error("empty trajectory");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : traj.entries) best = std::min(best, geom::distance(e.pose.position, goal));
    return best <= threshold_m ? 1 : 0;
}

// Classic DTW with Euclidean point cost and match/insert/delete moves,
// computed by the O(nm) dynamic program over two rolling rows.
inline double dtw(const std::vector<geom::WorldPoint>& pred,
                  const std::vector<geom::WorldPoint>& ref) {
    if (pred.empty() || ref.empty()) throw Error("DTW inputs must be non-empty");
    const size_t n = pred.size(), m = ref.size();
    std::vector<double> prev(m), cur(m);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            const double cost = geom::distance(pred[i], ref[j]);
            if (i == 0 && j == 0) {
                cur[j] = cost;
            } else if (i == 0) {
                cur[j] = cost + cur[j - 1];
            } else if (j == 0) {
                cur[j] = cost + prev[j];
            } else {
                cur[j] = cost + std::min(std::min(prev[j - 1], prev[j]), cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

inline double ndtw(const std::vector<geom::WorldPoint>& pred,
                   const std::vector<geom::WorldPoint>& ref,
                   double threshold_m = kSuccessThresholdM) {
    return std::exp(-dtw(pred, ref) / (static_cast<double>(ref.size()) * threshold_m));
}

// Inserts points every `spacing` meters along each waypoint segment, keeping
// the segment endpoints; consecutive duplicates are dropped.
inline std::vector<geom::WorldPoint> densify(const std::vector<geom::WorldPoint>& waypoints,
                                             double spacing_m = kDensifySpacingM) {
    if (!(spacing_m > 0.0)) throw Error("densify spacing must be positive");
    std::vector<geom::WorldPoint> out;
    for (size_t i = 0; i < waypoints.size(); ++i) {
        if (i == 0) {
            out.push_back(waypoints[0]);
            continue;
        }
        const auto& a = waypoints[i - 1];
        const auto& b = waypoints[i];
        const double d = geom::distance(a, b);
        const int segments = std::max(1, static_cast<int>(std::ceil(d / spacing_m)));
        for (int s = 1; s <= segments; ++s) {
            const double t = static_cast<double>(s) / segments;
            geom::WorldPoint p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
            if (!(p == out.back())) out.push_back(p);
        }
    }
    return out;
}

// Recorded poses are one per decision, so a batched multi-repetition action
// leaves a long straight gap; densifying both sides at the forward-step grain
// compares the flown polyline instead of the decision points.
inline std::vector<geom::WorldPoint> flown_path(const sim::Trajectory& traj) {
    return densify(traj.positions());
}

inline double sdtw(const sim::Trajectory& traj, const sim::Episode& episode,
                   double threshold_m = kSuccessThresholdM) {
    const int sr = success(traj, episode.goal, threshold_m);
    if (sr == 0) return 0.0;
    return sr * ndtw(flown_path(traj), densify(episode.ground_truth_path()), threshold_m);
}

inline EvalResult evaluate(const sim::Trajectory& traj, const sim::Episode& episode,
                           double threshold_m = kSuccessThresholdM) {
    EvalResult r;
    r.ne = nav_error(traj, episode.goal);
    r.sr = success(traj, episode.goal, threshold_m);
    r.osr = oracle_success(traj, episode.goal, threshold_m);
    const auto pred = flown_path(traj);
    const auto ref = densify(episode.ground_truth_path());
    r.dtw = dtw(pred, ref);
    r.ndtw = ndtw(pred, ref, threshold_m);
    r.sdtw = r.sr * r.ndtw;
    return r;
}

struct BatchSummary {
    std::vector<std::pair<std::string, EvalResult>> episodes;  // (episode_id, result)
    double sr_pct = 0.0;
    double osr_pct = 0.0;
    double sdtw_pct = 0.0;
    double ne_mean_m = 0.0;
};

inline BatchSummary evaluate_batch(const std::vector<std::pair<sim::Trajectory, sim::Episode>>& batch,
                                   double threshold_m = kSuccessThresholdM) {
    if (batch.empty()) throw Error("empty evaluation batch");
    BatchSummary summary;
    double sr = 0.0, osr = 0.0, sdtw_sum = 0.0, ne = 0.0;
    for (const auto& [traj, episode] : batch) {
        const EvalResult r = evaluate(traj, episode, threshold_m);
        sr += r.sr;
        osr += r.osr;
        sdtw_sum += r.sdtw;
        ne += r.ne;
        summary.episodes.emplace_back(episode.episode_id, r);
    }
    const double n = static_cast<double>(batch.size());
    summary.sr_pct = 100.0 * sr / n;
    summary.osr_pct = 100.0 * osr / n;
    summary.sdtw_pct = 100.0 * sdtw_sum / n;
    summary.ne_mean_m = ne / n;
    return summary;
}

inline std::string render_table(const BatchSummary& summary) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %4s %4s %10s %10s %10s\n", "episode", "SR", "OSR",
                  "NE", "nDTW", "SDTW");
    out += line;
    for (const auto& [id, r] : summary.episodes) {
        std::snprintf(line, sizeof(line), "%-24s %4d %4d %10.2f %10.4f %10.4f\n", id.c_str(), r.sr,
                      r.osr, r.ne, r.ndtw, r.sdtw);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-24s SR %.1f  OSR %.1f  SDTW %.1f  NE %.1f\n", "mean",
                  summary.sr_pct, summary.osr_pct, summary.sdtw_pct, summary.ne_mean_m);
    out += line;
    return out;
}

inline nlohmann::ordered_json to_json(const BatchSummary& summary) {
    nlohmann::ordered_json j;
    j["sr"] = summary.sr_pct;
    j["osr"] = summary.osr_pct;
    j["sdtw"] = summary.sdtw_pct;
    j["ne"] = summary.ne_mean_m;
    auto& eps = j["episodes"] = nlohmann::ordered_json::array();
    for (const auto& [id, r] : summary.episodes) {
        eps.push_back({{"id", id},
                       {"ne", r.ne},
                       {"sr", r.sr},
                       {"osr", r.osr},
                       {"dtw", r.dtw},
                       {"ndtw", r.ndtw},
                       {"sdtw", r.sdtw}});
    }
    return j;
}

}  // namespace lookaside::metrics
