#pragma once
// Offline knowledge-base seeding and the seeded end-to-end benchmark scenario
// generator.
//
// build_coverage_kb flies a deterministic lawnmower pattern over the world and
// memorizes every observation -- the stand-in for seeding the memory from
// recorded trajectories. make_benchmark_scenario builds worlds where every
// episode landmark has decoy instances sharing its description, placed at
// least 60 degrees of bearing away from the true candidate (seen from the
// approach point) and slightly farther out, so direction is the only reliable
// disambiguator.

#include <cmath>
#include <string>
#include <vector>

#include "lookaside/sim.hpp"

namespace lookaside::sim {

struct CoverageParams {
    double range_m = 250.0;
    double prune_radius_m = slkb::kDefaultPruneRadiusM;
    double merge_threshold = slkb::kDefaultMergeThreshold;
};

// Serpentine sweep at mid altitude with the sample pitch chosen so every
// point of the bounds stays within observation range of some sample.
inline slkb::KnowledgeBase build_coverage_kb(const World& world, const CoverageParams& params = {}) {
    if (world.landmarks.empty()) throw ConfigError("cannot build a knowledge base from an empty world");
    const auto& b = world.bounds;
    const double z_mid = (b.min.z + b.max.z) / 2.0;
    const double max_dz = std::max(z_mid - b.min.z, b.max.z - z_mid);
    if (params.range_m <= max_dz)
        throw ConfigError("observation range too small to cover the world's altitude span");
    const double reach_xy = std::sqrt(params.range_m * params.range_m - max_dz * max_dz);
    const double pitch = reach_xy;  // farthest cell point is reach/sqrt(2) away

    slkb::KnowledgeBase kb;
    const int nx = std::max(1, static_cast<int>(std::ceil((b.max.x - b.min.x) / pitch))) + 1;
    const int ny = std::max(1, static_cast<int>(std::ceil((b.max.y - b.min.y) / pitch))) + 1;
    ObserveParams obs;
    obs.range_m = params.range_m;
    obs.fov_deg = 90.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = std::min(b.max.y, b.min.y + iy * (b.max.y - b.min.y) / (ny - 1 ? ny - 1 : 1));
        for (int ix = 0; ix < nx; ++ix) {
            // Serpentine: even rows sweep +x, odd rows -x.
            const int col = iy % 2 == 0 ? ix : nx - 1 - ix;
            const double x = std::min(b.max.x, b.min.x + col * (b.max.x - b.min.x) / (nx - 1 ? nx - 1 : 1));
            elg::AgentPose pose;
            pose.position = {x, y, z_mid};
            pose.heading = iy % 2 == 0 ? geom::UnitVector3{1, 0, 0} : geom::UnitVector3{-1, 0, 0};
            auto [bundle, records] = observe(world, pose, obs);
            for (const auto& rec : records) kb.upsert(rec, params.merge_threshold);
        }
    }
    kb.prune_positions(params.prune_radius_m);
    return kb;
}

struct BenchmarkConfig {
    int landmarks_per_episode = 3;
    int decoys_per_landmark = 2;       // same-description distractors
    int filler_landmarks = 3;          // unrelated descriptions
    double min_leg_m = 50.0;
    double max_leg_m = 110.0;
    double max_turn_deg = 100.0;       // heading change between legs
    double max_climb_m = 6.0;
    double decoy_min_bearing_deg = 60.0;   // separation from the true candidate
    double decoy_max_bearing_deg = 130.0;
    double decoy_dist_scale_lo = 1.05;     // decoys sit farther than the true one
    double decoy_dist_scale_hi = 1.35;
    double min_separation_m = 25.0;        // horizontal, between any two landmarks
    Box bounds{{0, 0, 10}, {600, 600, 60}};
};

struct BenchmarkScenario {
    World world;
    Episode episode;
};

namespace detail {

inline geom::WorldPoint offset_at_bearing(const geom::WorldPoint& base, double yaw_deg,
                                          double dist, double z) {
    const double r = deg_to_rad(yaw_deg);
    return {base.x + dist * std::cos(r), base.y + dist * std::sin(r), z};
}

}  // namespace detail

inline BenchmarkScenario make_benchmark_scenario(uint64_t seed, const BenchmarkConfig& cfg = {}) {
    if (cfg.landmarks_per_episode < 1) throw ConfigError("need at least one landmark per episode");
    std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull);

    BenchmarkScenario sc;
    sc.world.seed = seed;
    sc.world.bounds = cfg.bounds;
    const Box& b = cfg.bounds;

    auto pool = sim::detail::description_pool();
    const int needed = cfg.landmarks_per_episode + cfg.filler_landmarks;
    for (int i = 0; i < needed; ++i) {
        const size_t j = static_cast<size_t>(i) + rng() % (pool.size() - static_cast<size_t>(i));
        std::swap(pool[static_cast<size_t>(i)], pool[j]);
    }

    const double margin = 0.25 * std::min(b.max.x - b.min.x, b.max.y - b.min.y);
    elg::AgentPose start;
    start.position = {uniform_in(rng, b.min.x + margin, b.max.x - margin),
                      uniform_in(rng, b.min.y + margin, b.max.y - margin),
                      uniform_in(rng, (b.min.z + b.max.z) / 2.0 - 5.0, (b.min.z + b.max.z) / 2.0 + 5.0)};
    start.heading = geom::heading_from_yaw_deg(uniform_in(rng, -180.0, 180.0));

    auto in_xy_bounds = [&](const geom::WorldPoint& p) {
        const double edge = 10.0;
        return p.x >= b.min.x + edge && p.x <= b.max.x - edge && p.y >= b.min.y + edge &&
               p.y <= b.max.y - edge && p.z >= b.min.z && p.z <= b.max.z;
    };
    auto clear_of_all = [&](const geom::WorldPoint& p) {
        if (geom::distance_xy(p, start.position) < cfg.min_separation_m) return false;
        return sim::detail::far_from_all(p, sc.world.landmarks, cfg.min_separation_m);
    };

    // True waypoints first: a forward-biased chain of legs.
    struct TrueLandmark {
        geom::WorldPoint position;
        double approach_yaw_deg;  // bearing of the leg that reaches it
        double leg_m;
        geom::WorldPoint basis;   // point the leg starts from
    };
    std::vector<TrueLandmark> truths;
    geom::WorldPoint at = start.position;
    double yaw = geom::yaw_deg_of(start.heading);
    for (int k = 0; k < cfg.landmarks_per_episode; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
            const double leg = uniform_in(rng, cfg.min_leg_m, cfg.max_leg_m);
            const double turn = uniform_in(rng, -cfg.max_turn_deg, cfg.max_turn_deg);
            const double climb = uniform_in(rng, -cfg.max_climb_m, cfg.max_climb_m);
            const double new_yaw = wrap_deg(yaw + turn);
            const double z = std::clamp(at.z + climb, b.min.z + 2.0, b.max.z - 2.0);
            const geom::WorldPoint p = detail::offset_at_bearing(at, new_yaw, leg, z);
            if (!in_xy_bounds(p) || !clear_of_all(p)) continue;
            truths.push_back({p, new_yaw, leg, at});
            sc.world.landmarks.push_back({pool[static_cast<size_t>(k)].first, p,
                                          pool[static_cast<size_t>(k)].second});
            yaw = new_yaw;
            at = p;
            placed = true;
        }
        if (!placed) throw Error("benchmark generator could not place waypoint " + std::to_string(k));
    }

    // Decoys: same description, bearing displaced by at least the configured
    // separation and strictly farther from the approach point.
    for (int k = 0; k < cfg.landmarks_per_episode; ++k) {
        const auto& t = truths[static_cast<size_t>(k)];
        for (int d = 0; d < cfg.decoys_per_landmark; ++d) {
            bool placed = false;
            for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
                const double side = (d + attempt) % 2 == 0 ? 1.0 : -1.0;
                const double off = side * uniform_in(rng, cfg.decoy_min_bearing_deg,
                                                     cfg.decoy_max_bearing_deg);
                const double dist = t.leg_m * uniform_in(rng, cfg.decoy_dist_scale_lo,
                                                         cfg.decoy_dist_scale_hi);
                const double z = std::clamp(t.position.z + uniform_in(rng, -4.0, 4.0),
                                            b.min.z + 2.0, b.max.z - 2.0);
                const geom::WorldPoint p =
                    detail::offset_at_bearing(t.basis, wrap_deg(t.approach_yaw_deg + off), dist, z);
                if (!in_xy_bounds(p) || !clear_of_all(p)) continue;
                sc.world.landmarks.push_back({pool[static_cast<size_t>(k)].first, p,
                                              pool[static_cast<size_t>(k)].second});
                placed = true;
            }
            if (!placed)
                throw Error("benchmark generator could not place decoy for waypoint " +
                            std::to_string(k));
        }
    }

    // Unrelated fillers keep retrieval honest.
    for (int f = 0; f < cfg.filler_landmarks; ++f) {
        const auto& desc = pool[static_cast<size_t>(cfg.landmarks_per_episode + f)];
        bool placed = false;
        for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
            geom::WorldPoint p = sim::detail::sample_point(rng, b);
            p.z = std::clamp(p.z, b.min.z + 2.0, b.max.z - 2.0);
            if (!in_xy_bounds(p) || !clear_of_all(p)) continue;
            sc.world.landmarks.push_back({desc.first, p, desc.second});
            placed = true;
        }
        if (!placed) throw Error("benchmark generator could not place filler landmark");
    }

    sc.episode.episode_id = "bench-" + std::to_string(seed);
    sc.episode.start_pose = start;
    for (int k = 0; k < cfg.landmarks_per_episode; ++k) {
        sc.episode.waypoints.push_back({truths[static_cast<size_t>(k)].position,
                                        pool[static_cast<size_t>(k)].first});
    }
    sc.episode.goal = sc.episode.waypoints.back().position;
    sc.episode.instruction = sim::detail::render_instruction(start, sc.episode.waypoints);
    return sc;
}

}  // namespace lookaside::sim
