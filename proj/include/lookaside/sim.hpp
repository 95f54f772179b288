#pragma once
// Seeded synthetic-world generator, observation synthesizer (the stand-in for
// the neural landmark recognizer/detector), the discrete action executor and
// the episode driver. Everything is a pure function of (seed, params).

#include <json.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lookaside/agent.hpp"
#include "lookaside/elg.hpp"
#include "lookaside/geometry.hpp"
#include "lookaside/slkb.hpp"
#include "lookaside/verbalizer.hpp"

namespace lookaside::sim {

// ---------------------------------------------------------------------------
// Worlds

struct Box {
    geom::WorldPoint min;
    geom::WorldPoint max;

    bool contains(const geom::WorldPoint& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
};

struct Landmark {
    std::string description;
    geom::WorldPoint position;
    std::string category;
};

struct World {
    uint64_t seed = 0;
    Box bounds{{0, 0, 10}, {600, 600, 60}};
    std::vector<Landmark> landmarks;
};

struct WorldParams {
    int landmark_count = 12;   // distinct descriptions
    int distractors = 1;       // positions sharing each description
    Box bounds{{0, 0, 10}, {600, 600, 60}};
    double min_spacing_m = 10.0;  // horizontal, which also bounds 3D spacing
};

namespace vocab {

inline constexpr std::array<const char*, 16> kCategories = {
    "tower", "bridge", "warehouse", "antenna", "billboard", "crane", "silo",
    "dome", "mailbox", "fountain", "statue", "chimney", "windmill", "gazebo",
    "hangar", "lighthouse"};

inline constexpr std::array<const char*, 14> kAttributes = {
    "red", "blue", "gray", "green", "white", "black", "yellow",
    "rusty", "glass", "brick", "metal", "stone", "concrete", "wooden"};

}  // namespace vocab

namespace detail {

// Deterministic description pool: attribute + category, then two-attribute.
inline std::vector<std::pair<std::string, std::string>> description_pool() {
    std::vector<std::pair<std::string, std::string>> pool;  // (description, category)
    for (const char* a : vocab::kAttributes)
        for (const char* c : vocab::kCategories)
            pool.emplace_back(std::string(a) + " " + c, c);
    for (const char* a : vocab::kAttributes)
        for (const char* b : vocab::kAttributes)
            if (std::string(a) != b)
                for (const char* c : vocab::kCategories)
                    pool.emplace_back(std::string(a) + " " + b + " " + c, c);
    return pool;
}

inline geom::WorldPoint sample_point(std::mt19937_64& rng, const Box& b, double margin = 0.0) {
    return {uniform_in(rng, b.min.x + margin, b.max.x - margin),
            uniform_in(rng, b.min.y + margin, b.max.y - margin),
            uniform_in(rng, b.min.z, b.max.z)};
}

inline bool far_from_all(const geom::WorldPoint& p, const std::vector<Landmark>& existing,
                         double min_spacing) {
    for (const auto& lm : existing) {
        if (geom::distance_xy(p, lm.position) < min_spacing) return false;
    }
    return true;
}

}  // namespace detail

// Deterministic placement; the distractor knob plants `distractors` positions
// per description to reproduce the description-ambiguity setting.
inline World generate_world(uint64_t seed, const WorldParams& params) {
    if (params.landmark_count < 1) throw ConfigError("landmark count must be >= 1");
    if (params.distractors < 1) throw ConfigError("distractors must be >= 1");
    if (!(params.bounds.max.x > params.bounds.min.x) || !(params.bounds.max.y > params.bounds.min.y) ||
        !(params.bounds.max.z >= params.bounds.min.z))
        throw ConfigError("world bounds must have positive extent");
    if (!(params.min_spacing_m >= 0.0)) throw ConfigError("min spacing must be >= 0");

    std::mt19937_64 rng(seed);
    World world;
    world.seed = seed;
    world.bounds = params.bounds;

    auto pool = detail::description_pool();
    if (static_cast<size_t>(params.landmark_count) > pool.size())
        throw ConfigError("landmark count exceeds description vocabulary");
    // Seeded Fisher-Yates prefix shuffle picks distinct descriptions.
    for (int i = 0; i < params.landmark_count; ++i) {
        const size_t j = static_cast<size_t>(i) +
                         rng() % (pool.size() - static_cast<size_t>(i));
        std::swap(pool[static_cast<size_t>(i)], pool[j]);
    }

    const int total = params.landmark_count * params.distractors;
    const double area = (params.bounds.max.x - params.bounds.min.x) *
                        (params.bounds.max.y - params.bounds.min.y);
    if (params.min_spacing_m > 0.0 &&
        area < 4.0 * params.min_spacing_m * params.min_spacing_m * static_cast<double>(total))
        throw ConfigError("infeasible density: bounds cannot hold " + std::to_string(total) +
                          " landmarks at min spacing " + format_double(params.min_spacing_m));

    for (int i = 0; i < params.landmark_count; ++i) {
        for (int k = 0; k < params.distractors; ++k) {
            geom::WorldPoint p;
            bool placed = false;
            for (int attempt = 0; attempt < 4000; ++attempt) {
                p = detail::sample_point(rng, params.bounds);
                if (detail::far_from_all(p, world.landmarks, params.min_spacing_m)) {
                    placed = true;
                    break;
                }
            }
            if (!placed)
                throw ConfigError("infeasible density: could not place landmark at min spacing " +
                                  format_double(params.min_spacing_m));
            world.landmarks.push_back({pool[static_cast<size_t>(i)].first, p,
                                       pool[static_cast<size_t>(i)].second});
        }
    }
    return world;
}

// ---------------------------------------------------------------------------
// Episodes

struct Waypoint {
    geom::WorldPoint position;
    std::string landmark;
};

struct Episode {
    std::string episode_id;
    elg::AgentPose start_pose;
    std::vector<Waypoint> waypoints;  // ground-truth path, each at a landmark
    std::string instruction;
    geom::WorldPoint goal;            // last waypoint

    std::vector<geom::WorldPoint> ground_truth_path() const {
        std::vector<geom::WorldPoint> out;
        out.reserve(waypoints.size());
        for (const auto& w : waypoints) out.push_back(w.position);
        return out;
    }
};

namespace detail {

// Instruction rendered from the true relative motions, so directional cues
// are correct by construction and parse back to the waypoint landmarks.
inline std::string render_instruction(const elg::AgentPose& start,
                                      const std::vector<Waypoint>& waypoints) {
    std::vector<verbalizer::Step> steps;
    geom::UnitVector3 orientation = start.heading;
    geom::WorldPoint at = start.position;
    for (const auto& wp : waypoints) {
        steps.push_back({wp.landmark, geom::motion_from(orientation, at, wp.position)});
        orientation = geom::heading_between(at, wp.position);
        at = wp.position;
    }
    return verbalizer::describe_steps(steps);
}

}  // namespace detail

// Samples a landmark sequence with distinct descriptions and renders the
// instruction through the verbalizer templates.
inline Episode synthesize_episode(const World& world, uint64_t seed, int length) {
    if (length < 1) throw ConfigError("episode length must be >= 1");
    std::vector<size_t> by_description;  // one representative index per description
    {
        std::vector<std::string> seen;
        for (size_t i = 0; i < world.landmarks.size(); ++i) {
            if (std::find(seen.begin(), seen.end(), world.landmarks[i].description) == seen.end()) {
                seen.push_back(world.landmarks[i].description);
                by_description.push_back(i);
            }
        }
    }
    if (static_cast<size_t>(length) > by_description.size())
        throw ConfigError("episode length exceeds distinct landmark count");

    std::mt19937_64 rng(seed ^ world.seed);
    Episode ep;
    ep.episode_id = "ep-" + std::to_string(seed);

    for (int attempt = 0; attempt < 500; ++attempt) {
        // Distinct-description sample, order shuffled by seed.
        std::vector<size_t> pick = by_description;
        for (size_t i = 0; i + 1 < pick.size(); ++i) {
            const size_t j = i + rng() % (pick.size() - i);
            std::swap(pick[i], pick[j]);
        }
        pick.resize(static_cast<size_t>(length));

        elg::AgentPose start;
        start.position = detail::sample_point(rng, world.bounds);
        start.heading = geom::heading_from_yaw_deg(uniform_in(rng, -180.0, 180.0));

        // Consecutive points need a usable horizontal heading.
        bool ok = geom::distance_xy(start.position, world.landmarks[pick[0]].position) > 1.0;
        for (size_t i = 0; ok && i + 1 < pick.size(); ++i) {
            ok = geom::distance_xy(world.landmarks[pick[i]].position,
                                   world.landmarks[pick[i + 1]].position) > 1.0;
        }
        if (!ok) continue;

        ep.start_pose = start;
        ep.waypoints.clear();
        for (size_t idx : pick) {
            ep.waypoints.push_back({world.landmarks[idx].position, world.landmarks[idx].description});
        }
        ep.goal = ep.waypoints.back().position;
        ep.instruction = detail::render_instruction(ep.start_pose, ep.waypoints);
        return ep;
    }
    throw ConfigError("could not synthesize an episode with usable headings");
}

// ---------------------------------------------------------------------------
// Observation synthesis

struct ObserveParams {
    double range_m = 300.0;
    double fov_deg = 90.0;     // per-view cone width; 90 tiles the horizon
    double sigma_pos_m = 0.0;  // position jitter
    double p_drop = 0.0;       // dropout probability per landmark
};

namespace detail {

enum class View { front, left, right, back, top, bottom };

inline std::string_view view_name(View v) {
    switch (v) {
        case View::front: return "front";
        case View::left: return "left";
        case View::right: return "right";
        case View::back: return "back";
        case View::top: return "top";
        case View::bottom: return "bottom";
    }
    return "front";
}

// Bearing partition: front +-45, left (45,135), back beyond +-135, right
// (-135,-45); top/bottom take over past +-60 degrees of elevation.
inline std::optional<View> classify(double bearing_deg, double elevation_deg, double fov_deg) {
    if (elevation_deg > 60.0) return View::top;
    if (elevation_deg < -60.0) return View::bottom;
    View v;
    double center;
    if (bearing_deg >= -45.0 && bearing_deg < 45.0) {
        v = View::front;
        center = 0.0;
    } else if (bearing_deg >= 45.0 && bearing_deg < 135.0) {
        v = View::left;
        center = 90.0;
    } else if (bearing_deg >= -135.0 && bearing_deg < -45.0) {
        v = View::right;
        center = -90.0;
    } else {
        v = View::back;
        center = 180.0;
    }
    if (std::abs(wrap_deg(bearing_deg - center)) > fov_deg / 2.0) return std::nullopt;
    return v;
}

struct Sighting {
    double distance;
    std::string text;
};

}  // namespace detail

// Assigns each in-range landmark to one of the six views by bearing and
// elevation relative to the pose, emitting textual view summaries plus
// landmark records with exact (optionally jittered) positions.
inline std::pair<agent::ObservationBundle, std::vector<slkb::LandmarkRecord>> observe(
    const World& world, const elg::AgentPose& pose, const ObserveParams& params,
    std::mt19937_64* noise_rng = nullptr) {
    if (!(params.range_m > 0.0)) throw Error("observe range must be positive");
    if (!(params.fov_deg > 0.0) || params.fov_deg > 180.0)
        throw Error("observe fov must lie in (0, 180]");
    if ((params.sigma_pos_m > 0.0 || params.p_drop > 0.0) && noise_rng == nullptr)
        throw Error("noisy observation requires a random generator");

    std::array<std::vector<detail::Sighting>, 6> sightings;
    std::vector<slkb::LandmarkRecord> records;

    for (const auto& lm : world.landmarks) {
        const double dist = geom::distance(pose.position, lm.position);
        if (dist > params.range_m || dist <= geom::kDegenerateDistanceM) continue;
        const double dxy = geom::distance_xy(pose.position, lm.position);
        const double dz = lm.position.z - pose.position.z;
        const double elevation_deg = rad_to_deg(std::atan2(dz, dxy));
        double bearing_deg = 0.0;
        if (dxy > geom::kDegenerateDistanceM) {
            bearing_deg = geom::horizontal_angle(pose.heading,
                                                 geom::heading_between(pose.position, lm.position));
        }
        const auto view = detail::classify(bearing_deg, elevation_deg, params.fov_deg);
        if (!view) continue;
        if (noise_rng && params.p_drop > 0.0 && uniform_unit(*noise_rng) < params.p_drop) continue;

        geom::WorldPoint reported = lm.position;
        if (noise_rng && params.sigma_pos_m > 0.0) {
            reported.x += gaussian(*noise_rng, 0.0, params.sigma_pos_m);
            reported.y += gaussian(*noise_rng, 0.0, params.sigma_pos_m);
            reported.z += gaussian(*noise_rng, 0.0, params.sigma_pos_m);
        }

        std::string vertical = "level";
        if (dz >= 1.0) vertical = std::to_string(std::lround(dz)) + " m above";
        else if (dz <= -1.0) vertical = std::to_string(std::lround(-dz)) + " m below";
        sightings[static_cast<size_t>(*view)].push_back(
            {dist, lm.description + " at " + std::to_string(std::lround(dist)) + " m, " + vertical});

        slkb::LandmarkRecord rec;
        rec.description = lm.description;
        rec.position = reported;
        rec.confidence = 1.0;
        rec.source_id = "obs:" + std::string(detail::view_name(*view));
        records.push_back(std::move(rec));
    }

    agent::ObservationBundle bundle;
    auto render = [&](detail::View v) {
        auto& list = sightings[static_cast<size_t>(v)];
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            return a.text < b.text;
        });
        std::string text;
        for (const auto& s : list) {
            if (!text.empty()) text += "; ";
            text += s.text;
        }
        return text.empty() ? std::string("nothing notable") : text;
    };
    bundle.front = render(detail::View::front);
    bundle.left = render(detail::View::left);
    bundle.right = render(detail::View::right);
    bundle.back = render(detail::View::back);
    bundle.top = render(detail::View::top);
    bundle.bottom = render(detail::View::bottom);
    return {std::move(bundle), std::move(records)};
}

// ---------------------------------------------------------------------------
// Action executor

// Applies one discrete action: forward 5 m along the horizontal heading,
// turns of 15 degrees about z, vertical moves of 2 m, all times repetitions.
inline elg::AgentPose step(const elg::AgentPose& pose, const agent::AgentAction& action) {
    action.validate();
    if (action.kind == agent::ActionKind::stop)
        throw Error("stop is handled by the episode driver, not step()");
    elg::AgentPose out = pose;
    switch (action.kind) {
        case agent::ActionKind::forward: {
            const double n = pose.heading.norm_xy();
            if (n <= geom::kDegenerateDistanceM) throw Error("heading has no horizontal component");
            const double d = agent::kForwardStepM * action.repetitions;
            out.position.x += d * pose.heading.x / n;
            out.position.y += d * pose.heading.y / n;
            break;
        }
        case agent::ActionKind::turn_left:
        case agent::ActionKind::turn_right: {
            const double sign = action.kind == agent::ActionKind::turn_left ? 1.0 : -1.0;
            const double a = deg_to_rad(sign * agent::kTurnStepDeg * action.repetitions);
            const double c = std::cos(a), s = std::sin(a);
            const double x = pose.heading.x, y = pose.heading.y;
            out.heading.x = c * x - s * y;
            out.heading.y = s * x + c * y;
            out.heading.z = pose.heading.z;
            break;
        }
        case agent::ActionKind::ascend:
            out.position.z += agent::kVerticalStepM * action.repetitions;
            break;
        case agent::ActionKind::descend:
            out.position.z -= agent::kVerticalStepM * action.repetitions;
            break;
        case agent::ActionKind::stop:
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Episode driver

enum class TerminalStatus { stopped, max_steps };

inline std::string_view to_string(TerminalStatus s) {
    return s == TerminalStatus::stopped ? "stopped" : "max_steps";
}

struct TrajectoryEntry {
    int step = 0;
    elg::AgentPose pose;          // pose at decision time
    agent::AgentAction action;    // action taken from that pose
};

struct Trajectory {
    std::vector<TrajectoryEntry> entries;
    TerminalStatus status = TerminalStatus::stopped;

    std::vector<geom::WorldPoint> positions() const {
        std::vector<geom::WorldPoint> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.pose.position);
        return out;
    }
};

// Planner failures carry the partial trajectory up to the failing step.
struct EpisodeFailure : Error {
    EpisodeFailure(const std::string& message, Trajectory partial_trajectory)
        : Error(message), partial(std::move(partial_trajectory)) {}
    Trajectory partial;
};

struct RunConfig {
    elg::ElgConfig elg{};
    double prune_radius_m = slkb::kDefaultPruneRadiusM;
    double merge_threshold = slkb::kDefaultMergeThreshold;
    int max_steps = 150;
    double success_threshold_m = 20.0;
    uint64_t seed = 0;
    ObserveParams observe{};
    bool online_kb = false;           // upsert records observed during the episode
    double visited_radius_m = 10.0;   // landmark counts as visited within this
};

// Core loop: observe -> (online) memorize -> track visited landmarks ->
// retrieve -> lookahead window -> ELG -> path descriptions -> plan -> act.
// Ends on the stop action or after max_steps decisions.
inline Trajectory run_episode(const World& world, const Episode& episode, agent::Planner& planner,
                              slkb::KnowledgeBase& kb, const RunConfig& config) {
    if (config.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    Trajectory traj;
    traj.status = TerminalStatus::max_steps;

    std::mt19937_64 noise_rng(config.seed ^ 0x9e3779b97f4a7c15ull ^
                              slkb::detail::fnv1a(episode.episode_id));

    std::vector<std::string> landmarks;
    try {
        landmarks = slkb::parse_landmarks(episode.instruction);
    } catch (const Error&) {
        landmarks.clear();
    }
    const size_t total = landmarks.size();

    elg::AgentPose pose = episode.start_pose;
    std::string history;
    std::vector<std::string> visited;
    std::optional<geom::WorldPoint> target;
    std::string target_landmark;
    // Anchor orientation for replanning: the direction of the leg that
    // reached the last visited landmark. The instantaneous heading is a poor
    // estimate right after arrival (the final approach may end in a sharp
    // correction turn); the completed segment is the reference the
    // instruction's cues were phrased against.
    geom::WorldPoint leg_start = episode.start_pose.position;
    std::optional<geom::UnitVector3> leg_orientation;

    try {
        for (int step_idx = 0; step_idx < config.max_steps; ++step_idx) {
            auto [bundle, records] = observe(world, pose, config.observe, &noise_rng);
            if (config.online_kb) {
                for (const auto& rec : records) kb.upsert(rec, config.merge_threshold);
            }

            // Visited-landmark advancement: within visited_radius_m of the
            // selected candidate. The final landmark keeps its target so the
            // controller can close in to its stop condition.
            if (target && visited.size() < total &&
                geom::distance(pose.position, *target) <= config.visited_radius_m) {
                visited.push_back(target_landmark);
                if (geom::distance_xy(leg_start, *target) > geom::kDegenerateDistanceM) {
                    leg_orientation = geom::heading_between(leg_start, *target);
                }
                leg_start = *target;
                if (visited.size() < total) target.reset();
            }

            agent::NavContext ctx;
            ctx.instruction = episode.instruction;
            ctx.history = history;
            ctx.visited_landmarks = visited;
            ctx.observation = bundle;

            std::vector<elg::ElgPath> paths;
            elg::Elg graph;
            bool have_graph = false;

            if (!target && total > 0 && visited.size() >= total) {
                // Nothing left to chase and no approach in progress.
                traj.entries.push_back({step_idx, pose, {agent::ActionKind::stop, 1}});
                traj.status = TerminalStatus::stopped;
                return traj;
            }

            if (target) {
                ctx.next_landmark = {target_landmark, agent::approach_motion(pose, *target)};
            } else if (!kb.empty() && !landmarks.empty()) {
                const auto retrieved = kb.retrieve(landmarks);
                const auto window = elg::select_unvisited(retrieved, visited.size(), config.elg.n_ahead);
                if (!window.empty()) {
                    const elg::AgentPose plan_pose{pose.position,
                                                   leg_orientation.value_or(pose.heading)};
                    graph = elg::build(plan_pose, window, config.elg);
                    paths = elg::enumerate_paths(graph, plan_pose);
                    ctx.path_descriptions = verbalizer::describe_paths(paths, graph.layer_landmarks);
                    have_graph = true;
                }
            }

            const agent::AgentDecision decision = agent::plan_step(planner, ctx);
            history = decision.updated_history;

            if (have_graph && decision.selected_path_id >= 0 &&
                static_cast<size_t>(decision.selected_path_id) < paths.size()) {
                const auto& chosen = paths[static_cast<size_t>(decision.selected_path_id)];
                target = graph.nodes[static_cast<size_t>(chosen.node_ids.front())].position;
                target_landmark = graph.layer_landmarks.front();
            }

            traj.entries.push_back({step_idx, pose, decision.action});
            if (decision.action.kind == agent::ActionKind::stop) {
                traj.status = TerminalStatus::stopped;
                return traj;
            }
            pose = step(pose, decision.action);
        }
    } catch (const Error& e) {
        throw EpisodeFailure(std::string("episode ") + episode.episode_id + " failed: " + e.what(),
                             std::move(traj));
    }
    traj.status = TerminalStatus::max_steps;
    return traj;
}

}  // namespace lookaside::sim
