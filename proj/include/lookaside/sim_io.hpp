#pragma once
// File formats for the simulation artifacts, all written deterministically:
//   world / episode files  -- JSON
//   trajectory files       -- CSV, header step,x,y,z,heading_deg,action,repetitions

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lookaside/sim.hpp"

namespace lookaside::sim {

namespace detail {

inline nlohmann::ordered_json point_json(const geom::WorldPoint& p) {
    return {{"x", p.x}, {"y", p.y}, {"z", p.z}};
}

inline geom::WorldPoint point_from_json(const nlohmann::json& j) {
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open for writing: " + path.string());
    f << content;
    if (!f) throw Error("write failed: " + path.string());
}

}  // namespace detail

inline nlohmann::ordered_json world_to_json(const World& world) {
    nlohmann::ordered_json j;
    j["seed"] = world.seed;
    j["bounds"] = {{"min", detail::point_json(world.bounds.min)},
                   {"max", detail::point_json(world.bounds.max)}};
    auto& lms = j["landmarks"] = nlohmann::ordered_json::array();
    for (const auto& lm : world.landmarks) {
        nlohmann::ordered_json e;
        e["desc"] = lm.description;
        e["x"] = lm.position.x;
        e["y"] = lm.position.y;
        e["z"] = lm.position.z;
        e["category"] = lm.category;
        lms.push_back(std::move(e));
    }
    return j;
}

inline World world_from_json(const nlohmann::json& j) {
    World world;
    try {
        world.seed = j.at("seed").get<uint64_t>();
        world.bounds.min = detail::point_from_json(j.at("bounds").at("min"));
        world.bounds.max = detail::point_from_json(j.at("bounds").at("max"));
        for (const auto& e : j.at("landmarks")) {
            world.landmarks.push_back({e.at("desc").get<std::string>(),
                                       {e.at("x").get<double>(), e.at("y").get<double>(),
                                        e.at("z").get<double>()},
                                       e.value("category", std::string{})});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed world file: ") + e.what());
    }
    return world;
}

inline void save_world(const World& world, const std::filesystem::path& path) {
    detail::write_file(path, world_to_json(world).dump(2) + "\n");
}

inline World load_world(const std::filesystem::path& path) {
    try {
        return world_from_json(nlohmann::json::parse(detail::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed world file " + path.string() + ": " + e.what());
    }
}

inline nlohmann::ordered_json episode_to_json(const Episode& ep) {
    nlohmann::ordered_json j;
    j["episode_id"] = ep.episode_id;
    j["start"] = {{"x", ep.start_pose.position.x},
                  {"y", ep.start_pose.position.y},
                  {"z", ep.start_pose.position.z},
                  {"heading_deg", geom::yaw_deg_of(ep.start_pose.heading)}};
    auto& wps = j["waypoints"] = nlohmann::ordered_json::array();
    for (const auto& wp : ep.waypoints) {
        nlohmann::ordered_json e = detail::point_json(wp.position);
        e["landmark"] = wp.landmark;
        wps.push_back(std::move(e));
    }
    j["instruction"] = ep.instruction;
    j["goal"] = detail::point_json(ep.goal);
    return j;
}

inline Episode episode_from_json(const nlohmann::json& j) {
    Episode ep;
    try {
        ep.episode_id = j.at("episode_id").get<std::string>();
        const auto& s = j.at("start");
        ep.start_pose.position = detail::point_from_json(s);
        ep.start_pose.heading = geom::heading_from_yaw_deg(s.at("heading_deg").get<double>());
        for (const auto& e : j.at("waypoints")) {
            ep.waypoints.push_back({detail::point_from_json(e), e.at("landmark").get<std::string>()});
        }
        ep.instruction = j.at("instruction").get<std::string>();
        ep.goal = detail::point_from_json(j.at("goal"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed episode file: ") + e.what());
    }
    return ep;
}

inline void save_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& path) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& ep : episodes) j.push_back(episode_to_json(ep));
    detail::write_file(path, j.dump(2) + "\n");
}

inline std::vector<Episode> load_episodes(const std::filesystem::path& path) {
    std::vector<Episode> out;
    try {
        const auto j = nlohmann::json::parse(detail::read_file(path));
        if (j.is_array()) {
            for (const auto& e : j) out.push_back(episode_from_json(e));
        } else {
            out.push_back(episode_from_json(j));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed episode file " + path.string() + ": " + e.what());
    }
    return out;
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "step,x,y,z,heading_deg,action,repetitions\n";
    for (const auto& e : traj.entries) {
        out += std::to_string(e.step) + "," + format_double(e.pose.position.x) + "," +
               format_double(e.pose.position.y) + "," + format_double(e.pose.position.z) + "," +
               format_double(geom::yaw_deg_of(e.pose.heading)) + "," +
               std::string(agent::to_string(e.action.kind)) + "," +
               std::to_string(e.action.repetitions) + "\n";
    }
    return out;
}

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
    detail::write_file(path, trajectory_to_csv(traj));
}

inline Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open trajectory file: " + path.string());
    Trajectory traj;
    std::string line;
    if (!std::getline(f, line) || trim(line) != "step,x,y,z,heading_deg,action,repetitions")
        throw ConfigError("trajectory file missing header: " + path.string());
    size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 7)
            throw ConfigError("trajectory parse error at line " + std::to_string(line_no) + " of " +
                              path.string());
        TrajectoryEntry e;
        try {
            e.step = std::stoi(cols[0]);
            e.pose.position = {std::stod(cols[1]), std::stod(cols[2]), std::stod(cols[3])};
            e.pose.heading = geom::heading_from_yaw_deg(std::stod(cols[4]));
            const auto kind = agent::action_kind_from_string(cols[5]);
            if (!kind) throw ConfigError("unknown action: " + cols[5]);
            e.action.kind = *kind;
            e.action.repetitions = std::stoi(cols[6]);
        } catch (const std::exception& ex) {
            throw ConfigError("trajectory parse error at line " + std::to_string(line_no) + " of " +
                              path.string() + ": " + ex.what());
        }
        traj.entries.push_back(std::move(e));
    }
    traj.status = (!traj.entries.empty() &&
                   traj.entries.back().action.kind == agent::ActionKind::stop)
                      ? TerminalStatus::stopped
                      : TerminalStatus::max_steps;
    return traj;
}

}  // namespace lookaside::sim
