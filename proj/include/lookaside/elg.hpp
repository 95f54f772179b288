#pragma once
// Egocentric Lookaside Graph: a layered DAG over candidate positions of the
// next unvisited landmarks. Layer 0 is the agent anchor; layer i >= 1 holds
// candidate positions of the i-th unvisited landmark. Edges carry the raw
// from/to geometry only -- the deflection angle depends on how a node was
// reached, so per-step motions are computed during path enumeration.

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lookaside/geometry.hpp"
#include "lookaside/slkb.hpp"

namespace lookaside::elg {

struct ElgConfig {
    int n_ahead = 2;   // lookahead horizon: future unvisited landmarks per graph
    int n_next = 6;    // layer-1 candidates kept, nearest to the agent
    int n_subseq = 2;  // outgoing edges per node toward the next layer

    void validate() const {
        if (n_ahead < 1 || n_next < 1 || n_subseq < 1)
            throw Error("ELG config values must be >= 1");
    }
};

struct AgentPose {
    geom::WorldPoint position;
    geom::UnitVector3 heading;  // unit norm, nonzero horizontal projection
};

struct ElgNode {
    int node_id = 0;
    int layer = 0;          // 0 = agent anchor
    std::string landmark;   // empty for the anchor
    geom::WorldPoint position;
};

struct ElgEdge {
    int from = 0;
    int to = 0;
};

struct Elg {
    std::vector<ElgNode> nodes;      // node_id == index
    std::vector<ElgEdge> edges;      // sorted by (from, to)
    std::vector<std::string> layer_landmarks;  // names of layers 1..L
    int layers = 0;                  // L, number of landmark layers
};

struct ElgPath {
    std::vector<int> node_ids;                  // layer-1 node .. deepest reached node
    std::vector<geom::RelativeMotion> motions;  // one per step, same length
    bool partial = false;                       // stopped before layer L
};

// The next unvisited landmark layers fed into build().
struct LayerInput {
    std::string landmark;
    std::vector<geom::WorldPoint> candidates;
};

// Window of min(n_ahead, remaining) landmarks after the first visited_count.
inline std::vector<LayerInput> select_unvisited(const slkb::RetrievedLandmarkSet& retrieved,
                                                size_t visited_count, int n_ahead) {
    if (visited_count > retrieved.size())
        throw Error("visited count exceeds total landmarks");
    if (n_ahead < 1) throw Error("n_ahead must be >= 1");
    std::vector<LayerInput> out;
    const size_t end = std::min(retrieved.size(), visited_count + static_cast<size_t>(n_ahead));
    for (size_t i = visited_count; i < end; ++i) {
        out.push_back({retrieved[i].instruction_landmark.empty() ? retrieved[i].matched_description
                                                                 : retrieved[i].instruction_landmark,
                       retrieved[i].positions});
    }
    return out;
}

namespace detail {

// Indices of the k nearest candidates to `from`, ties broken by smaller index;
// result is returned in ascending index order for stable node numbering.
inline std::vector<size_t> k_nearest(const std::vector<geom::WorldPoint>& candidates,
                                     const geom::WorldPoint& from, size_t k) {
    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double da = geom::distance(candidates[a], from);
        const double db = geom::distance(candidates[b], from);
        if (da != db) return da < db;
        return a < b;
    });
    if (order.size() > k) order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace detail

inline Elg build(const AgentPose& pose, const std::vector<LayerInput>& unvisited,
                 const ElgConfig& config = {}) {
    config.validate();
    if (unvisited.empty()) throw Error("no unvisited landmarks for ELG construction");
    for (const auto& layer : unvisited) {
        if (layer.candidates.empty())
            throw Error("no candidates for landmark " + layer.landmark);
    }

    Elg g;
    g.layers = static_cast<int>(std::min<size_t>(unvisited.size(), static_cast<size_t>(config.n_ahead)));
    g.nodes.push_back({0, 0, "", pose.position});

    // Layer 1: the n_next candidates nearest to the agent.
    std::vector<int> prev_layer_ids;
    {
        const auto& layer = unvisited[0];
        g.layer_landmarks.push_back(layer.landmark);
        const auto picked = detail::k_nearest(layer.candidates, pose.position,
                                              static_cast<size_t>(config.n_next));
        for (size_t idx : picked) {
            const int id = static_cast<int>(g.nodes.size());
            g.nodes.push_back({id, 1, layer.landmark, layer.candidates[idx]});
            g.edges.push_back({0, id});
            prev_layer_ids.push_back(id);
        }
    }

    // Deeper layers: each node connects to its n_subseq nearest candidates of
    // the next landmark; only candidates that receive an edge become nodes.
    for (int li = 1; li < g.layers; ++li) {
        const auto& layer = unvisited[static_cast<size_t>(li)];
        g.layer_landmarks.push_back(layer.landmark);
        std::vector<std::pair<int, size_t>> picks;  // (from node id, candidate index)
        std::vector<size_t> used;
        for (int from_id : prev_layer_ids) {
            const auto nearest = detail::k_nearest(layer.candidates,
                                                   g.nodes[static_cast<size_t>(from_id)].position,
                                                   static_cast<size_t>(config.n_subseq));
            for (size_t idx : nearest) {
                picks.emplace_back(from_id, idx);
                used.push_back(idx);
            }
        }
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());

        std::vector<int> idx_to_node(layer.candidates.size(), -1);
        std::vector<int> layer_ids;
        for (size_t idx : used) {
            const int id = static_cast<int>(g.nodes.size());
            g.nodes.push_back({id, li + 1, layer.landmark, layer.candidates[idx]});
            idx_to_node[idx] = id;
            layer_ids.push_back(id);
        }
        for (const auto& [from_id, idx] : picks) {
            g.edges.push_back({from_id, idx_to_node[idx]});
        }
        prev_layer_ids = std::move(layer_ids);
    }

    std::sort(g.edges.begin(), g.edges.end(), [](const ElgEdge& a, const ElgEdge& b) {
        if (a.from != b.from) return a.from < b.from;
        return a.to < b.to;
    });
    return g;
}

// Every anchor-to-deepest-layer path with per-step motions computed
// sequentially: step 1 takes the agent heading as prior orientation, step k>1
// the direction of segment k-1. Deterministic lexicographic order by node ids.
inline std::vector<ElgPath> enumerate_paths(const Elg& g, const AgentPose& pose) {
    std::vector<std::vector<int>> adjacency(g.nodes.size());
    for (const auto& e : g.edges) adjacency[static_cast<size_t>(e.from)].push_back(e.to);

    std::vector<ElgPath> out;
    std::vector<int> ids;
    std::vector<geom::RelativeMotion> motions;

    struct Frame {
        int node;
        geom::UnitVector3 orientation;
    };

    const std::function<void(const Frame&)> walk = [&](const Frame& f) {
        const auto& node = g.nodes[static_cast<size_t>(f.node)];
        if (node.layer == g.layers) {
            out.push_back({ids, motions, false});
            return;
        }
        const auto& children = adjacency[static_cast<size_t>(f.node)];
        if (children.empty()) {
            if (node.layer > 0) out.push_back({ids, motions, true});
            return;
        }
        for (int child : children) {
            const auto& cnode = g.nodes[static_cast<size_t>(child)];
            ids.push_back(child);
            motions.push_back(geom::motion_from(f.orientation, node.position, cnode.position));
            walk({child, geom::heading_between(node.position, cnode.position)});
            ids.pop_back();
            motions.pop_back();
        }
    };

    walk({0, pose.heading});
    return out;
}

// Debug export for inspection and plotting.
inline nlohmann::ordered_json to_json(const Elg& g, const std::vector<ElgPath>& paths) {
    nlohmann::ordered_json j;
    auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) {
        nodes.push_back({{"id", n.node_id},
                         {"layer", n.layer},
                         {"landmark", n.landmark},
                         {"x", n.position.x},
                         {"y", n.position.y},
                         {"z", n.position.z}});
    }
    auto& edges = j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}});
    auto& jp = j["paths"] = nlohmann::ordered_json::array();
    for (const auto& p : paths) {
        nlohmann::ordered_json pj;
        pj["nodes"] = p.node_ids;
        pj["partial"] = p.partial;
        auto& steps = pj["steps"] = nlohmann::ordered_json::array();
        for (const auto& m : p.motions) {
            steps.push_back({{"theta_deg", m.theta_deg},
                             {"elevation_m", m.elevation_m},
                             {"elevation_sign", std::string(geom::to_string(m.elevation_sign))},
                             {"distance_m", m.distance_m}});
        }
        jp.push_back(std::move(pj));
    }
    return j;
}

}  // namespace lookaside::elg
