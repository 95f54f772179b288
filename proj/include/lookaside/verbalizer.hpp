#pragma once
// Renders ELG paths as instruction-like, direction-aware text. The first step
// of a path uses the detailed template, later steps the coarse one:
//
//   "Turn left/right {t} degrees, move forward {d} meters and ascend/descend
//    {e} meters to reach {landmark}."
//   "Turn left/right {t} degrees and move toward the {landmark}."
//
// Numbers are rounded to the nearest integer; a sub-half-degree turn drops the
// turn clause, a level (or sub-meter-rounded) elevation drops the vertical
// clause, and a landmark that already starts with "the" keeps a single article.

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lookaside/elg.hpp"
#include "lookaside/geometry.hpp"

namespace lookaside::verbalizer {

struct Step {
    std::string landmark;
    geom::RelativeMotion motion;
};

struct PathDescription {
    int path_id = 0;
    std::string text;
    std::vector<Step> steps;
    bool partial = false;
};

struct PathDescriptionSet {
    std::vector<PathDescription> descriptions;

    bool empty() const { return descriptions.empty(); }
    size_t size() const { return descriptions.size(); }
};

namespace detail {

inline bool starts_with_article(std::string_view landmark) {
    return landmark.size() >= 4 && (landmark.substr(0, 4) == "the " || landmark.substr(0, 4) == "The ");
}

}  // namespace detail

inline std::string describe_step(const geom::RelativeMotion& motion, std::string_view landmark,
                                 bool detailed) {
    const long turn = std::lround(std::abs(motion.theta_deg));
    const long dist = std::lround(motion.distance_m);
    const long elev = std::lround(motion.elevation_m);
    const bool has_turn = turn >= 1;
    const bool has_elev = motion.elevation_sign != geom::ElevationSign::level && elev >= 1;
    const char* dir = motion.theta_deg > 0.0 ? "left" : "right";

    std::string text;
    if (detailed) {
        if (has_turn) {
            text = "Turn " + std::string(dir) + " " + std::to_string(turn) +
                   " degrees, move forward " + std::to_string(dist) + " meters";
        } else {
            text = "Move forward " + std::to_string(dist) + " meters";
        }
        if (has_elev) {
            text += " and ";
            text += motion.elevation_sign == geom::ElevationSign::ascend ? "ascend" : "descend";
            text += " " + std::to_string(elev) + " meters";
        }
        text += " to reach " + std::string(landmark) + ".";
    } else {
        const std::string article = detail::starts_with_article(landmark) ? "" : "the ";
        if (has_turn) {
            text = "Turn " + std::string(dir) + " " + std::to_string(turn) +
                   " degrees and move toward " + article + std::string(landmark) + ".";
        } else {
            text = "Move toward " + article + std::string(landmark) + ".";
        }
    }
    return text;
}

// Joins per-step fragments with ", then ", lowercasing the first letter of
// every fragment after the first. Shared by path descriptions and the
// synthetic instruction generator so the two stay parse-compatible.
inline std::string describe_steps(const std::vector<Step>& steps) {
    std::string text;
    for (size_t i = 0; i < steps.size(); ++i) {
        std::string fragment = describe_step(steps[i].motion, steps[i].landmark, i == 0);
        if (!fragment.empty() && fragment.back() == '.') fragment.pop_back();
        if (i == 0) {
            text = fragment;
        } else {
            fragment[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(fragment[0])));
            text += ", then " + fragment;
        }
    }
    if (!text.empty()) text += ".";
    return text;
}

inline PathDescriptionSet describe_paths(const std::vector<elg::ElgPath>& paths,
                                         const std::vector<std::string>& layer_landmarks) {
    PathDescriptionSet set;
    set.descriptions.reserve(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        PathDescription d;
        d.path_id = static_cast<int>(i);
        d.partial = paths[i].partial;
        if (paths[i].motions.size() > layer_landmarks.size())
            throw Error("path longer than landmark layer list");
        for (size_t k = 0; k < paths[i].motions.size(); ++k) {
            d.steps.push_back({layer_landmarks[k], paths[i].motions[k]});
        }
        d.text = describe_steps(d.steps);
        set.descriptions.push_back(std::move(d));
    }
    return set;
}

// Companion cue parser: exact inverse of describe_steps on generated text.
struct ParsedStep {
    int turn_deg = 0;                 // signed rounded magnitude, + = left, 0 = no turn clause
    std::optional<int> forward_m;     // detailed steps only
    std::optional<int> elevation_m;   // present when the vertical clause was rendered
    geom::ElevationSign elevation_sign = geom::ElevationSign::level;
    std::string landmark;
    bool detailed = false;
};

namespace detail {

inline bool consume(std::string_view& s, std::string_view prefix) {
    if (s.substr(0, prefix.size()) == prefix) {
        s.remove_prefix(prefix.size());
        return true;
    }
    return false;
}

inline bool consume_ci_first(std::string_view& s, std::string_view prefix) {
    // Case-insensitive on the first character only: fragments after a join
    // start lowercase.
    if (s.empty() || prefix.empty()) return false;
    if (std::tolower(static_cast<unsigned char>(s[0])) !=
        std::tolower(static_cast<unsigned char>(prefix[0])))
        return false;
    if (s.substr(1, prefix.size() - 1) != prefix.substr(1)) return false;
    s.remove_prefix(prefix.size());
    return true;
}

inline std::optional<long> consume_integer(std::string_view& s) {
    size_t n = 0;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
    if (n == 0) return std::nullopt;
    const long value = std::stol(std::string(s.substr(0, n)));
    s.remove_prefix(n);
    return value;
}

inline ParsedStep parse_fragment(std::string_view frag, bool detailed) {
    ParsedStep step;
    step.detailed = detailed;
    std::string_view s = frag;

    int sign = 0;
    std::optional<long> turn;
    if (consume_ci_first(s, "Turn ")) {
        if (consume(s, "left ")) sign = 1;
        else if (consume(s, "right ")) sign = -1;
        else throw Error("unparsable turn direction: " + std::string(frag));
        turn = consume_integer(s);
        if (!turn || !consume(s, " degrees")) throw Error("unparsable turn clause: " + std::string(frag));
        if (!consume(s, detailed ? ", " : " and ")) throw Error("unparsable step joiner: " + std::string(frag));
        step.turn_deg = sign * static_cast<int>(*turn);
    }

    if (detailed) {
        if (!consume_ci_first(s, "Move forward ")) throw Error("missing forward clause: " + std::string(frag));
        const auto dist = consume_integer(s);
        if (!dist || !consume(s, " meters")) throw Error("unparsable forward clause: " + std::string(frag));
        step.forward_m = static_cast<int>(*dist);
        bool has_vertical = false;
        bool ascend = false;
        if (consume(s, " and ascend ")) {
            has_vertical = true;
            ascend = true;
        } else if (consume(s, " and descend ")) {
            has_vertical = true;
        }
        if (has_vertical) {
            const auto elev = consume_integer(s);
            if (!elev || !consume(s, " meters")) throw Error("unparsable vertical clause: " + std::string(frag));
            step.elevation_m = static_cast<int>(*elev);
            step.elevation_sign = ascend ? geom::ElevationSign::ascend : geom::ElevationSign::descend;
        }
        if (!consume(s, " to reach ")) throw Error("missing reach clause: " + std::string(frag));
        step.landmark = std::string(s);
    } else {
        if (!consume_ci_first(s, "Move toward ")) throw Error("missing toward clause: " + std::string(frag));
        consume(s, "the ");
        step.landmark = std::string(s);
    }
    if (!step.landmark.empty() && step.landmark.back() == '.') step.landmark.pop_back();
    if (step.landmark.empty()) throw Error("empty landmark in fragment: " + std::string(frag));
    return step;
}

}  // namespace detail

inline std::vector<ParsedStep> parse_path_description(std::string_view text) {
    std::vector<ParsedStep> steps;
    size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        const size_t next = text.find(", then ", pos);
        std::string_view frag = next == std::string_view::npos
                                    ? text.substr(pos)
                                    : text.substr(pos, next - pos);
        steps.push_back(detail::parse_fragment(frag, first));
        first = false;
        if (next == std::string_view::npos) break;
        pos = next + 7;
    }
    return steps;
}

}  // namespace lookaside::verbalizer
