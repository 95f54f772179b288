#pragma once
// The lookaside navigation agent: prompt assembly for the three planning
// modes, the structured-reply grammar, a deterministic rule-based planner and
// an LLM-backed planner with retry-then-fallback.
//
// Decision flow per step mirrors the four-stage contract: observation
// description, navigation progress, direction-aware path planning, action
// reasoning. The rule-based planner fills the reasoning fields with
// deterministic summaries so the full pipeline runs offline.

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lookaside/elg.hpp"
#include "lookaside/geometry.hpp"
#include "lookaside/landmark_parser.hpp"
#include "lookaside/llm_backend.hpp"
#include "lookaside/prompts.hpp"
#include "lookaside/verbalizer.hpp"

namespace lookaside::agent {

// ---------------------------------------------------------------------------
// Actions and decisions

enum class ActionKind { forward, turn_left, turn_right, ascend, descend, stop };

inline constexpr double kTurnStepDeg = 15.0;
inline constexpr double kVerticalStepM = 2.0;
inline constexpr double kForwardStepM = 5.0;
inline constexpr double kTurnHysteresisDeg = 7.5;   // half the turn grid
inline constexpr double kVerticalThresholdM = 1.0;  // half the vertical grid
inline constexpr double kArriveRadiusM = 2.5;       // half the forward grid
inline constexpr int kMaxRepetitions = 24;          // safety cap per decision

inline std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::forward: return "forward";
        case ActionKind::turn_left: return "turn_left";
        case ActionKind::turn_right: return "turn_right";
        case ActionKind::ascend: return "ascend";
        case ActionKind::descend: return "descend";
        case ActionKind::stop: return "stop";
    }
    return "stop";
}

inline std::optional<ActionKind> action_kind_from_string(std::string_view raw) {
    std::string s = lowercase(trim(raw));
    for (char& c : s)
        if (c == ' ' || c == '-') c = '_';
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
    if (s == "forward" || s == "move_forward") return ActionKind::forward;
    if (s == "turn_left") return ActionKind::turn_left;
    if (s == "turn_right") return ActionKind::turn_right;
    if (s == "ascend") return ActionKind::ascend;
    if (s == "descend") return ActionKind::descend;
    if (s == "stop") return ActionKind::stop;
    return std::nullopt;
}

struct AgentAction {
    ActionKind kind = ActionKind::stop;
    int repetitions = 1;  // >= 1; stop is always 1

    void validate() const {
        if (repetitions < 1) throw Error("repetitions must be >= 1");
        if (kind == ActionKind::stop && repetitions != 1)
            throw Error("stop must have exactly one repetition");
    }

    friend bool operator==(const AgentAction&, const AgentAction&) = default;
};

struct AgentDecision {
    std::string observation_description;
    std::string navigation_progress;
    std::string path_reasoning;
    int selected_path_id = -1;  // -1 = no candidate path followed
    std::string action_reasoning;
    AgentAction action;
    std::string updated_history;
    std::optional<bool> follow_next;  // next-landmark mode replies only
    bool used_fallback = false;       // LLM reply rejected, rule-based answer used
};

// ---------------------------------------------------------------------------
// Observations and planning context

struct ObservationBundle {
    std::string front;
    std::string left;
    std::string right;
    std::string back;
    std::string top;
    std::string bottom;
};

struct NavContext {
    std::string instruction;
    std::string history;
    std::vector<std::string> visited_landmarks;
    std::optional<verbalizer::PathDescriptionSet> path_descriptions;
    std::optional<std::pair<std::string, geom::RelativeMotion>> next_landmark;
    ObservationBundle observation;
};

enum class PromptMode { with_elg, with_next_landmark, landmark_free };

inline PromptMode infer_prompt_mode(const NavContext& ctx) {
    if (ctx.path_descriptions && ctx.next_landmark)
        throw Error("context holds both candidate paths and a next landmark");
    if (ctx.path_descriptions) return PromptMode::with_elg;
    if (ctx.next_landmark) return PromptMode::with_next_landmark;
    return PromptMode::landmark_free;
}

inline std::string assemble_prompt(const NavContext& ctx, PromptMode mode) {
    if (mode != infer_prompt_mode(ctx)) throw Error("prompt mode does not match context contents");

    std::string text;
    switch (mode) {
        case PromptMode::with_elg: text = std::string(prompts::kWithElg); break;
        case PromptMode::with_next_landmark: text = std::string(prompts::kWithNextLandmark); break;
        case PromptMode::landmark_free: text = std::string(prompts::kLandmarkFree); break;
    }

    text = prompts::substitute(std::move(text), "INSTRUCTION", ctx.instruction);
    text = prompts::substitute(std::move(text), "HISTORY",
                               ctx.history.empty() ? "(none)" : ctx.history);
    std::string visited = "(none)";
    if (!ctx.visited_landmarks.empty()) {
        visited.clear();
        for (size_t i = 0; i < ctx.visited_landmarks.size(); ++i) {
            if (i > 0) visited += ", ";
            visited += ctx.visited_landmarks[i];
        }
    }
    text = prompts::substitute(std::move(text), "VISITED_LANDMARKS", visited);

    if (mode == PromptMode::with_elg) {
        std::string paths;
        for (const auto& d : ctx.path_descriptions->descriptions) {
            paths += "Path " + std::to_string(d.path_id) + ": " + d.text + "\n";
        }
        if (!paths.empty()) paths.pop_back();
        text = prompts::substitute(std::move(text), "CANDIDATE_PATHS",
                                   paths.empty() ? "(none)" : paths);
    } else if (mode == PromptMode::with_next_landmark) {
        const auto& [landmark, motion] = *ctx.next_landmark;
        text = prompts::substitute(std::move(text), "NEXT_LANDMARK",
                                   verbalizer::describe_step(motion, landmark, true));
    }

    text = prompts::substitute(std::move(text), "VIEW_FRONT", ctx.observation.front);
    text = prompts::substitute(std::move(text), "VIEW_BOTTOM", ctx.observation.bottom);
    text = prompts::substitute(std::move(text), "VIEW_LEFT", ctx.observation.left);
    text = prompts::substitute(std::move(text), "VIEW_RIGHT", ctx.observation.right);
    text = prompts::substitute(std::move(text), "VIEW_BACK", ctx.observation.back);
    text = prompts::substitute(std::move(text), "VIEW_TOP", ctx.observation.top);
    return text;
}

// ---------------------------------------------------------------------------
// Instruction cues

enum class VerticalCue { ascend, descend };

struct StepCue {
    std::optional<double> theta_deg;  // signed target deflection, + = left
    std::optional<VerticalCue> vertical;
    std::optional<std::string> landmark;
    bool stop = false;
};

inline constexpr double kCueDefaultTurnDeg = 90.0;
inline constexpr double kCueBackDeg = 180.0;
inline constexpr double kCueRejectAvgDeg = 90.0;  // worse than this on average -> no path

namespace detail {

inline std::vector<std::string> split_step_clauses(std::string_view instruction) {
    std::vector<std::string> clauses;
    std::string current;
    size_t i = 0;
    const std::string_view text = instruction;
    while (i < text.size()) {
        if (text.substr(i, 7) == ", then ") {
            clauses.push_back(current);
            current.clear();
            i += 7;
        } else if (text.substr(i, 6) == " then ") {
            clauses.push_back(current);
            current.clear();
            i += 6;
        } else if (text[i] == '.' || text[i] == ';') {
            clauses.push_back(current);
            current.clear();
            ++i;
        } else {
            current += text[i];
            ++i;
        }
    }
    if (!trim(current).empty()) clauses.push_back(current);
    std::vector<std::string> out;
    for (auto& c : clauses) {
        auto t = trim(c);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<std::string> words_of(std::string_view clause) {
    std::vector<std::string> words;
    std::string w;
    for (char c : clause) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!w.empty()) {
            words.push_back(std::move(w));
            w.clear();
        }
    }
    if (!w.empty()) words.push_back(std::move(w));
    return words;
}

inline bool is_plain_number(const std::string& w) {
    if (w.empty()) return false;
    for (char c : w)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

// One cue per step clause: turn direction and optional magnitude, vertical
// keywords, a stop keyword, and the clause's landmark if any.
inline std::vector<StepCue> parse_instruction_cues(std::string_view instruction) {
    std::vector<StepCue> cues;
    for (const auto& clause : detail::split_step_clauses(instruction)) {
        StepCue cue;
        const auto words = detail::words_of(clause);

        std::optional<double> magnitude;
        for (size_t i = 0; i + 1 < words.size(); ++i) {
            if (detail::is_plain_number(words[i]) &&
                (words[i + 1] == "degrees" || words[i + 1] == "degree")) {
                magnitude = std::stod(words[i]);
                break;
            }
        }

        for (size_t i = 0; i < words.size() && !cue.theta_deg; ++i) {
            const auto& w = words[i];
            const bool possessive = i > 0 && (words[i - 1] == "your" || words[i - 1] == "my");
            if (w == "left" && !possessive) {
                cue.theta_deg = magnitude.value_or(kCueDefaultTurnDeg);
            } else if (w == "right" && !possessive) {
                cue.theta_deg = -magnitude.value_or(kCueDefaultTurnDeg);
            } else if ((w == "back" || w == "around" || w == "u-turn") && i > 0 &&
                       (words[i - 1] == "turn" || words[i - 1] == "head")) {
                cue.theta_deg = kCueBackDeg;
            } else if (w == "straight" || w == "ahead") {
                cue.theta_deg = 0.0;
            }
        }

        for (const auto& w : words) {
            if (w == "ascend" || w == "climb" || w == "elevate" || w == "rise") {
                cue.vertical = VerticalCue::ascend;
                break;
            }
            if (w == "descend" || w == "land" || w == "lower") {
                cue.vertical = VerticalCue::descend;
                break;
            }
        }

        for (const auto& w : words) {
            if (w == "stop" || w == "halt" || w == "hover") {
                cue.stop = true;
                break;
            }
        }

        const auto landmarks = slkb::parse_landmarks(clause);
        if (!landmarks.empty()) cue.landmark = landmarks.front();
        cues.push_back(std::move(cue));
    }
    return cues;
}

// ---------------------------------------------------------------------------
// Rule-based path selection and action refinement

// Scores each path by mean angular mismatch against the cues, aligned step by
// step. A directional cue contributes the wrapped |theta_path - theta_cue|; a
// landmark-only cue contributes 0 on a match and 180 otherwise; cues beyond
// the path's end count as 180 (the path fails to cover them). Returns the
// argmin id (ties to the smaller id), or -1 when the best mean exceeds 90.
inline int rule_select_path(const std::vector<StepCue>& cues,
                            const verbalizer::PathDescriptionSet& paths) {
    if (paths.empty()) throw Error("no candidate paths");
    int best_id = -1;
    double best_avg = std::numeric_limits<double>::infinity();
    for (const auto& path : paths.descriptions) {
        double score = 0.0;
        int compared = 0;
        for (size_t k = 0; k < cues.size(); ++k) {
            const auto& cue = cues[k];
            if (k < path.steps.size()) {
                if (cue.theta_deg) {
                    score += std::abs(wrap_deg(path.steps[k].motion.theta_deg - *cue.theta_deg));
                    ++compared;
                } else if (cue.landmark) {
                    score += lowercase(path.steps[k].landmark) == lowercase(*cue.landmark) ? 0.0 : 180.0;
                    ++compared;
                }
            } else if (cue.theta_deg || cue.landmark) {
                score += 180.0;
                ++compared;
            }
        }
        const double avg = compared > 0 ? score / compared : 0.0;
        if (avg < best_avg) {
            best_avg = avg;
            best_id = path.path_id;
        }
    }
    if (best_avg > kCueRejectAvgDeg) return -1;
    return best_id;
}

// Egocentric motion toward a target; tolerant of targets straight above or at
// the current position (no bearing defined there, so theta is 0).
inline geom::RelativeMotion approach_motion(const elg::AgentPose& pose, const geom::WorldPoint& target) {
    geom::RelativeMotion m;
    m.distance_m = geom::distance_xy(pose.position, target);
    const double dz = target.z - pose.position.z;
    m.elevation_m = std::abs(dz);
    m.elevation_sign = m.elevation_m < geom::kLevelThresholdM
                           ? geom::ElevationSign::level
                           : (dz > 0.0 ? geom::ElevationSign::ascend : geom::ElevationSign::descend);
    if (m.distance_m > geom::kDegenerateDistanceM) {
        m.theta_deg = geom::horizontal_angle(pose.heading, geom::heading_between(pose.position, target));
    }
    return m;
}

inline int clamp_reps(long reps) {
    return static_cast<int>(std::clamp(reps, 1L, static_cast<long>(kMaxRepetitions)));
}

// Greedy controller quantized to the action grid: fix bearing first, then
// altitude, then close horizontal distance, then stop. Two boundary guards
// keep the iteration from orbiting the target forever: a vertical move must
// strictly shrink the altitude error (an exactly-odd offset can never get
// below the 1 m threshold on a 2 m grid), and the last 5 m hop must be able
// to land inside the arrival radius given the residual bearing error --
// otherwise the pose already is as close as the grid permits (< 2.55 m).
inline AgentAction quantize_motion(const geom::RelativeMotion& m) {
    const bool level_enough =
        m.elevation_sign == geom::ElevationSign::level || m.elevation_m < kVerticalThresholdM;
    if (m.distance_m < kArriveRadiusM && level_enough) return {ActionKind::stop, 1};
    if (std::abs(m.theta_deg) >= kTurnHysteresisDeg) {
        const long reps = std::lround(std::abs(m.theta_deg) / kTurnStepDeg);
        return {m.theta_deg > 0.0 ? ActionKind::turn_left : ActionKind::turn_right, clamp_reps(reps)};
    }
    if (m.elevation_sign != geom::ElevationSign::level && m.elevation_m >= kVerticalThresholdM) {
        const int reps = clamp_reps(std::lround(m.elevation_m / kVerticalStepM));
        const double residual = std::abs(m.elevation_m - kVerticalStepM * reps);
        if (residual < m.elevation_m - 1e-12) {
            return {m.elevation_sign == geom::ElevationSign::ascend ? ActionKind::ascend
                                                                    : ActionKind::descend,
                    reps};
        }
    }
    if (m.distance_m >= kArriveRadiusM) {
        if (m.distance_m < kForwardStepM) {
            const double after = std::sqrt(
                m.distance_m * m.distance_m + kForwardStepM * kForwardStepM -
                2.0 * kForwardStepM * m.distance_m * std::cos(deg_to_rad(m.theta_deg)));
            if (after >= kArriveRadiusM) return {ActionKind::stop, 1};
        }
        const long reps = static_cast<long>(std::floor(m.distance_m / kForwardStepM));
        return {ActionKind::forward, clamp_reps(reps)};
    }
    return {ActionKind::stop, 1};
}

inline AgentAction refine_action(const geom::WorldPoint& target, const elg::AgentPose& pose) {
    return quantize_motion(approach_motion(pose, target));
}

// Cue-table action for landmark-free planning and for the -1 path fallback.
inline AgentAction action_from_cues(const std::vector<StepCue>& cues) {
    for (const auto& cue : cues) {
        if (cue.stop) return {ActionKind::stop, 1};
        if (cue.vertical) {
            return {*cue.vertical == VerticalCue::ascend ? ActionKind::ascend : ActionKind::descend, 1};
        }
        if (cue.theta_deg && std::abs(*cue.theta_deg) >= kTurnHysteresisDeg) {
            const long reps = std::lround(std::abs(*cue.theta_deg) / kTurnStepDeg);
            return {*cue.theta_deg > 0.0 ? ActionKind::turn_left : ActionKind::turn_right,
                    clamp_reps(reps)};
        }
        if (cue.theta_deg) return {ActionKind::forward, 1};
    }
    return {ActionKind::forward, 1};
}

// ---------------------------------------------------------------------------
// Structured replies

struct ParseError : Error {
    using Error::Error;
};

namespace detail {

inline const std::vector<std::string>& reply_labels() {
    static const std::vector<std::string> labels = {
        "Observation Description",
        "Navigation Progress",
        "Reasoning for Path Selection",
        "Reasoning for Landmark to Follow",
        "Whether to Follow the Next Landmark",
        "Selected Path ID",
        "Action Reasoning",
        "Action",
        "Calculation for Number of Executions",
        "Number of Executions",
        "Updated History",
    };
    return labels;
}

inline std::string strip_reply_decoration(std::string_view line) {
    std::string s = trim(line);
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '#')) {
        s.erase(s.begin());
        s = trim(s);
    }
    // Markdown bold around the label.
    size_t pos = 0;
    while ((pos = s.find("**")) != std::string::npos) s.erase(pos, 2);
    return s;
}

inline std::optional<long> first_integer(std::string_view s) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i])) ||
            (s[i] == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            size_t end = i + 1;
            while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
            return std::stol(std::string(s.substr(i, end - i)));
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Extracts the labeled fields of a structured reply (see docs/reply_format.md)
// and validates the action. Missing mandatory fields, an unknown action kind
// or a non-positive execution count raise ParseError.
inline AgentDecision parse_decision(std::string_view reply) {
    std::map<std::string, std::string> fields;
    std::string current_label;
    std::istringstream in{std::string(reply)};
    std::string line;
    while (std::getline(in, line)) {
        const std::string stripped = detail::strip_reply_decoration(line);
        bool matched = false;
        for (const auto& label : detail::reply_labels()) {
            if (stripped.size() > label.size() && stripped.rfind(label, 0) == 0 &&
                stripped[label.size()] == ':') {
                current_label = label;
                fields[label] = trim(stripped.substr(label.size() + 1));
                matched = true;
                break;
            }
        }
        if (!matched && !current_label.empty() && !trim(line).empty()) {
            auto& value = fields[current_label];
            if (!value.empty()) value += ' ';
            value += trim(line);
        }
    }

    std::vector<std::string> missing;
    if (!fields.count("Action")) missing.push_back("Action");
    if (!fields.count("Number of Executions")) missing.push_back("Number of Executions");
    if (!missing.empty()) {
        std::string msg = "reply missing mandatory fields:";
        for (const auto& m : missing) msg += " " + m;
        throw ParseError(msg);
    }

    AgentDecision d;
    d.observation_description = fields["Observation Description"];
    d.navigation_progress = fields["Navigation Progress"];
    if (fields.count("Reasoning for Path Selection"))
        d.path_reasoning = fields["Reasoning for Path Selection"];
    else if (fields.count("Reasoning for Landmark to Follow"))
        d.path_reasoning = fields["Reasoning for Landmark to Follow"];
    d.action_reasoning = fields["Action Reasoning"];
    d.updated_history = fields["Updated History"];

    if (fields.count("Selected Path ID")) {
        const auto id = detail::first_integer(fields["Selected Path ID"]);
        if (!id) throw ParseError("Selected Path ID is not an integer");
        d.selected_path_id = static_cast<int>(*id);
    }
    if (fields.count("Whether to Follow the Next Landmark")) {
        const std::string v = lowercase(fields["Whether to Follow the Next Landmark"]);
        d.follow_next = v.find("not") == std::string::npos;
    }

    const auto kind = action_kind_from_string(fields["Action"]);
    if (!kind) throw ParseError("invalid action kind: " + fields["Action"]);
    const auto reps = detail::first_integer(fields["Number of Executions"]);
    if (!reps) throw ParseError("Number of Executions is not an integer");
    if (*reps < 1) throw ParseError("repetitions must be >= 1");
    d.action.kind = *kind;
    d.action.repetitions = *kind == ActionKind::stop
                               ? 1
                               : static_cast<int>(std::min<long>(*reps, kMaxRepetitions));
    return d;
}

// Canonical renderer for the structured-reply grammar; parse_decision is its
// inverse for decisions whose text fields are single-line.
inline std::string render_decision(const AgentDecision& d) {
    std::string out;
    out += "Observation Description: " + d.observation_description + "\n";
    out += "Navigation Progress: " + d.navigation_progress + "\n";
    out += "Reasoning for Path Selection: " + d.path_reasoning + "\n";
    out += "Selected Path ID: " + std::to_string(d.selected_path_id) + "\n";
    out += "Action Reasoning: " + d.action_reasoning + "\n";
    out += "Action: " + std::string(to_string(d.action.kind)) + "\n";
    out += "Number of Executions: " + std::to_string(d.action.repetitions) + "\n";
    out += "Updated History: " + d.updated_history + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Planners

class Planner {
public:
    virtual ~Planner() = default;
    virtual AgentDecision plan(const NavContext& ctx) = 0;
};

inline AgentDecision plan_step(Planner& planner, const NavContext& ctx) {
    return planner.plan(ctx);
}

namespace detail {

inline std::string summarize_views(const ObservationBundle& o) {
    auto part = [](std::string_view name, const std::string& text) {
        return std::string(name) + ": " + (text.empty() ? "nothing notable" : text);
    };
    return part("front", o.front) + "; " + part("left", o.left) + "; " + part("right", o.right) +
           "; " + part("back", o.back) + "; " + part("top", o.top) + "; " + part("bottom", o.bottom);
}

inline std::string describe_action(const AgentAction& a) {
    return std::string(to_string(a.kind)) + " x" + std::to_string(a.repetitions);
}

}  // namespace detail

// Deterministic reference planner: selects a path by cue matching, refines the
// next action from the selected step's egocentric motion, and falls back to
// the instruction cue table when nothing matches.
class RuleBasedPlanner final : public Planner {
public:
    AgentDecision plan(const NavContext& ctx) override {
        AgentDecision d;
        d.observation_description = detail::summarize_views(ctx.observation);

        const auto cues = parse_instruction_cues(ctx.instruction);
        const size_t visited = ctx.visited_landmarks.size();
        std::vector<StepCue> pending(cues.begin() + static_cast<long>(std::min(visited, cues.size())),
                                     cues.end());

        d.navigation_progress = "Visited " + std::to_string(visited) + " of " +
                                std::to_string(cues.size()) + " instruction steps.";

        const PromptMode mode = infer_prompt_mode(ctx);
        if (mode == PromptMode::with_elg) {
            const auto& paths = *ctx.path_descriptions;
            // Score only the instruction snippet the graph can express: cues
            // past the lookahead horizon are not a fault of any path.
            size_t horizon = 0;
            for (const auto& p : paths.descriptions) horizon = std::max(horizon, p.steps.size());
            if (pending.size() > horizon) pending.resize(horizon);
            d.selected_path_id = rule_select_path(pending, paths);
            if (d.selected_path_id >= 0) {
                const auto& path = paths.descriptions[static_cast<size_t>(d.selected_path_id)];
                d.path_reasoning = "Path " + std::to_string(d.selected_path_id) +
                                   " best matches the pending instruction cues.";
                d.action = quantize_motion(path.steps.front().motion);
                d.action_reasoning = "Toward " + path.steps.front().landmark + ": " +
                                     detail::describe_action(d.action) + ".";
            } else {
                d.path_reasoning = "No candidate path matches the pending cues; acting on the instruction.";
                d.action = action_from_cues(pending);
                d.action_reasoning = "Instruction cue table chose " + detail::describe_action(d.action) + ".";
            }
        } else if (mode == PromptMode::with_next_landmark) {
            const auto& [landmark, motion] = *ctx.next_landmark;
            d.follow_next = true;
            d.path_reasoning = "Following the next landmark " + landmark + ".";
            d.action = quantize_motion(motion);
            d.action_reasoning = "Toward " + landmark + ": " + detail::describe_action(d.action) + ".";
        } else {
            d.path_reasoning = "No landmark information available; acting on the instruction alone.";
            d.action = action_from_cues(pending);
            d.action_reasoning = "Instruction cue table chose " + detail::describe_action(d.action) + ".";
        }

        d.updated_history = ctx.history;
        if (!d.updated_history.empty()) d.updated_history += ' ';
        d.updated_history += "Executed " + detail::describe_action(d.action) + ".";
        d.action.validate();
        return d;
    }
};

// LLM-backed planner: assemble prompt, complete, parse; one retry on a
// malformed reply, then the rule-based planner answers and the decision is
// flagged. Transport failures propagate to the caller.
class LlmPlanner final : public Planner {
public:
    explicit LlmPlanner(TextCompletionBackend& backend) : backend_(backend) {}

    AgentDecision plan(const NavContext& ctx) override {
        const std::string prompt = assemble_prompt(ctx, infer_prompt_mode(ctx));
        for (int attempt = 0; attempt < 2; ++attempt) {
            const std::string reply = backend_.complete(prompt);
            try {
                AgentDecision d = parse_decision(reply);
                if (ctx.path_descriptions && d.selected_path_id >= 0 &&
                    static_cast<size_t>(d.selected_path_id) >= ctx.path_descriptions->size()) {
                    throw ParseError("Selected Path ID out of range");
                }
                return d;
            } catch (const ParseError&) {
                if (attempt == 1) break;
            }
        }
        AgentDecision d = fallback_.plan(ctx);
        d.used_fallback = true;
        return d;
    }

private:
    TextCompletionBackend& backend_;
    RuleBasedPlanner fallback_;
};

// LLM-backed landmark parser assembling the parser prompt and reading the
// JSON-list reply. Falls back to the grammar parser on malformed replies.
class LlmLandmarkParser final : public slkb::LandmarkParser {
public:
    explicit LlmLandmarkParser(TextCompletionBackend& backend) : backend_(backend) {}

    std::vector<std::string> parse(std::string_view instruction) const override {
        const std::string prompt = prompts::assemble_landmark_parser_prompt(instruction);
        const std::string reply = backend_.complete(prompt);
        const size_t open = reply.find('[');
        const size_t close = reply.rfind(']');
        if (open != std::string::npos && close != std::string::npos && close > open) {
            try {
                const auto j = nlohmann::json::parse(reply.substr(open, close - open + 1));
                std::vector<std::string> out;
                for (const auto& item : j) {
                    const std::string s = trim(item.get<std::string>());
                    if (!s.empty()) out.push_back(s);
                }
                return out;
            } catch (const nlohmann::json::exception&) {
                // fall through to the grammar parser
            }
        }
        return fallback_.parse(instruction);
    }

private:
    TextCompletionBackend& backend_;
    slkb::GrammarLandmarkParser fallback_;
};

}  // namespace lookaside::agent
