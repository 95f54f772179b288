#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "lookaside/agent.hpp"
#include "lookaside/http_backend.hpp"

using namespace lookaside;
using namespace lookaside::agent;

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

verbalizer::PathDescriptionSet example_paths() {
    std::vector<elg::ElgPath> paths(2);
    paths[0].node_ids = {1, 4};
    paths[0].motions = {{30.0, 4.0, geom::ElevationSign::descend, 10.0},
                        {-45.0, 0.0, geom::ElevationSign::level, 25.0}};
    paths[1].node_ids = {2, 5};
    paths[1].motions = {{170.0, 0.0, geom::ElevationSign::level, 60.0},
                        {10.0, 2.0, geom::ElevationSign::ascend, 40.0}};
    return verbalizer::describe_paths(paths, {"the intersection", "the bridge"});
}

NavContext example_context() {
    NavContext ctx;
    ctx.instruction =
        "Turn left 30 degrees, move forward 10 meters and descend 4 meters to reach the "
        "intersection, then turn right 45 degrees and move toward the bridge.";
    ctx.history = "Took off and climbed to cruise altitude.";
    ctx.visited_landmarks = {};
    ctx.observation = {"gray metal tower at 45 m, level",
                       "nothing notable",
                       "blue bridge at 80 m, 3 m below",
                       "nothing notable",
                       "nothing notable",
                       "red-roofed circular building at 22 m, 20 m below"};
    return ctx;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string valid_reply(const std::string& action = "turn_left", const std::string& execs = "6") {
    return "Observation Description: A tower ahead.\n"
           "Navigation Progress: Just started.\n"
           "Reasoning for Path Selection: Path 0 matches the left turn.\n"
           "Selected Path ID: 0\n"
           "Action Reasoning: Turn toward the intersection.\n"
           "Action: " + action + "\n"
           "Calculation for Number of Executions: 15 x " + execs + " degrees.\n"
           "Number of Executions: " + execs + "\n"
           "Updated History: Turned toward the intersection.\n";
}

// Scripted backend: returns queued replies in order.
class MockBackend final : public TextCompletionBackend {
public:
    explicit MockBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(const std::string& prompt) override {
        prompts.push_back(prompt);
        if (calls >= replies_.size()) return replies_.back();
        return replies_[calls++];
    }

    std::vector<std::string> prompts;
    size_t calls = 0;

private:
    std::vector<std::string> replies_;
};

}  // namespace

TEST_CASE("assemble_prompt: with_elg carries every path description exactly once") {
    NavContext ctx = example_context();
    ctx.path_descriptions = example_paths();
    const std::string prompt = assemble_prompt(ctx, PromptMode::with_elg);

    CHECK(prompt.find("Candidate Paths") != std::string::npos);
    CHECK(prompt.find("The Next Landmark") == std::string::npos);
    for (const auto& d : ctx.path_descriptions->descriptions) {
        // Count the labeled path lines: the raw text may legitimately also
        // appear as the instruction being followed.
        CHECK(count_occurrences(prompt, "Path " + std::to_string(d.path_id) + ": " + d.text) == 1);
    }
    for (const char* view : {"Front View:", "Bird's-eye View:", "Left View:", "Right View:",
                             "Back View:", "Upward View:"}) {
        CHECK(prompt.find(view) != std::string::npos);
    }
    CHECK(prompt.find(ctx.instruction) != std::string::npos);
}

TEST_CASE("assemble_prompt: path texts appear verbatim exactly once") {
    NavContext ctx = example_context();
    ctx.instruction = "Head to the intersection, then on to the bridge.";
    ctx.path_descriptions = example_paths();
    const std::string prompt = assemble_prompt(ctx, PromptMode::with_elg);
    for (const auto& d : ctx.path_descriptions->descriptions) {
        CHECK(count_occurrences(prompt, d.text) == 1);
    }
}

TEST_CASE("assemble_prompt: with_next_landmark swaps the section") {
    NavContext ctx = example_context();
    ctx.next_landmark = {"the intersection",
                         geom::RelativeMotion{30.0, 4.0, geom::ElevationSign::descend, 10.0}};
    const std::string prompt = assemble_prompt(ctx, PromptMode::with_next_landmark);
    CHECK(prompt.find("The Next Landmark") != std::string::npos);
    CHECK(prompt.find("Candidate Paths") == std::string::npos);
    CHECK(prompt.find("Whether to Follow the Next Landmark") != std::string::npos);
}

TEST_CASE("assemble_prompt: landmark_free excludes paths and landmark locations") {
    NavContext ctx = example_context();
    const std::string prompt = assemble_prompt(ctx, PromptMode::landmark_free);
    CHECK(prompt.find("Candidate Paths") == std::string::npos);
    CHECK(prompt.find("The Next Landmark") == std::string::npos);
    CHECK(prompt.find("Visited Landmark") == std::string::npos);
}

TEST_CASE("assemble_prompt: golden files") {
    const fs::path golden_dir = LOOKASIDE_GOLDEN_DIR;

    NavContext with_elg_ctx = example_context();
    with_elg_ctx.path_descriptions = example_paths();
    CHECK(assemble_prompt(with_elg_ctx, PromptMode::with_elg) ==
          read_file(golden_dir / "prompt_with_elg.golden"));

    NavContext next_ctx = example_context();
    next_ctx.next_landmark = {"the intersection",
                              geom::RelativeMotion{30.0, 4.0, geom::ElevationSign::descend, 10.0}};
    CHECK(assemble_prompt(next_ctx, PromptMode::with_next_landmark) ==
          read_file(golden_dir / "prompt_with_next_landmark.golden"));

    CHECK(assemble_prompt(example_context(), PromptMode::landmark_free) ==
          read_file(golden_dir / "prompt_landmark_free.golden"));
}

TEST_CASE("assemble_prompt: mode/context mismatch is an error") {
    NavContext ctx = example_context();
    CHECK_THROWS_AS(assemble_prompt(ctx, PromptMode::with_elg), Error);
    ctx.path_descriptions = example_paths();
    CHECK_THROWS_AS(assemble_prompt(ctx, PromptMode::landmark_free), Error);
    ctx.next_landmark = {"x", geom::RelativeMotion{}};
    CHECK_THROWS_AS(infer_prompt_mode(ctx), Error);
}

TEST_CASE("prompt templates: embedded text matches the versioned resource files") {
    const fs::path repo = LOOKASIDE_REPO_DIR;
    const fs::path dir = repo / "resources" / "prompts";
    CHECK(read_file(dir / "with_elg_v1.txt") == std::string(prompts::kWithElg));
    CHECK(read_file(dir / "with_next_landmark_v1.txt") == std::string(prompts::kWithNextLandmark));
    CHECK(read_file(dir / "landmark_free_v1.txt") == std::string(prompts::kLandmarkFree));
    CHECK(read_file(dir / "landmark_parser_v1.txt") == std::string(prompts::kLandmarkParser));
    CHECK(read_file(dir / "landmark_recognizer_v1.txt") == std::string(prompts::kLandmarkRecognizer));
}

TEST_CASE("parse_instruction_cues: turn, magnitude, vertical and landmark per clause") {
    const auto cues = parse_instruction_cues(
        "Turn left 30 degrees, move forward 10 meters and descend 4 meters to reach the "
        "intersection, then turn right 45 degrees and move toward the bridge.");
    REQUIRE(cues.size() == 2);
    REQUIRE(cues[0].theta_deg.has_value());
    CHECK(*cues[0].theta_deg == doctest::Approx(30.0));
    CHECK(cues[0].vertical.has_value());
    REQUIRE(cues[1].theta_deg.has_value());
    CHECK(*cues[1].theta_deg == doctest::Approx(-45.0));

    const auto back = parse_instruction_cues("Turn back and fly straight.");
    REQUIRE_FALSE(back.empty());
    REQUIRE(back[0].theta_deg.has_value());
    CHECK(*back[0].theta_deg == doctest::Approx(180.0));

    const auto bare = parse_instruction_cues("Keep to your right along the canal.");
    REQUIRE_FALSE(bare.empty());
    CHECK_FALSE(bare[0].theta_deg.has_value());  // "your right" is not a turn
}

TEST_CASE("rule_select_path: turn-back picks the large-angle path") {
    std::vector<elg::ElgPath> raw(2);
    raw[0].node_ids = {1};
    raw[0].motions = {{30.0, 0.0, geom::ElevationSign::level, 50.0}};
    raw[1].node_ids = {2};
    raw[1].motions = {{170.0, 0.0, geom::ElevationSign::level, 50.0}};
    const auto paths = verbalizer::describe_paths(raw, {"silo"});

    const auto cues = parse_instruction_cues("Turn back toward the silo.");
    CHECK(rule_select_path(cues, paths) == 1);
}

TEST_CASE("rule_select_path: straight beats a quarter turn at exact match") {
    std::vector<elg::ElgPath> raw(2);
    raw[0].node_ids = {1};
    raw[0].motions = {{0.0, 0.0, geom::ElevationSign::level, 50.0}};
    raw[1].node_ids = {2};
    raw[1].motions = {{90.0, 0.0, geom::ElevationSign::level, 50.0}};
    const auto paths = verbalizer::describe_paths(raw, {"silo"});
    const auto cues = parse_instruction_cues("Fly straight to the silo.");
    CHECK(rule_select_path(cues, paths) == 0);
}

TEST_CASE("rule_select_path: landmark coverage decides when no direction cue exists") {
    // Path 0 is truncated before reaching the bridge; path 1 covers it.
    verbalizer::PathDescriptionSet paths;
    verbalizer::PathDescription p0;
    p0.path_id = 0;
    p0.steps = {{"silo", {0.0, 0.0, geom::ElevationSign::level, 50.0}}};
    p0.partial = true;
    p0.text = "Move forward 50 meters to reach silo.";
    verbalizer::PathDescription p1;
    p1.path_id = 1;
    p1.steps = {{"silo", {0.0, 0.0, geom::ElevationSign::level, 50.0}},
                {"bridge", {0.0, 0.0, geom::ElevationSign::level, 50.0}}};
    p1.text = "Move forward 50 meters to reach silo, then move toward the bridge.";
    paths.descriptions = {p0, p1};

    std::vector<StepCue> cues(2);
    cues[0].landmark = "silo";
    cues[1].landmark = "bridge";

    // Exhaustive score check: p0 = (0 + 180)/2 = 90, p1 = 0.
    CHECK(rule_select_path(cues, paths) == 1);

    // With no cues at all the smallest id wins.
    CHECK(rule_select_path({}, paths) == 0);
}

TEST_CASE("rule_select_path: returns -1 past the rejection threshold") {
    std::vector<elg::ElgPath> raw(1);
    raw[0].node_ids = {1};
    raw[0].motions = {{-170.0, 0.0, geom::ElevationSign::level, 50.0}};
    const auto paths = verbalizer::describe_paths(raw, {"silo"});
    std::vector<StepCue> cues(1);
    cues[0].theta_deg = 0.0;  // mismatch 170 > 90
    CHECK(rule_select_path(cues, paths) == -1);
    CHECK_THROWS_AS(rule_select_path(cues, verbalizer::PathDescriptionSet{}), Error);
}

TEST_CASE("refine_action: grid quantization examples") {
    elg::AgentPose pose{{0, 0, 10}, {1, 0, 0}};

    // 90 degrees left, 40 m away.
    CHECK(refine_action({0, 40, 10}, pose) == AgentAction{ActionKind::turn_left, 6});
    // Dead ahead, level, 23 m.
    CHECK(refine_action({23, 0, 10}, pose) == AgentAction{ActionKind::forward, 4});
    // Within 2.5 m horizontally and 1 m vertically.
    CHECK(refine_action({1.0, 1.0, 10.5}, pose) == AgentAction{ActionKind::stop, 1});
    // Altitude comes after bearing, before forward motion.
    CHECK(refine_action({10, 0, 18}, pose) == AgentAction{ActionKind::ascend, 4});
    CHECK(refine_action({10, 0, 2}, pose) == AgentAction{ActionKind::descend, 4});
    // Straight above: no bearing, climb.
    CHECK(refine_action({0, 0, 30}, pose) == AgentAction{ActionKind::ascend, 10});
}

TEST_CASE("refine_action: repetitions are capped") {
    elg::AgentPose pose{{0, 0, 10}, {1, 0, 0}};
    CHECK(refine_action({500, 0, 10}, pose) == AgentAction{ActionKind::forward, 24});
}

TEST_CASE("refine_action: iterating reaches the stop condition") {
    std::mt19937_64 rng(59);
    for (int it = 0; it < 200; ++it) {
        elg::AgentPose pose{{uniform_in(rng, -200, 200), uniform_in(rng, -200, 200),
                             uniform_in(rng, 0, 40)},
                            geom::heading_from_yaw_deg(uniform_in(rng, -180, 180))};
        const geom::WorldPoint target{uniform_in(rng, -200, 200), uniform_in(rng, -200, 200),
                                      uniform_in(rng, 0, 40)};
        int steps = 0;
        while (steps < 200) {
            const AgentAction a = refine_action(target, pose);
            if (a.kind == ActionKind::stop) break;
            // Mirror the simulator's action application.
            switch (a.kind) {
                case ActionKind::forward: {
                    pose.position.x += 5.0 * a.repetitions * pose.heading.x;
                    pose.position.y += 5.0 * a.repetitions * pose.heading.y;
                    break;
                }
                case ActionKind::turn_left:
                case ActionKind::turn_right: {
                    const double sign = a.kind == ActionKind::turn_left ? 1.0 : -1.0;
                    const double rad = deg_to_rad(sign * 15.0 * a.repetitions);
                    const double c = std::cos(rad), s = std::sin(rad);
                    const double x = pose.heading.x, y = pose.heading.y;
                    pose.heading = {c * x - s * y, s * x + c * y, 0.0};
                    break;
                }
                case ActionKind::ascend: pose.position.z += 2.0 * a.repetitions; break;
                case ActionKind::descend: pose.position.z -= 2.0 * a.repetitions; break;
                case ActionKind::stop: break;
            }
            ++steps;
        }
        CHECK(steps < 200);
        // The terminal hop can be infeasible on the 15-degree / 5 m grid for a
        // sliver just past the arrival radius; 2.55 m bounds that band.
        CHECK(geom::distance_xy(pose.position, target) < 2.55);
        CHECK(std::abs(target.z - pose.position.z) <= kVerticalThresholdM + 1e-9);
    }
}

TEST_CASE("parse_decision: well-formed reply") {
    const AgentDecision d = parse_decision(valid_reply());
    CHECK(d.action == AgentAction{ActionKind::turn_left, 6});
    CHECK(d.selected_path_id == 0);
    CHECK(d.observation_description == "A tower ahead.");
}

TEST_CASE("parse_decision: validation errors") {
    CHECK_THROWS_WITH_AS(parse_decision(valid_reply("fly", "6")), "invalid action kind: fly",
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_decision(valid_reply("turn_left", "0")),
                         "repetitions must be >= 1", ParseError);
    CHECK_THROWS_AS(parse_decision("Action: forward\n"), ParseError);  // missing executions
    CHECK_THROWS_AS(parse_decision("total gibberish"), ParseError);
}

TEST_CASE("parse_decision: stop normalizes to one repetition; counts are capped") {
    const AgentDecision stop = parse_decision(valid_reply("stop", "5"));
    CHECK(stop.action == AgentAction{ActionKind::stop, 1});
    const AgentDecision capped = parse_decision(valid_reply("forward", "99"));
    CHECK(capped.action == AgentAction{ActionKind::forward, 24});
}

TEST_CASE("parse_decision(render_decision(d)) is the identity on single-line fields") {
    AgentDecision d;
    d.observation_description = "Tower to the left.";
    d.navigation_progress = "One of three landmarks visited.";
    d.path_reasoning = "Path 2 matches the right turn.";
    d.selected_path_id = 2;
    d.action_reasoning = "Turn right 45 degrees.";
    d.action = {ActionKind::turn_right, 3};
    d.updated_history = "Visited the silo; heading to the bridge.";
    const AgentDecision back = parse_decision(render_decision(d));
    CHECK(back.observation_description == d.observation_description);
    CHECK(back.navigation_progress == d.navigation_progress);
    CHECK(back.path_reasoning == d.path_reasoning);
    CHECK(back.selected_path_id == d.selected_path_id);
    CHECK(back.action_reasoning == d.action_reasoning);
    CHECK(back.action == d.action);
    CHECK(back.updated_history == d.updated_history);
}

TEST_CASE("rule-based planner: single candidate path is selected") {
    NavContext ctx = example_context();
    std::vector<elg::ElgPath> raw(1);
    raw[0].node_ids = {1, 2};
    raw[0].motions = {{30.0, 4.0, geom::ElevationSign::descend, 10.0},
                      {-45.0, 0.0, geom::ElevationSign::level, 25.0}};
    ctx.path_descriptions = verbalizer::describe_paths(raw, {"the intersection", "the bridge"});

    RuleBasedPlanner planner;
    const AgentDecision d = plan_step(planner, ctx);
    CHECK(d.selected_path_id == 0);
    CHECK(d.action == AgentAction{ActionKind::turn_left, 2});  // 30 degrees / 15
    CHECK_FALSE(d.used_fallback);
    CHECK_FALSE(d.updated_history.empty());

    // Identical contexts give identical decisions.
    const AgentDecision d2 = plan_step(planner, ctx);
    CHECK(render_decision(d) == render_decision(d2));
}

TEST_CASE("rule-based planner: landmark-free elevate cue ascends") {
    NavContext ctx;
    ctx.instruction = "Elevate above the fog and wait.";
    ctx.observation = ObservationBundle{};
    RuleBasedPlanner planner;
    const AgentDecision d = plan_step(planner, ctx);
    CHECK(d.action.kind == ActionKind::ascend);
}

TEST_CASE("rule-based planner: next-landmark mode follows the motion") {
    NavContext ctx = example_context();
    ctx.next_landmark = {"the intersection",
                         geom::RelativeMotion{90.0, 0.0, geom::ElevationSign::level, 40.0}};
    RuleBasedPlanner planner;
    const AgentDecision d = plan_step(planner, ctx);
    CHECK(d.action == AgentAction{ActionKind::turn_left, 6});
    CHECK(d.follow_next.has_value());
    CHECK(*d.follow_next);
}

TEST_CASE("LLM planner: scripted backend reply is parsed through") {
    MockBackend backend({valid_reply()});
    LlmPlanner planner(backend);
    NavContext ctx = example_context();
    ctx.path_descriptions = example_paths();
    const AgentDecision d = plan_step(planner, ctx);
    CHECK(d.action == AgentAction{ActionKind::turn_left, 6});
    CHECK(d.selected_path_id == 0);
    CHECK_FALSE(d.used_fallback);
    REQUIRE(backend.prompts.size() == 1);
    CHECK(backend.prompts[0].find("Candidate Paths") != std::string::npos);
}

TEST_CASE("LLM planner: one retry, then rule-based fallback flagged") {
    MockBackend backend({"garbage", "still garbage"});
    LlmPlanner planner(backend);
    NavContext ctx = example_context();
    ctx.path_descriptions = example_paths();
    const AgentDecision d = plan_step(planner, ctx);
    CHECK(backend.calls == 2);
    CHECK(d.used_fallback);
    d.action.validate();

    // A malformed first reply followed by a valid one needs no fallback.
    MockBackend retry_backend({"garbage", valid_reply()});
    LlmPlanner retry_planner(retry_backend);
    const AgentDecision ok = plan_step(retry_planner, ctx);
    CHECK_FALSE(ok.used_fallback);
    CHECK(ok.action == AgentAction{ActionKind::turn_left, 6});
}

TEST_CASE("LLM planner: transport failures propagate") {
    class DeadBackend final : public TextCompletionBackend {
        std::string complete(const std::string&) override {
            throw BackendError("connection refused");
        }
    } backend;
    LlmPlanner planner(backend);
    NavContext ctx = example_context();
    ctx.path_descriptions = example_paths();
    CHECK_THROWS_AS(plan_step(planner, ctx), BackendError);
}

TEST_CASE("LLM landmark parser: JSON list reply, grammar fallback otherwise") {
    MockBackend backend({R"(["Maple Street", "bank"])"});
    LlmLandmarkParser parser(backend);
    const auto got = parser.parse("Turn left on Maple Street, then right at the bank.");
    REQUIRE(got.size() == 2);
    CHECK(got[0] == "Maple Street");
    CHECK(got[1] == "bank");
    CHECK(backend.prompts[0].find("Navigation Landmark Parser") != std::string::npos);

    MockBackend broken({"no list here"});
    LlmLandmarkParser fallback_parser(broken);
    const auto fb = fallback_parser.parse("Turn left on Maple Street, then right at the bank.");
    REQUIRE(fb.size() == 2);
    CHECK(fb[0] == "Maple Street");
}

TEST_CASE("HTTP backend: round-trips an OpenAI-style completion") {
    httplib::Server server;
    std::string seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        nlohmann::json reply;
        reply["choices"] = nlohmann::json::array(
            {{{"message", {{"role", "assistant"}, {"content", valid_reply()}}}}});
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    LlmSettings settings;
    settings.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    settings.model = "test-model";
    settings.timeout_s = 5;
    HttpTextBackend backend(settings);
    const std::string reply = backend.complete("hello");
    CHECK(reply == valid_reply());

    const auto body = nlohmann::json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "hello");

    server.stop();
    server_thread.join();

    // With the server gone the transport error surfaces.
    CHECK_THROWS_AS(backend.complete("hello again"), BackendError);
}

TEST_CASE("HTTP backend: configuration validation") {
    CHECK_THROWS_AS(HttpTextBackend(LlmSettings{}), BackendError);
    LlmSettings https;
    https.endpoint = "https://example.invalid/v1";
    https.model = "m";
    HttpTextBackend backend(https);
    CHECK_THROWS_AS(backend.complete("x"), BackendError);
}
