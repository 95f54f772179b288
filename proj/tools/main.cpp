// lookaside -- command-line entry point wiring the navigation engine:
// world generation, knowledge-base construction, planning inspection, episode
// execution, evaluation and plot-data export.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "lookaside/agent.hpp"
#include "lookaside/benchmark.hpp"
#include "lookaside/http_backend.hpp"
#include "lookaside/metrics.hpp"
#include "lookaside/sim.hpp"
#include "lookaside/sim_io.hpp"
#include "lookaside/slkb.hpp"

namespace fs = std::filesystem;
using namespace lookaside;

namespace {

struct ToolConfig {
    int n_ahead = 2;
    int n_next = 6;
    int n_subseq = 2;
    double prune_radius = 20.0;
    double merge_threshold = 0.90;
    int max_steps = 150;
    double success_threshold = 20.0;
    uint64_t seed = 0;
    std::string planner = "rule";
    double sigma_pos = 0.0;
    double p_drop = 0.0;
    double observe_range = 300.0;
    double observe_fov = 90.0;
    agent::LlmSettings llm;

    sim::RunConfig run_config() const {
        sim::RunConfig rc;
        rc.elg = {n_ahead, n_next, n_subseq};
        rc.prune_radius_m = prune_radius;
        rc.merge_threshold = merge_threshold;
        rc.max_steps = max_steps;
        rc.success_threshold_m = success_threshold;
        rc.seed = seed;
        rc.observe.range_m = observe_range;
        rc.observe.fov_deg = observe_fov;
        rc.observe.sigma_pos_m = sigma_pos;
        rc.observe.p_drop = p_drop;
        return rc;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["n_ahead"] = n_ahead;
        j["n_next"] = n_next;
        j["n_subseq"] = n_subseq;
        j["prune_radius"] = prune_radius;
        j["merge_threshold"] = merge_threshold;
        j["max_steps"] = max_steps;
        j["success_threshold"] = success_threshold;
        j["seed"] = seed;
        j["planner"] = planner;
        j["sigma_pos"] = sigma_pos;
        j["p_drop"] = p_drop;
        j["observe_range"] = observe_range;
        j["observe_fov"] = observe_fov;
        j["llm"] = {{"endpoint", llm.endpoint},
                    {"model", llm.model},
                    {"timeout_s", llm.timeout_s},
                    {"api_key_env", llm.api_key_env}};
        return j;
    }
};

// Precedence: built-in defaults < environment < --config file < explicit flags.
void apply_environment(ToolConfig& cfg) {
    if (const char* v = std::getenv("LOOKASIDE_LLM_ENDPOINT"); v && *v) cfg.llm.endpoint = v;
    if (const char* v = std::getenv("LOOKASIDE_LLM_MODEL"); v && *v) cfg.llm.model = v;
    if (const char* v = std::getenv("LOOKASIDE_LLM_TIMEOUT"); v && *v) cfg.llm.timeout_s = std::atof(v);
}

void apply_config_file(ToolConfig& cfg, const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config file " + path.string() + ": " + e.what());
    }
    cfg.n_ahead = j.value("n_ahead", cfg.n_ahead);
    cfg.n_next = j.value("n_next", cfg.n_next);
    cfg.n_subseq = j.value("n_subseq", cfg.n_subseq);
    cfg.prune_radius = j.value("prune_radius", cfg.prune_radius);
    cfg.merge_threshold = j.value("merge_threshold", cfg.merge_threshold);
    cfg.max_steps = j.value("max_steps", cfg.max_steps);
    cfg.success_threshold = j.value("success_threshold", cfg.success_threshold);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.planner = j.value("planner", cfg.planner);
    cfg.sigma_pos = j.value("sigma_pos", cfg.sigma_pos);
    cfg.p_drop = j.value("p_drop", cfg.p_drop);
    cfg.observe_range = j.value("observe_range", cfg.observe_range);
    cfg.observe_fov = j.value("observe_fov", cfg.observe_fov);
    if (j.contains("llm")) {
        const auto& l = j["llm"];
        cfg.llm.endpoint = l.value("endpoint", cfg.llm.endpoint);
        cfg.llm.model = l.value("model", cfg.llm.model);
        cfg.llm.timeout_s = l.value("timeout_s", cfg.llm.timeout_s);
        cfg.llm.api_key_env = l.value("api_key_env", cfg.llm.api_key_env);
    }
}

void echo_config(const ToolConfig& cfg, const std::string& command) {
    std::cout << "# " << command << " config " << cfg.to_json().dump() << "\n";
}

sim::Box parse_bounds(const std::string& text) {
    // "x0,y0,z0:x1,y1,z1"
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("bounds must look like x0,y0,z0:x1,y1,z1");
    auto parse3 = [](const std::string& part) {
        std::stringstream ss(part);
        std::string c;
        std::vector<double> v;
        while (std::getline(ss, c, ',')) v.push_back(std::stod(c));
        if (v.size() != 3) throw ConfigError("bounds corner needs three comma-separated numbers");
        return geom::WorldPoint{v[0], v[1], v[2]};
    };
    try {
        return {parse3(text.substr(0, colon)), parse3(text.substr(colon + 1))};
    } catch (const std::invalid_argument&) {
        throw ConfigError("bounds must be numeric: " + text);
    }
}

geom::WorldPoint parse_point(const std::string& text) {
    std::stringstream ss(text);
    std::string c;
    std::vector<double> v;
    while (std::getline(ss, c, ',')) {
        try {
            v.push_back(std::stod(c));
        } catch (const std::invalid_argument&) {
            throw ConfigError("position must be numeric: " + text);
        }
    }
    if (v.size() != 3) throw ConfigError("position needs three comma-separated numbers");
    return {v[0], v[1], v[2]};
}

std::unique_ptr<agent::Planner> make_planner(const ToolConfig& cfg,
                                             std::unique_ptr<agent::TextCompletionBackend>& backend) {
    if (cfg.planner == "rule") return std::make_unique<agent::RuleBasedPlanner>();
    if (cfg.planner == "llm") {
        if (!cfg.llm.configured())
            throw ConfigError("--planner llm requires an endpoint and model "
                              "(flags, config file, or LOOKASIDE_LLM_* environment)");
        backend = std::make_unique<agent::HttpTextBackend>(cfg.llm);
        return std::make_unique<agent::LlmPlanner>(*backend);
    }
    throw ConfigError("unknown planner: " + cfg.planner);
}

// ---------------------------------------------------------------------------

int cmd_gen_world(const ToolConfig& cfg, bool verbose, const std::string& out, int landmarks,
                  int distractors, const std::string& bounds_text, double min_spacing, int episodes,
                  int episode_length, std::string episodes_out) {
    echo_config(cfg, "gen-world");
    sim::WorldParams params;
    params.landmark_count = landmarks;
    params.distractors = distractors;
    params.bounds = parse_bounds(bounds_text);
    params.min_spacing_m = min_spacing;
    const sim::World world = sim::generate_world(cfg.seed, params);
    sim::save_world(world, out);
    std::cout << "wrote " << out << " (" << world.landmarks.size() << " landmarks)\n";
    if (verbose) {
        for (const auto& lm : world.landmarks) {
            std::cout << "  " << lm.description << " @ (" << format_double(lm.position.x) << ", "
                      << format_double(lm.position.y) << ", " << format_double(lm.position.z)
                      << ")\n";
        }
    }

    if (episodes > 0) {
        if (episodes_out.empty()) {
            fs::path p(out);
            p.replace_extension(".episodes.json");
            episodes_out = p.string();
        }
        std::vector<sim::Episode> eps;
        for (int i = 0; i < episodes; ++i) {
            eps.push_back(sim::synthesize_episode(world, cfg.seed + static_cast<uint64_t>(i) + 1,
                                                  episode_length));
        }
        sim::save_episodes(eps, episodes_out);
        std::cout << "wrote " << episodes_out << " (" << eps.size() << " episodes)\n";
    }
    return 0;
}

int cmd_build_kb(const ToolConfig& cfg, const std::string& world_path, const std::string& records_path,
                 const std::string& out, double range) {
    echo_config(cfg, "build-kb");
    slkb::KnowledgeBase kb;
    if (!records_path.empty()) {
        // Observation log: one JSON record per line.
        std::ifstream f(records_path);
        if (!f) throw ConfigError("cannot open records file: " + records_path);
        std::string line;
        size_t line_no = 0;
        while (std::getline(f, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                slkb::LandmarkRecord rec;
                rec.description = j.at("desc").get<std::string>();
                rec.position = {j.at("x").get<double>(), j.at("y").get<double>(),
                                j.at("z").get<double>()};
                rec.confidence = j.value("c", 1.0);
                rec.source_id = j.value("source", std::string{});
                kb.upsert(rec, cfg.merge_threshold);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("records parse error at line " + std::to_string(line_no) + ": " +
                                  e.what());
            }
        }
        kb.prune_positions(cfg.prune_radius);
    } else {
        const sim::World world = sim::load_world(world_path);
        if (world.landmarks.empty()) throw ConfigError("world has no landmarks");
        sim::CoverageParams cov;
        cov.range_m = range;
        cov.prune_radius_m = cfg.prune_radius;
        cov.merge_threshold = cfg.merge_threshold;
        kb = sim::build_coverage_kb(world, cov);
    }
    kb.save(out);
    std::cout << "wrote " << out << " (" << kb.size() << " keys)\n";
    return 0;
}

int cmd_plan(const ToolConfig& cfg, const std::string& kb_path, const std::string& instruction,
             const std::string& pos_text, double heading_deg, int visited, bool print_prompt) {
    echo_config(cfg, "plan");
    const auto kb = slkb::KnowledgeBase::load(kb_path);
    const auto landmarks = slkb::parse_landmarks(instruction);
    if (landmarks.empty()) {
        std::cout << "no landmarks recognized in the instruction\n";
        return 0;
    }
    const auto retrieved = kb.retrieve(landmarks);
    std::cout << "retrieved landmarks:\n";
    for (const auto& r : retrieved) {
        std::cout << "  " << r.instruction_landmark << " -> " << r.matched_description
                  << " (similarity " << format_double(r.similarity) << ", " << r.positions.size()
                  << " positions)\n";
    }

    elg::AgentPose pose;
    pose.position = parse_point(pos_text);
    pose.heading = geom::heading_from_yaw_deg(heading_deg);
    const auto window = elg::select_unvisited(retrieved, static_cast<size_t>(visited), cfg.n_ahead);
    if (window.empty()) {
        std::cout << "no unvisited landmarks remain\n";
        return 0;
    }
    const auto graph = elg::build(pose, window, {cfg.n_ahead, cfg.n_next, cfg.n_subseq});
    const auto paths = elg::enumerate_paths(graph, pose);
    const auto descriptions = verbalizer::describe_paths(paths, graph.layer_landmarks);

    std::cout << "elg:\n" << elg::to_json(graph, paths).dump(2) << "\n";
    std::cout << "path descriptions:\n";
    for (const auto& d : descriptions.descriptions) {
        std::cout << "  Path " << d.path_id << ": " << d.text << "\n";
    }

    if (print_prompt) {
        agent::NavContext ctx;
        ctx.instruction = instruction;
        ctx.path_descriptions = descriptions;
        ctx.observation = {"nothing notable", "nothing notable", "nothing notable",
                           "nothing notable", "nothing notable", "nothing notable"};
        std::cout << "prompt:\n"
                  << agent::assemble_prompt(ctx, agent::PromptMode::with_elg) << "\n";
    }
    return 0;
}

int cmd_run(const ToolConfig& cfg, const std::string& world_path, const std::string& episodes_path,
            const std::string& kb_path, const std::string& out_dir, int jobs, bool online_kb) {
    echo_config(cfg, "run");
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    const sim::World world = sim::load_world(world_path);
    const auto episodes = sim::load_episodes(episodes_path);
    if (episodes.empty()) throw ConfigError("no episodes in " + episodes_path);
    const auto kb = slkb::KnowledgeBase::load(kb_path);

    sim::RunConfig rc = cfg.run_config();
    rc.online_kb = online_kb;

    fs::create_directories(out_dir);
    std::vector<sim::Trajectory> results(episodes.size());
    std::vector<std::string> failures(episodes.size());

    std::unique_ptr<agent::TextCompletionBackend> probe_backend;
    make_planner(cfg, probe_backend);  // validates planner config up front

    auto worker = [&](size_t begin, size_t stride) {
        for (size_t i = begin; i < episodes.size(); i += stride) {
            std::unique_ptr<agent::TextCompletionBackend> backend;
            const auto planner = make_planner(cfg, backend);
            // Online memory mutates the KB, so each episode gets its own copy;
            // offline episodes share the loaded KB through retrieval only.
            slkb::KnowledgeBase episode_kb = kb;
            try {
                results[i] = sim::run_episode(world, episodes[i], *planner, episode_kb, rc);
            } catch (const sim::EpisodeFailure& e) {
                results[i] = e.partial;
                failures[i] = e.what();
            }
        }
    };

    if (jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, static_cast<size_t>(t), jobs);
        for (auto& t : pool) t.join();
    }

    // Serialized writes in episode order keep output deterministic.
    for (size_t i = 0; i < episodes.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
        const fs::path out = fs::path(out_dir) / name;
        sim::save_trajectory(results[i], out);
        std::cout << episodes[i].episode_id << " -> " << out.string() << " ("
                  << results[i].entries.size() << " steps, "
                  << sim::to_string(results[i].status) << ")\n";
    }
    for (size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i].empty()) throw Error(failures[i]);
    }
    return 0;
}

int cmd_eval(const ToolConfig& cfg, const std::string& episodes_path,
             const std::vector<std::string>& trajectory_paths, const std::string& report_path) {
    echo_config(cfg, "eval");
    const auto episodes = sim::load_episodes(episodes_path);
    if (episodes.size() != trajectory_paths.size())
        throw ConfigError("episode count (" + std::to_string(episodes.size()) +
                          ") does not match trajectory count (" +
                          std::to_string(trajectory_paths.size()) + ")");
    std::vector<std::pair<sim::Trajectory, sim::Episode>> batch;
    for (size_t i = 0; i < episodes.size(); ++i) {
        batch.emplace_back(sim::load_trajectory(trajectory_paths[i]), episodes[i]);
    }
    const auto summary = metrics::evaluate_batch(batch, cfg.success_threshold);
    std::cout << metrics::render_table(summary);
    if (!report_path.empty()) {
        sim::detail::write_file(report_path, metrics::to_json(summary).dump(2) + "\n");
        std::cout << "wrote " << report_path << "\n";
    }
    return 0;
}

int cmd_export(const ToolConfig& cfg, const std::string& world_path,
               const std::vector<std::string>& trajectory_paths, const std::string& out) {
    echo_config(cfg, "export");
    const sim::World world = sim::load_world(world_path);
    std::string csv = "kind,id,step,x,y,z,heading_deg,action,repetitions,label\n";
    for (size_t i = 0; i < world.landmarks.size(); ++i) {
        const auto& lm = world.landmarks[i];
        csv += "landmark," + std::to_string(i) + ",0," + format_double(lm.position.x) + "," +
               format_double(lm.position.y) + "," + format_double(lm.position.z) +
               ",0,,0," + lm.description + "\n";
    }
    for (size_t t = 0; t < trajectory_paths.size(); ++t) {
        const auto traj = sim::load_trajectory(trajectory_paths[t]);
        for (const auto& e : traj.entries) {
            csv += "pose," + std::to_string(t) + "," + std::to_string(e.step) + "," +
                   format_double(e.pose.position.x) + "," + format_double(e.pose.position.y) + "," +
                   format_double(e.pose.position.z) + "," +
                   format_double(geom::yaw_deg_of(e.pose.heading)) + "," +
                   std::string(agent::to_string(e.action.kind)) + "," +
                   std::to_string(e.action.repetitions) + ",\n";
        }
    }
    sim::detail::write_file(out, csv);
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lookaside: landmark knowledge base, egocentric lookaside graph planning,\n"
                 "and a deterministic aerial navigation benchmark harness"};
    app.require_subcommand(1);

    ToolConfig cfg;
    apply_environment(cfg);

    std::string config_path;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON config file; explicit flags override its values")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", cfg.seed, "master random seed");
    app.add_flag("--verbose", verbose, "chatty diagnostics");

    // Shared tunables, overridable per invocation.
    app.add_option("--n-ahead", cfg.n_ahead, "lookahead horizon (landmarks per ELG)");
    app.add_option("--n-next", cfg.n_next, "layer-1 candidates kept");
    app.add_option("--n-subseq", cfg.n_subseq, "outgoing edges per ELG node");
    app.add_option("--prune-radius", cfg.prune_radius, "knowledge-base pruning radius, meters");
    app.add_option("--merge-threshold", cfg.merge_threshold, "description merge cosine threshold");
    app.add_option("--max-steps", cfg.max_steps, "decision cap per episode");
    app.add_option("--success-threshold", cfg.success_threshold, "success radius, meters");
    app.add_option("--planner", cfg.planner, "rule | llm");
    app.add_option("--sigma-pos", cfg.sigma_pos, "observation position jitter, meters");
    app.add_option("--p-drop", cfg.p_drop, "observation dropout probability");
    app.add_option("--observe-range", cfg.observe_range, "observation range, meters");
    app.add_option("--llm-endpoint", cfg.llm.endpoint, "chat-completions endpoint URL");
    app.add_option("--llm-model", cfg.llm.model, "model id");
    app.add_option("--llm-timeout", cfg.llm.timeout_s, "backend timeout, seconds");

    // gen-world
    auto* gen = app.add_subcommand("gen-world", "generate a seeded synthetic world (and episodes)");
    gen->fallthrough();
    std::string gw_out, gw_bounds = "0,0,10:600,600,60", gw_episodes_out;
    int gw_landmarks = 12, gw_distractors = 1, gw_episodes = 0, gw_episode_length = 3;
    double gw_min_spacing = 10.0;
    gen->add_option("--out", gw_out, "world JSON output path")->required();
    gen->add_option("--landmarks", gw_landmarks, "distinct landmark descriptions");
    gen->add_option("--distractors", gw_distractors, "positions sharing each description");
    gen->add_option("--bounds", gw_bounds, "world bounds x0,y0,z0:x1,y1,z1");
    gen->add_option("--min-spacing", gw_min_spacing, "minimum horizontal spacing, meters");
    gen->add_option("--episodes", gw_episodes, "synthesize this many episodes too");
    gen->add_option("--episode-length", gw_episode_length, "landmarks per episode");
    gen->add_option("--episodes-out", gw_episodes_out, "episode JSON output path");

    // build-kb
    auto* bkb = app.add_subcommand(
        "build-kb",
        "build a knowledge base by flying deterministic lawnmower coverage paths over a world\n"
        "(a stand-in for seeding memory from recorded flights), or by ingesting an observation log");
    bkb->fallthrough();
    std::string bkb_world, bkb_records, bkb_out;
    double bkb_range = 250.0;
    bkb->add_option("--world", bkb_world, "world JSON file")->check(CLI::ExistingFile);
    bkb->add_option("--records", bkb_records, "observation log, one JSON record per line")
        ->check(CLI::ExistingFile);
    bkb->add_option("--out", bkb_out, "knowledge base output path")->required();
    bkb->add_option("--range", bkb_range, "observation range during coverage, meters");

    // plan
    auto* plan = app.add_subcommand("plan", "inspect retrieval, the ELG and path descriptions");
    plan->fallthrough();
    std::string plan_kb, plan_instruction, plan_pos;
    double plan_heading = 0.0;
    int plan_visited = 0;
    bool plan_prompt = false;
    plan->add_option("--kb", plan_kb, "knowledge base file")->required()->check(CLI::ExistingFile);
    plan->add_option("--instruction", plan_instruction, "navigation instruction")->required();
    plan->add_option("--pos", plan_pos, "agent position x,y,z")->required();
    plan->add_option("--heading-deg", plan_heading, "agent yaw, degrees CCW from +x");
    plan->add_option("--visited", plan_visited, "landmarks already visited");
    plan->add_flag("--prompt", plan_prompt, "also print the assembled planning prompt");

    // run
    auto* run = app.add_subcommand("run", "run episodes and write trajectory CSVs (traj_000.csv, ...)");
    run->fallthrough();
    std::string run_world, run_episodes, run_kb, run_out_dir;
    int run_jobs = 1;
    bool run_online = false;
    run->add_option("--world", run_world, "world JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--episodes", run_episodes, "episode JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--kb", run_kb, "knowledge base file")->required()->check(CLI::ExistingFile);
    run->add_option("--out-dir", run_out_dir, "trajectory output directory")->required();
    run->add_option("--jobs", run_jobs, "parallel episodes");
    run->add_flag("--online-kb", run_online, "memorize observations during episodes");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate trajectories against episodes");
    eval->fallthrough();
    std::string eval_episodes, eval_report;
    std::vector<std::string> eval_trajectories;
    eval->add_option("--episodes", eval_episodes, "episode JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--trajectories", eval_trajectories,
                     "trajectory CSVs, one per episode, in episode order")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--report", eval_report, "also write a JSON report here");

    // export
    auto* exp = app.add_subcommand(
        "export", "merge trajectories and landmarks into one plot-ready CSV\n"
                  "(columns: kind,id,step,x,y,z,heading_deg,action,repetitions,label)");
    exp->fallthrough();
    std::string exp_world, exp_out;
    std::vector<std::string> exp_trajectories;
    exp->add_option("--world", exp_world, "world JSON file")->required()->check(CLI::ExistingFile);
    exp->add_option("--trajectories", exp_trajectories, "trajectory CSVs")
        ->required()
        ->check(CLI::ExistingFile);
    exp->add_option("--out", exp_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) {
            // File values sit between defaults and flags: reload flags on top.
            ToolConfig base;
            apply_environment(base);
            apply_config_file(base, config_path);
            // Only keep flag values the user actually passed.
            auto keep = [&](const char* name, auto& target, const auto& base_value) {
                if (app.count(name) == 0) target = base_value;
            };
            keep("--seed", cfg.seed, base.seed);
            keep("--n-ahead", cfg.n_ahead, base.n_ahead);
            keep("--n-next", cfg.n_next, base.n_next);
            keep("--n-subseq", cfg.n_subseq, base.n_subseq);
            keep("--prune-radius", cfg.prune_radius, base.prune_radius);
            keep("--merge-threshold", cfg.merge_threshold, base.merge_threshold);
            keep("--max-steps", cfg.max_steps, base.max_steps);
            keep("--success-threshold", cfg.success_threshold, base.success_threshold);
            keep("--planner", cfg.planner, base.planner);
            keep("--sigma-pos", cfg.sigma_pos, base.sigma_pos);
            keep("--p-drop", cfg.p_drop, base.p_drop);
            keep("--observe-range", cfg.observe_range, base.observe_range);
            keep("--llm-endpoint", cfg.llm.endpoint, base.llm.endpoint);
            keep("--llm-model", cfg.llm.model, base.llm.model);
            keep("--llm-timeout", cfg.llm.timeout_s, base.llm.timeout_s);
        }

        if (gen->parsed()) {
            return cmd_gen_world(cfg, verbose, gw_out, gw_landmarks, gw_distractors, gw_bounds,
                                 gw_min_spacing, gw_episodes, gw_episode_length, gw_episodes_out);
        }
        if (bkb->parsed()) {
            if (bkb_world.empty() && bkb_records.empty())
                throw ConfigError("build-kb needs --world or --records");
            return cmd_build_kb(cfg, bkb_world, bkb_records, bkb_out, bkb_range);
        }
        if (plan->parsed()) {
            return cmd_plan(cfg, plan_kb, plan_instruction, plan_pos, plan_heading, plan_visited,
                            plan_prompt);
        }
        if (run->parsed()) {
            return cmd_run(cfg, run_world, run_episodes, run_kb, run_out_dir, run_jobs, run_online);
        }
        if (eval->parsed()) {
            return cmd_eval(cfg, eval_episodes, eval_trajectories, eval_report);
        }
        if (exp->parsed()) {
            return cmd_export(cfg, exp_world, exp_trajectories, exp_out);
        }
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
