// Command-line front end: train, evaluate, duel, export-trajectory,
// plot-metrics. Failures print `error: {"kind": ..., "message": ...}` on
// stderr and exit with status 1.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hsac/errors.hpp"
#include "hsac/training_harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw hsac::IoError("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw hsac::IoError("write to '" + path.string() + "' failed");
}

// Scenario resolution: a standard situation wins over the checkpoint's
// training scenario.
hsac::ScenarioConfig pick_scenario(const hsac::RunConfig& cfg, const std::string& situation, int cap) {
    if (situation.empty()) {
        auto s = cfg.scenario;
        if (cap > 0) s.episode_cap = cap;
        return s;
    }
    return hsac::standard_scenario(hsac::situation_from_string(situation), cap > 0 ? cap : 2000);
}

void emit(const json& j, const std::string& out) {
    const std::string body = j.dump(2) + "\n";
    if (out.empty())
        std::cout << body;
    else
        write_text(out, body);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homotopy soft actor-critic for one-versus-one air combat"};
    app.require_subcommand(1);

    std::string config_path, out, resume;
    std::optional<std::uint64_t> seed;
    auto* train = app.add_subcommand("train", "Train a policy");
    train->add_option("--config", config_path, "JSON run configuration");
    train->add_option("--seed", seed, "Override the configured seed");
    train->add_option("--out", out, "Output directory (overrides out_dir)");
    train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
    int episodes_override = -1;
    train->add_option("--episodes", episodes_override, "Override total_episodes");

    std::string checkpoint, situation;
    int episodes = 200, cap = 0;
    std::uint64_t eval_seed = 0;
    auto* evaluate = app.add_subcommand("evaluate", "Deterministic sparse-reward evaluation");
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    evaluate->add_option("--situation", situation,
                         "advantageous | disadvantageous | head-on | neutral (default: training scenario)");
    evaluate->add_option("--episodes", episodes, "Episodes to run");
    evaluate->add_option("--cap", cap, "Episode step cap (default 2000 for situations)");
    evaluate->add_option("--seed", eval_seed, "Seed for initial states");
    evaluate->add_option("--out", out, "Write the JSON report here instead of stdout");

    std::string blue_ckpt, red_ckpt;
    auto* duel = app.add_subcommand("duel", "Two checkpoints against each other");
    duel->add_option("--blue", blue_ckpt, "Blue checkpoint")->required();
    duel->add_option("--red", red_ckpt, "Red checkpoint")->required();
    duel->add_option("--situation", situation, "Standard initial situation (default: blue's training scenario)");
    duel->add_option("--episodes", episodes, "Episodes to run");
    duel->add_option("--cap", cap, "Episode step cap");
    duel->add_option("--seed", eval_seed, "Seed for initial states");
    duel->add_option("--out", out, "Write the JSON report here instead of stdout");

    auto* export_cmd = app.add_subcommand("export-trajectory", "One rollout as CSV plus an SVG track plot");
    export_cmd->add_option("--checkpoint", checkpoint, "Blue checkpoint")->required();
    export_cmd->add_option("--red", red_ckpt, "Red checkpoint (default: scenario controller)");
    export_cmd->add_option("--situation", situation, "Standard initial situation");
    export_cmd->add_option("--cap", cap, "Episode step cap");
    export_cmd->add_option("--seed", eval_seed, "Seed for initial states");
    export_cmd->add_option("--out", out, "CSV path; the plot goes next to it as .svg")->required();

    std::string metrics_path;
    auto* plot = app.add_subcommand("plot-metrics", "Plot a metrics log as SVG");
    plot->add_option("--metrics", metrics_path, "metrics.jsonl")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            hsac::RunConfig cfg = config_path.empty() ? hsac::RunConfig{} : hsac::load_run_config(config_path);
            if (seed) cfg.seed = *seed;
            if (!out.empty()) cfg.out_dir = out;
            if (episodes_override >= 0) cfg.total_episodes = episodes_override;
            cfg.validate();
            std::optional<fs::path> from;
            if (!resume.empty()) from = resume;
            const auto s = hsac::train_to_directory(cfg, from);
            std::cout << json{{"episodes", s.episodes},
                              {"updates", s.updates},
                              {"final_q", s.final_q},
                              {"schedule_steps", s.schedule_steps},
                              {"out_dir", cfg.out_dir}}
                             .dump()
                      << '\n';
        } else if (*evaluate) {
            const auto st = hsac::load_checkpoint(checkpoint);
            const auto& c = st.config;
            const auto scenario = pick_scenario(c, situation, cap);
            const auto report =
                hsac::evaluate(st.learner.actor, c.aircraft, c.rewards, scenario, episodes, eval_seed);
            emit(hsac::to_json(report), out);
        } else if (*duel) {
            const auto blue = hsac::load_checkpoint(blue_ckpt);
            const auto red = hsac::load_checkpoint(red_ckpt);
            const auto& c = blue.config;
            const auto scenario = pick_scenario(c, situation, cap);
            const auto r = hsac::duel(blue.learner.actor, red.learner.actor, c.aircraft, c.rewards, scenario,
                                      episodes, eval_seed);
            emit(json{{"blue", hsac::to_json(r.blue)}, {"red", hsac::to_json(r.red)}, {"draws", r.blue.draws}}, out);
        } else if (*export_cmd) {
            const auto blue = hsac::load_checkpoint(checkpoint);
            std::optional<hsac::TrainingState> red;
            if (!red_ckpt.empty()) red = hsac::load_checkpoint(red_ckpt);
            const auto& c = blue.config;
            const auto scenario = pick_scenario(c, situation, cap);
            std::ofstream csv(out, std::ios::trunc);
            if (!csv) throw hsac::IoError("cannot write '" + out + "'");
            const auto trace = hsac::export_trajectory(blue.learner.actor, red ? &red->learner.actor : nullptr,
                                                       c.aircraft, c.rewards, scenario, eval_seed, csv);
            write_text(fs::path(out).replace_extension(".svg"), hsac::trajectory_svg(trace));
        } else if (*plot) {
            std::ifstream in(metrics_path);
            if (!in) throw hsac::IoError("cannot open '" + metrics_path + "'");
            write_text(out, hsac::metrics_svg(hsac::read_metrics(in)));
        }
    } catch (const hsac::Error& e) {
        std::cerr << "error: " << json{{"kind", e.kind()}, {"message", e.what()}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << json{{"kind", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
