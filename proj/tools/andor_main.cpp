// Command-line front end: run configured goal descents, solve stored Horn
// programs, diff models and report API costs.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "andor/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"AND/OR exploration of a topic with an LLM, compiled to Horn clauses"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    CLI::App* run_cmd = app.add_subcommand("run", "Run a configured descent");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();
    run_cmd->add_option("--out", out_override, "Override the configured output directory");

    std::string program_path;
    bool strict = false;
    std::string goal;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a stored program");
    solve_cmd->add_option("file", program_path, "Program file (.pl)")->required();
    solve_cmd->add_flag("--strict", strict, "Fail on violated integrity constraints");
    solve_cmd->add_option("--goal", goal, "Report whether this atom is supported");

    std::string diff_a, diff_b;
    CLI::App* diff_cmd = app.add_subcommand("diff", "Jaccard distance between two model files");
    diff_cmd->add_option("a", diff_a, "First model file")->required();
    diff_cmd->add_option("b", diff_b, "Second model file")->required();

    std::string costs_dir;
    CLI::App* costs_cmd = app.add_subcommand("costs", "Aggregate persisted agent ledgers");
    costs_cmd->add_option("dir", costs_dir, "Cache directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            andor::cli::RunConfig config = andor::cli::RunConfig::from_file(config_path);
            if (!out_override.empty()) config.output_dir = out_override;
            return andor::cli::run(config, std::cout);
        }
        if (solve_cmd->parsed()) {
            std::optional<std::string> goal_opt;
            if (!goal.empty()) goal_opt = goal;
            return andor::cli::solve_file(program_path, strict, goal_opt, std::cout);
        }
        if (diff_cmd->parsed()) return andor::cli::diff_models(diff_a, diff_b, std::cout);
        if (costs_cmd->parsed()) return andor::cli::costs(costs_dir, std::cout);
    } catch (const andor::llm::ReplayMiss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
