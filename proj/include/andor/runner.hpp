#pragma once

// Operator surface behind the command-line tool: run configured descents,
// solve stored programs, diff models and report costs. Owns config parsing
// and the artifact layout under the run's output directory.

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "andor/appraise.hpp"
#include "andor/gateway.hpp"

namespace andor::cli {

struct RunConfig {
    std::string task_name;
    std::string initiator;
    int max_depth = 1;
    std::string pack = "sci";
    std::optional<std::filesystem::path> pack_file;
    std::string engine = "explorer";  // explorer | stacker
    refine::AppraisalConfig appraisal;
    std::string oracle_pack = "oracle";
    std::optional<std::filesystem::path> ground_truth_path;
    int embed_dim = 64;
    std::string backend = "replay";  // live | replay | scripted
    std::vector<std::pair<std::string, std::string>> scripted;
    std::filesystem::path cache_dir = "caches";
    std::filesystem::path output_dir = "out";
    bool strict_constraints = false;
    bool stop_on_goal = false;
    llm::ChatParams chat;
    llm::PriceTable price_table;

    // Parses the JSON config; relative paths resolve against the file's
    // directory. Unknown keys and invalid combinations are errors.
    static RunConfig from_file(const std::filesystem::path& path);
};

// Executes the configured descent and writes trace.txt, program.pl,
// program_annotated.pl (when annotating), model.txt and costs.txt under
// output_dir. Returns 0 on success, 2 when strict constraints make the
// program unsatisfiable. Config and I/O problems throw; a ReplayMiss
// propagates for the caller to map to its exit code.
int run(const RunConfig& config, std::ostream& log);

// Prints satisfiability and the sorted model of a stored program, or the
// support verdict when a goal is given (non-strict semantics).
int solve_file(const std::filesystem::path& path, bool strict,
               const std::optional<std::string>& goal, std::ostream& out);

// Prints the Jaccard distance between two model files to four decimals plus
// both set differences.
int diff_models(const std::filesystem::path& a, const std::filesystem::path& b,
                std::ostream& out);

// Aggregates persisted agent ledgers under a cache directory.
int costs(const std::filesystem::path& cache_dir, std::ostream& out);

// Atoms of a model file, skipping headers, verdicts and blank lines.
std::set<std::string> read_model_file(const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace andor::cli
