#include "andor/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace andor::cli {

using nlohmann::json;

namespace {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void require_keys(const json& doc, const std::set<std::string>& known,
                  const std::string& where) {
    for (const auto& [key, _] : doc.items())
        if (!known.count(key))
            throw std::runtime_error("unknown key '" + key + "' in " + where);
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    json doc;
    {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config " + path.string());
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw std::runtime_error("malformed config " + path.string() + ": " + e.what());
        }
    }
    require_keys(doc, {"task_name", "initiator", "max_depth", "pack", "pack_file", "engine",
                       "appraisal", "oracle_pack", "ground_truth_path", "embed_dim", "backend",
                       "scripted", "cache_dir", "output_dir", "strict_constraints",
                       "stop_on_goal", "chat", "price_table"},
                 path.string());

    RunConfig cfg;
    if (!doc.contains("task_name") || !doc.contains("initiator"))
        throw std::runtime_error("config needs task_name and initiator");
    cfg.task_name = doc.at("task_name").get<std::string>();
    cfg.initiator = doc.at("initiator").get<std::string>();
    cfg.max_depth = doc.value("max_depth", 1);
    cfg.pack = doc.value("pack", std::string("sci"));
    cfg.engine = doc.value("engine", std::string("explorer"));
    cfg.oracle_pack = doc.value("oracle_pack", std::string("oracle"));
    cfg.backend = doc.value("backend", std::string("replay"));
    cfg.embed_dim = doc.value("embed_dim", 64);
    cfg.strict_constraints = doc.value("strict_constraints", false);
    cfg.stop_on_goal = doc.value("stop_on_goal", false);

    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    cfg.cache_dir = resolve(base, doc.value("cache_dir", std::string("caches")));
    cfg.output_dir = resolve(base, doc.value("output_dir", std::string("out")));
    if (doc.contains("pack_file"))
        cfg.pack_file = resolve(base, doc.at("pack_file").get<std::string>());
    if (doc.contains("ground_truth_path"))
        cfg.ground_truth_path = resolve(base, doc.at("ground_truth_path").get<std::string>());

    if (doc.contains("appraisal")) {
        const json& a = doc.at("appraisal");
        require_keys(a, {"mode", "threshold", "k", "capture_evidence", "annotate_probability",
                         "continual"},
                     "appraisal");
        cfg.appraisal.mode = refine::mode_from_string(a.value("mode", std::string("always_true")));
        cfg.appraisal.threshold = a.value("threshold", 0.5);
        cfg.appraisal.k = a.value("k", 3);
        cfg.appraisal.capture_evidence = a.value("capture_evidence", false);
        cfg.appraisal.annotate_probability = a.value("annotate_probability", false);
        cfg.appraisal.continual = a.value("continual", false);
    }

    if (doc.contains("chat")) {
        const json& c = doc.at("chat");
        require_keys(c, {"model_name", "temperature", "max_response_tokens",
                         "context_token_budget", "seed"},
                     "chat");
        cfg.chat.model_name = c.value("model_name", std::string("gpt-4"));
        cfg.chat.temperature = c.value("temperature", 0.0);
        cfg.chat.max_response_tokens = c.value("max_response_tokens", 500);
        cfg.chat.context_token_budget = c.value("context_token_budget", 4000);
        if (c.contains("seed")) cfg.chat.seed = c.at("seed").get<long>();
    }
    if (cfg.chat.context_token_budget <= cfg.chat.max_response_tokens)
        throw std::runtime_error("context_token_budget must exceed max_response_tokens");

    if (doc.contains("scripted"))
        for (const auto& pair : doc.at("scripted")) {
            if (!pair.is_array() || pair.size() != 2)
                throw std::runtime_error("scripted entries are [question, answer] pairs");
            cfg.scripted.emplace_back(pair.at(0).get<std::string>(),
                                      pair.at(1).get<std::string>());
        }

    if (doc.contains("price_table"))
        for (const auto& [model, p] : doc.at("price_table").items())
            cfg.price_table[model] = llm::ModelPrice{p.value("prompt_per_1k", 0.0),
                                                     p.value("completion_per_1k", 0.0)};

    if (cfg.max_depth < 0) throw std::runtime_error("max_depth must be >= 0");
    if (cfg.engine != "explorer" && cfg.engine != "stacker")
        throw std::runtime_error("engine must be 'explorer' or 'stacker'");
    if (cfg.backend != "live" && cfg.backend != "replay" && cfg.backend != "scripted")
        throw std::runtime_error("backend must be live, replay or scripted");
    return cfg;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string inline_clause(const horn::HornClause& c) {
    std::string out = "'" + c.head + "'";
    if (!c.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i) out += ", ";
            out += "'" + c.body[i] + "'";
        }
    }
    out += ".";
    return out;
}

std::string model_file_content(const horn::ModelResult& result, bool strict) {
    std::string out;
    if (strict && !result.satisfiable) {
        out += "UNSAT\n";
        for (const auto& c : result.violated_constraints)
            out += "violated: " + inline_clause(c) + "\n";
    }
    out += "MODEL: " + std::to_string(result.model.size()) + " facts\n";
    for (const auto& atom : result.model) out += atom + "\n";
    return out;
}

std::string format_estimate(const std::optional<double>& estimate) {
    if (!estimate) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *estimate);
    return buf;
}

std::string costs_table(const std::vector<std::pair<std::string, llm::ChatAgent*>>& agents,
                        const llm::PriceTable& prices) {
    std::string out = "agent model requests prompt_tokens completion_tokens estimate\n";
    llm::CostCounters total;
    std::optional<double> total_estimate;
    for (const auto& [name, agent] : agents) {
        auto rows = llm::cost_report(agent->ledger().session(), prices);
        if (rows.empty())
            out += name + " " + agent->params().model_name + " 0 0 0 " +
                   (prices.count(agent->params().model_name) ? "0.0000" : "-") + "\n";
        for (const auto& row : rows) {
            out += name + " " + row.model + " " + std::to_string(row.counters.requests) + " " +
                   std::to_string(row.counters.prompt_tokens) + " " +
                   std::to_string(row.counters.completion_tokens) + " " +
                   format_estimate(row.estimate) + "\n";
            total.requests += row.counters.requests;
            total.prompt_tokens += row.counters.prompt_tokens;
            total.completion_tokens += row.counters.completion_tokens;
            if (row.estimate) total_estimate = total_estimate.value_or(0.0) + *row.estimate;
        }
    }
    out += "TOTAL - " + std::to_string(total.requests) + " " +
           std::to_string(total.prompt_tokens) + " " + std::to_string(total.completion_tokens) +
           " " + format_estimate(total_estimate) + "\n";
    return out;
}

std::shared_ptr<llm::Backend> make_backend(const RunConfig& cfg) {
    if (cfg.backend == "live") return std::make_shared<llm::LiveBackend>();
    if (cfg.backend == "scripted") return std::make_shared<llm::ScriptedBackend>(cfg.scripted);
    return std::make_shared<llm::ReplayBackend>();
}

std::shared_ptr<truth::TruthStore> build_store(const RunConfig& cfg) {
    if (cfg.appraisal.mode != refine::Mode::semantic &&
        cfg.appraisal.mode != refine::Mode::knn_semantic)
        return nullptr;
    if (!cfg.ground_truth_path)
        throw refine::ConfigError("semantic appraisal modes need ground_truth_path");
    auto provider = std::make_shared<truth::HashEmbedder>(cfg.embed_dim);
    if (cfg.ground_truth_path->extension() == ".store")
        return std::make_shared<truth::TruthStore>(
            truth::TruthStore::load(*cfg.ground_truth_path, provider));
    auto store = std::make_shared<truth::TruthStore>(provider);
    store->add_facts(truth::ingest_document(read_text_file(*cfg.ground_truth_path)),
                     cfg.ground_truth_path->filename().string());
    if (store->size() == 0)
        throw refine::ConfigError("ground-truth document produced no sentences");
    return store;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
    prompt::PackRegistry registry = prompt::PackRegistry::builtin();
    if (cfg.pack_file) registry.load_file(*cfg.pack_file);
    const prompt::PromptPack& pack = registry.get(cfg.pack);

    auto backend = make_backend(cfg);
    auto or_agent = std::make_shared<llm::ChatAgent>("or_" + pack.name, cfg.chat, backend,
                                                     cfg.cache_dir);
    auto and_agent = std::make_shared<llm::ChatAgent>("and_" + pack.name, cfg.chat, backend,
                                                      cfg.cache_dir);
    or_agent->resume();
    and_agent->resume();

    std::vector<std::pair<std::string, llm::ChatAgent*>> agents{
        {and_agent->name(), and_agent.get()}, {or_agent->name(), or_agent.get()}};

    std::shared_ptr<llm::ChatAgent> oracle_agent;
    const prompt::PromptPack* oracle_pack = nullptr;
    if (cfg.appraisal.mode == refine::Mode::decider || cfg.appraisal.mode == refine::Mode::rater) {
        oracle_pack = &registry.get(cfg.oracle_pack);
        oracle_agent = std::make_shared<llm::ChatAgent>("oracle_" + oracle_pack->name, cfg.chat,
                                                        backend, cfg.cache_dir);
        oracle_agent->resume();
        agents.emplace_back(oracle_agent->name(), oracle_agent.get());
    }
    std::sort(agents.begin(), agents.end());

    if (cfg.backend == "replay")
        for (const auto& [name, agent] : agents)
            if (!std::filesystem::exists(agent->state_path()))
                throw std::runtime_error("replay backend needs existing cache " +
                                         agent->state_path().string());

    std::shared_ptr<truth::TruthStore> store = build_store(cfg);

    engine::LlmUnfolder unfolder(or_agent, and_agent, pack);
    std::unique_ptr<engine::EngineBase> eng;
    engine::AndOrExplorer* explorer = nullptr;
    engine::GoalStacker* stacker = nullptr;
    if (cfg.engine == "stacker") {
        auto owned = std::make_unique<engine::GoalStacker>(unfolder);
        stacker = owned.get();
        eng = std::move(owned);
    } else {
        auto owned = std::make_unique<engine::AndOrExplorer>(unfolder);
        explorer = owned.get();
        eng = std::move(owned);
    }
    refine::attach(*eng, cfg.appraisal, store, oracle_agent, oracle_pack);

    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path trace_path = cfg.output_dir / "trace.txt";
    std::filesystem::path trace_tmp = trace_path;
    trace_tmp += ".tmp";

    engine::Goal initiator = prompt::make_goal(cfg.initiator);
    int answers = 0;
    {
        std::ofstream trace_out(trace_tmp, std::ios::binary);
        if (!trace_out) throw std::runtime_error("cannot write " + trace_tmp.string());
        auto sink = [&](const engine::Answer& a) {
            engine::write_trace_block(trace_out, a);
            ++answers;
            return true;
        };
        if (stacker)
            stacker->solve(initiator, cfg.max_depth, sink);
        else
            explorer->solve(initiator, cfg.max_depth, sink);
    }
    std::filesystem::rename(trace_tmp, trace_path);

    const horn::HornProgram& program = eng->recorded_program();
    write_file_atomic(cfg.output_dir / "program.pl", horn::emit_prolog(program));
    if (cfg.appraisal.annotate_probability)
        write_file_atomic(cfg.output_dir / "program_annotated.pl", horn::emit_annotated(program));

    horn::SolveOptions solve_options;
    solve_options.strict_constraints = cfg.strict_constraints;
    if (cfg.stop_on_goal) solve_options.stop_on_atom = initiator.text;
    horn::ModelResult model = horn::minimal_model(program, solve_options);
    write_file_atomic(cfg.output_dir / "model.txt",
                      model_file_content(model, cfg.strict_constraints));
    write_file_atomic(cfg.output_dir / "costs.txt", costs_table(agents, cfg.price_table));

    if (cfg.backend != "replay")
        for (const auto& [name, agent] : agents) agent->persist();

    log << "task: " << cfg.task_name << "\n"
        << "answers: " << answers << "\n"
        << "clauses: " << program.size() << "\n"
        << "model: " << model.model.size() << " facts"
        << (cfg.strict_constraints && !model.satisfiable ? " (UNSAT)" : "") << "\n"
        << "artifacts: " << cfg.output_dir.string() << "\n";

    return cfg.strict_constraints && !model.satisfiable ? 2 : 0;
}

int solve_file(const std::filesystem::path& path, bool strict,
               const std::optional<std::string>& goal, std::ostream& out) {
    horn::HornProgram program;
    try {
        program = horn::parse_prolog(read_text_file(path));
    } catch (const horn::ParseError& e) {
        out << "parse error: " << e.what() << "\n";
        return 1;
    }
    if (goal) {
        std::string atom = horn::normalize_atom(*goal);
        out << (horn::goal_supported(program, atom) ? "SUPPORTED" : "NOT SUPPORTED") << "\n";
        return 0;
    }
    horn::ModelResult model = horn::minimal_model(program, {.strict_constraints = strict});
    if (strict && !model.satisfiable) {
        out << "UNSAT\n";
        for (const auto& c : model.violated_constraints)
            out << "violated: " << inline_clause(c) << "\n";
    } else {
        out << "SAT\n";
    }
    out << "MODEL: " << model.model.size() << " facts\n";
    for (const auto& atom : model.model) out << atom << "\n";
    return 0;
}

std::set<std::string> read_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    std::set<std::string> atoms;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "SAT" || line == "UNSAT") continue;
        if (line.rfind("MODEL:", 0) == 0 || line.rfind("violated:", 0) == 0) continue;
        atoms.insert(line);
    }
    return atoms;
}

int diff_models(const std::filesystem::path& a, const std::filesystem::path& b,
                std::ostream& out) {
    std::set<std::string> left = read_model_file(a);
    std::set<std::string> right = read_model_file(b);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", horn::model_jaccard(left, right));
    out << "jaccard " << buf << "\n";
    for (const auto& atom : left)
        if (!right.count(atom)) out << "only_left: " << atom << "\n";
    for (const auto& atom : right)
        if (!left.count(atom)) out << "only_right: " << atom << "\n";
    return 0;
}

int costs(const std::filesystem::path& cache_dir, std::ostream& out) {
    out << "agent model requests prompt_tokens completion_tokens\n";
    llm::CostCounters total;
    bool any = false;
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(cache_dir))
        for (const auto& entry : std::filesystem::directory_iterator(cache_dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        json doc;
        try {
            std::ifstream in(file);
            in >> doc;
        } catch (...) {
            continue;  // not an agent state file
        }
        if (!doc.contains("ledger")) continue;
        any = true;
        std::string name = doc.value("name", file.stem().string());
        for (const auto& [model, c] : doc.at("ledger").items()) {
            long long requests = c.value("requests", 0LL);
            long long prompt_tokens = c.value("prompt_tokens", 0LL);
            long long completion_tokens = c.value("completion_tokens", 0LL);
            out << name << " " << model << " " << requests << " " << prompt_tokens << " "
                << completion_tokens << "\n";
            total.requests += requests;
            total.prompt_tokens += prompt_tokens;
            total.completion_tokens += completion_tokens;
        }
    }
    if (!any) out << "(no ledgers found)\n";
    out << "TOTAL - " << total.requests << " " << total.prompt_tokens << " "
        << total.completion_tokens << "\n";
    return 0;
}

}  // namespace andor::cli
