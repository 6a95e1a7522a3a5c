// Acceptance suite: one criterion per section, one pass/fail line each, all
// offline. Exits with the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "andor/appraise.hpp"
#include "andor/engine.hpp"
#include "andor/runner.hpp"
#include "fixtures.hpp"
#include "solver_oracles.hpp"

using namespace andor;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_goldens;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string normalize_lf(std::string s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != '\r') out += c;
    return out;
}

std::string squash_ws(const std::string& s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
        } else {
            if (pending) out += ' ';
            pending = false;
            out += c;
        }
    }
    return out;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t at = 0;
    while ((at = text.find(from, at)) != std::string::npos) {
        text.replace(at, from.size(), to);
        at += to.size();
    }
    return text;
}

fs::path scratch(const std::string& leaf) {
    fs::path dir = fs::temp_directory_path() / "andor_acceptance" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

// ---- criterion 1: golden replay reproduction -------------------------------

void golden_replay() {
    fs::path out = scratch("c1");
    int code = run_cli("run " + (g_goldens / "logic_programming" / "config.json").string() +
                       " --out " + out.string());
    expect(code == 0, "run exited with " + std::to_string(code));

    std::string trace = normalize_lf(slurp(out / "trace.txt"));
    const std::string first_block =
        "TRACE:\nLogic Programming\nSymbolic reasoning\nSymbolic representation learning\n\n";
    expect(trace.rfind(first_block, 0) == 0, "first TRACE block mismatch");

    std::string program_text = normalize_lf(slurp(out / "program.pl"));
    expect(program_text == fixtures::kLogicProgram, "program.pl differs from the golden listing");
    horn::HornProgram program = horn::parse_prolog(program_text);
    expect(program.rule_count() == 6, "expected 6 rules");
    expect(program.fact_count() == 15, "expected 15 facts");

    std::string model = normalize_lf(slurp(out / "model.txt"));
    std::string expected_model = "MODEL: 19 facts\n";
    for (const auto& atom : fixtures::logic_model()) expected_model += atom + "\n";
    expect(model == expected_model, "model.txt differs from the 19-fact golden model");
}

// ---- criterion 2: solver oracle equivalence --------------------------------

void solver_oracle_equivalence() {
    std::mt19937 rng(20240 + 1);
    for (int i = 0; i < 1000; ++i) {
        horn::HornProgram p = oracles::random_program(rng, 12, 30, 0.2);
        auto simple = oracles::simplify(p);
        horn::ModelResult got = horn::minimal_model(p, {.strict_constraints = true});

        auto expected = oracles::naive_fixpoint(simple);
        expect(got.model == expected, "model differs from fixpoint oracle at program " +
                                          std::to_string(i));
        auto violated = oracles::violated_constraints(simple, expected);
        expect(got.violated_constraints.size() == violated.size(),
               "violation count differs at program " + std::to_string(i));
        expect(got.satisfiable == violated.empty(),
               "satisfiability differs at program " + std::to_string(i));

        auto classical = oracles::classical_models(simple);
        expect(got.satisfiable == !classical.empty(),
               "classical satisfiability differs at program " + std::to_string(i));
        if (got.satisfiable)
            for (const auto& m : classical)
                for (const auto& atom : got.model)
                    expect(m.count(atom) == 1,
                           "minimal model not contained in a classical model at program " +
                               std::to_string(i));
    }
}

// ---- criterion 3: solver scalability ---------------------------------------

void solver_scalability() {
    const int n = 100000;
    horn::HornProgram p;
    p.add_clause("a1", {});
    for (int i = 1; i < n; ++i)
        p.add_clause("a" + std::to_string(i + 1), {"a" + std::to_string(i)});

    auto start = std::chrono::steady_clock::now();
    horn::ModelResult r = horn::minimal_model(p);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    expect(r.model.size() == static_cast<std::size_t>(n),
           "chain model has " + std::to_string(r.model.size()) + " atoms");
    expect(elapsed < 1000, "chain solve took " + std::to_string(elapsed) + " ms");
}

// ---- criterion 4: constraint semantics -------------------------------------

void constraint_semantics() {
    std::mt19937 rng(4040);
    for (int i = 0; i < 200; ++i) {
        horn::HornProgram p = oracles::random_program(rng, 10, 25, 0.3);
        auto simple = oracles::simplify(p);
        horn::ModelResult strict = horn::minimal_model(p, {.strict_constraints = true});
        auto violated = oracles::violated_constraints(simple, oracles::naive_fixpoint(simple));
        expect((!strict.satisfiable) == !violated.empty(),
               "UNSAT flag mismatch at program " + std::to_string(i));
    }

    horn::HornProgram golden = horn::parse_prolog(fixtures::kLogicProgram);
    expect(horn::goal_supported(golden, "Logic Programming"),
           "golden initiator must be supported");

    horn::HornProgram fixture;
    fixture.add_clause("g", {});
    fixture.add_clause(horn::kFalse, {"h"});
    fixture.add_clause("h", {});
    expect(horn::goal_supported(fixture, "g"),
           "goal must stay supported despite an unrelated violated constraint");
    expect(!horn::minimal_model(fixture, {.strict_constraints = true}).satisfiable,
           "strict mode must flag the violated constraint");
}

// ---- criterion 5: engine equivalence ---------------------------------------

void engine_equivalence() {
    std::mt19937 rng(5050);
    std::uniform_int_distribution<int> fan(1, 4);
    std::uniform_int_distribution<int> depth_dist(1, 3);
    std::uniform_int_distribution<int> pool_size(4, 12);

    for (int round = 0; round < 50; ++round) {
        int n = pool_size(rng);
        std::vector<std::string> pool;
        for (int i = 0; i < n; ++i) pool.push_back("n" + std::to_string(i));
        std::uniform_int_distribution<int> pick(0, n - 1);

        std::map<std::string, std::vector<std::string>> or_map, and_map;
        for (const auto& g : pool) {
            std::vector<std::string> heads, body;
            for (int i = 0, k = fan(rng); i < k; ++i) heads.push_back(pool[pick(rng)]);
            for (int i = 0, k = fan(rng); i < k; ++i) body.push_back(pool[pick(rng)]);
            or_map[g] = heads;
            and_map[g] = body;
        }

        engine::ScriptedUnfolder u1(or_map, and_map);
        engine::ScriptedUnfolder u2(or_map, and_map);
        engine::AndOrExplorer explorer(u1);
        engine::GoalStacker stacker(u2);
        int depth = depth_dist(rng);

        auto key_of = [](const engine::Answer& a) {
            std::string key;
            for (const auto& g : a.trace) key += g.text + "/";
            return key;
        };
        std::multiset<std::string> s1, s2;
        for (const auto& a : explorer.solve_all(engine::Goal{"n0"}, depth)) s1.insert(key_of(a));
        for (const auto& a : stacker.solve_all(engine::Goal{"n0"}, depth)) s2.insert(key_of(a));
        expect(s1 == s2, "answer sets differ at tree " + std::to_string(round));

        auto clause_keys = [](const horn::HornProgram& p) {
            std::multiset<std::string> out;
            for (const auto& c : p.clauses()) {
                std::string key = c.head;
                for (const auto& b : c.body) key += "|" + b;
                out.insert(std::move(key));
            }
            return out;
        };
        expect(clause_keys(explorer.recorded_program()) == clause_keys(stacker.recorded_program()),
               "programs differ at tree " + std::to_string(round));
    }
}

// ---- criterion 6: refiner contracts ----------------------------------------

void refiner_contracts() {
    fs::path dir = scratch("c6");
    const prompt::PromptPack oracle_pack = prompt::PackRegistry::builtin().get("oracle");
    const prompt::PromptPack rater_pack = prompt::PackRegistry::builtin().get("rater");

    auto backend = std::make_shared<llm::ScriptedBackend>();
    auto oracle = std::make_shared<llm::ChatAgent>("oracle", llm::ChatParams{}, backend, dir);
    auto decider_q = [&](const std::string& g) {
        return prompt::instantiate(*oracle_pack.decider_p, {{"g", g}, {"context", "topic"}});
    };
    auto rater_q = [&](const std::string& g) {
        return prompt::instantiate(*rater_pack.rater_p, {{"g", g}, {"context", "topic"}});
    };
    backend->add(decider_q("exact"), "True.");
    backend->add(decider_q("bare"), "True");
    backend->add(decider_q("negative"), "False.");
    backend->add(decider_q("waffle"), "probably");
    backend->add(rater_q("high"), "59.3");
    backend->add(rater_q("low"), "35.81");

    using engine::Goal;
    expect(refine::decider_appraise(*oracle, oracle_pack, Goal{"exact"}, "topic").accepted,
           "decider must accept exactly 'True.'");
    expect(!refine::decider_appraise(*oracle, oracle_pack, Goal{"bare"}, "topic").accepted,
           "decider must reject 'True' without the period");
    expect(!refine::decider_appraise(*oracle, oracle_pack, Goal{"negative"}, "topic").accepted,
           "decider must reject 'False.'");
    expect(!refine::decider_appraise(*oracle, oracle_pack, Goal{"waffle"}, "topic").accepted,
           "decider must reject chatter");

    auto high = refine::rater_appraise(*oracle, rater_pack, Goal{"high"}, "topic", 0.5);
    expect(high.accepted && std::abs(*high.score - 0.593) < 1e-9,
           "rater must map 59.3 to accepted 0.593");
    auto low = refine::rater_appraise(*oracle, rater_pack, Goal{"low"}, "topic", 0.5);
    expect(!low.accepted && std::abs(*low.score - 0.3581) < 1e-9,
           "rater must map 35.81 to rejected 0.3581");

    auto store = std::make_shared<truth::TruthStore>(std::make_shared<truth::HashEmbedder>(32));
    store->add_facts({"dark energy drives cosmic expansion", "vacuum energy density is constant",
                      "quantum fields permeate spacetime"});
    engine::Goal boundary_goal{"dark energy density"};
    double rate = *refine::semantic_appraise(*store, boundary_goal, 0.0).score;
    expect(rate > 0.0, "boundary fixture needs a positive rate");
    expect(!refine::semantic_appraise(*store, boundary_goal, rate).accepted,
           "semantic appraisal must reject at rate == threshold");
    expect(refine::semantic_appraise(*store, boundary_goal, rate - 1e-9).accepted,
           "semantic appraisal must accept just under the rate");

    std::mt19937 rng(6060);
    const std::vector<std::string> lexicon{"dark", "energy", "vacuum", "cosmic", "field",
                                           "expansion", "universe", "constant", "quantum",
                                           "density", "inflation", "redshift"};
    auto sentence = [&](int max_words) {
        std::uniform_int_distribution<int> len(1, max_words);
        std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
        std::string s;
        for (int i = 0, n = len(rng); i < n; ++i) {
            if (i) s += ' ';
            s += lexicon[pick(rng)];
        }
        return s;
    };
    std::uniform_real_distribution<double> th(0.0, 1.0);
    std::uniform_int_distribution<int> store_size(1, 10);
    for (int i = 0; i < 200; ++i) {
        auto random_store =
            std::make_shared<truth::TruthStore>(std::make_shared<truth::HashEmbedder>(32));
        std::vector<std::string> facts;
        for (int f = 0, n = store_size(rng); f < n; ++f) facts.push_back(sentence(5));
        random_store->add_facts(facts);
        engine::Goal g{sentence(5)};
        double threshold = th(rng);
        auto s = refine::semantic_appraise(*random_store, g, threshold);
        auto k = refine::knn_appraise(*random_store, g, 1, threshold);
        expect(s.accepted == k.accepted && std::abs(*s.score - *k.score) < 1e-12,
               "knn(k=1) must equal semantic at pair " + std::to_string(i));
    }
}

// ---- criterion 7: determinism ----------------------------------------------

void determinism() {
    fs::path out_a = scratch("c7a");
    fs::path out_b = scratch("c7b");
    const std::string config = (g_goldens / "logic_programming" / "config.json").string();
    expect(run_cli("run " + config + " --out " + out_a.string()) == 0, "first run failed");
    expect(run_cli("run " + config + " --out " + out_b.string()) == 0, "second run failed");

    for (const char* name : {"trace.txt", "program.pl", "model.txt", "costs.txt"})
        expect(slurp(out_a / name) == slurp(out_b / name),
               std::string(name) + " differs between consecutive runs");

    std::string costs = slurp(out_a / "costs.txt");
    expect(costs.find("TOTAL - 0 0 0") != std::string::npos,
           "replay run must incur zero incremental cost");
}

// ---- criterion 8: prompt fidelity ------------------------------------------

void prompt_fidelity() {
    prompt::PackRegistry registry = prompt::PackRegistry::builtin();

    struct Case {
        const char* pack;
        const char* which;
        std::string original;  // template wording with $-placeholders
    };
    const std::vector<Case> cases = {
        {"causal", "and_p",
         "We need causal explanations in this context: \"$context\" "
         "Generate 3-5 explanations of 2-4 words each for the causes of \"$g\". "
         "Itemize your answer, one reason for \"$g\" per line. "
         "No explanations needed, just the 2-4 words noun phrase, nothing else. "
         "Your answer should not contain \":\" or \"Cause\"."},
        {"causal", "or_p",
         "We need causal explanations in this context: \"$context\" "
         "Generate 2-3 alternative explanations citing facts that might cause \"$g\". "
         "Itemize your answer, one noun phrase per line. "
         "No explanations needed, just the noun phrase, nothing else. "
         "Avoid starting your sentence with the word \"Alternative\". "
         "Your answer should not contain \":\" . "
         "Your answer should avoid the words \"Causes\" and \"causes\" ."},
        {"sci", "and_p",
         "The task we are exploring is: \"$context\" "
         "Generate 3-5 noun phrases of 2-4 words each that occur as keyphrases only in "
         "scientific papers bout \"$g\". "
         "Itemize your answer, one noun phrase per line. "
         "No explanations needed, just the noun phrase, nothing else."},
        {"sci", "or_p",
         "The topic we are exploring is: \"$context\" "
         "Generate 2-3 noun phrases describing details of \"$g\". "
         "Itemize your answer, one noun phrase per line. "
         "No explanations needed, just the noun phrase, nothing else."},
        {"oracle", "decider_p",
         "You play the role of an oracle that decides if \"$g\" is relevant for our interest "
         "in \"$context\". "
         "Your answer should be \"True\" or \"False\" expressing agreement or disagreement "
         "with the relevance of \"$g\"."},
    };

    const std::map<std::string, std::string> bindings{{"g", "Biased AI"},
                                                      {"context", "Biased AI"}};
    for (const auto& c : cases) {
        const prompt::PromptPack& pack = registry.get(c.pack);
        const prompt::PromptTemplate* tmpl = nullptr;
        if (std::string(c.which) == "and_p") tmpl = &pack.and_p;
        if (std::string(c.which) == "or_p") tmpl = &pack.or_p;
        if (std::string(c.which) == "decider_p") tmpl = &*pack.decider_p;
        std::string actual = squash_ws(prompt::instantiate(*tmpl, bindings));
        std::string expected = squash_ws(
            replace_all(replace_all(c.original, "$context", "Biased AI"), "$g", "Biased AI"));
        expect(actual == expected,
               std::string(c.pack) + "." + c.which + " drifted from its original wording");
    }
}

// ---- criterion 9: round-trip -----------------------------------------------

void round_trip_one(const std::string& text, const std::string& label) {
    horn::HornProgram p = horn::parse_prolog(text);
    std::string canonical = horn::emit_annotated(p);
    horn::HornProgram q = horn::parse_prolog(canonical);
    expect(horn::emit_annotated(q) == canonical, label + ": emit not a fixpoint after parse");
    expect(p.size() == q.size(), label + ": clause count drifted");
    auto keys = [](const horn::HornProgram& prog) {
        std::multiset<std::string> out;
        for (const auto& c : prog.clauses()) {
            std::string key = c.head;
            for (const auto& b : c.body) key += "|" + b;
            out.insert(std::move(key));
        }
        return out;
    };
    expect(keys(p) == keys(q), label + ": clause set drifted");
}

void round_trip() {
    round_trip_one(fixtures::kLogicProgram, "golden program");
    round_trip_one(slurp(g_goldens / "annotated_program.pl"), "annotated golden");

    fs::path out = scratch("c9");
    expect(run_cli("run " + (g_goldens / "logic_programming" / "config.json").string() +
                   " --out " + out.string()) == 0,
           "replay run for corpus failed");
    round_trip_one(slurp(out / "program.pl"), "replayed program");

    std::mt19937 rng(9090);
    for (int i = 0; i < 500; ++i) {
        horn::HornProgram p = oracles::random_program(rng);
        round_trip_one(horn::emit_prolog(p), "random program " + std::to_string(i));
    }
}

// ---- criterion 10: jaccard tool --------------------------------------------

void jaccard_tool() {
    using horn::model_jaccard;
    std::set<std::string> ab{"a", "b"}, bc{"b", "c"};
    expect(model_jaccard(ab, ab) == 0.0, "identical sets must be at distance 0");
    expect(model_jaccard({"a"}, {"z"}) == 1.0, "disjoint sets must be at distance 1");
    expect(std::abs(model_jaccard(ab, bc) - 2.0 / 3.0) < 1e-12, "{a,b} vs {b,c} must be 2/3");

    std::mt19937 rng(1010);
    std::uniform_int_distribution<int> pick(0, 9);
    for (int i = 0; i < 100; ++i) {
        std::set<std::string> a, b;
        for (int k = 0; k < 6; ++k) {
            a.insert("m" + std::to_string(pick(rng)));
            b.insert("m" + std::to_string(pick(rng)));
        }
        expect(model_jaccard(a, b) == model_jaccard(b, a),
               "jaccard must be symmetric at pair " + std::to_string(i));
    }
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> fn;
    long budget_ms;  // 0 = untimed
};

}  // namespace

int main(int argc, char** argv) {
    g_cli = "andor";
#ifdef ANDOR_SOURCE_DIR
    g_goldens = fs::path(ANDOR_SOURCE_DIR) / "goldens";
#endif
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        if (flag == "--cli") g_cli = argv[i + 1];
        if (flag == "--goldens") g_goldens = argv[i + 1];
    }

    const std::vector<Criterion> criteria = {
        {1, "golden replay reproduction", golden_replay, 5000},
        {2, "solver oracle equivalence", solver_oracle_equivalence, 10000},
        {3, "solver scalability", solver_scalability, 0},  // budget checked inside
        {4, "constraint semantics", constraint_semantics, 0},
        {5, "engine equivalence", engine_equivalence, 0},
        {6, "refiner contracts", refiner_contracts, 0},
        {7, "determinism", determinism, 0},
        {8, "prompt fidelity", prompt_fidelity, 0},
        {9, "round-trip", round_trip, 0},
        {10, "jaccard tool", jaccard_tool, 0},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            c.fn();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        if (ok && c.budget_ms > 0 && ms > c.budget_ms) {
            ok = false;
            detail = "took " + std::to_string(ms) + " ms, budget " +
                     std::to_string(c.budget_ms) + " ms";
        }
        std::printf("[%2d] %-32s %s (%ld ms)\n", c.id, c.name, ok ? "PASS" : "FAIL", ms);
        if (!ok) {
            std::printf("     %s\n", detail.c_str());
            ++failures;
        }
    }
    return failures;
}
