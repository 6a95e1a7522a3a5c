#pragma once

// The recursive descent at the heart of the system. Starting from one
// initiator goal, an OR step asks the LLM for alternative ways to make
// progress and an AND step decomposes each alternative into subgoals; the
// engine alternates the two down to a depth limit, where the pending goals
// become abducibles vetted by an appraisal strategy. Every step is recorded
// as a propositional Horn clause and every accepted abducible yields an
// answer carrying its full justification trace.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "andor/gateway.hpp"
#include "andor/horn.hpp"
#include "andor/prompts.hpp"

namespace andor::engine {

using prompt::Goal;
using prompt::Trace;

struct ClausePair {
    Goal head;
    std::vector<Goal> body;
};

struct Answer {
    Trace trace;     // initiator first, abducible last
    Goal abducible;
    bool assumed;    // false when ground-truth evidence backs the abducible
};

struct Appraisal {
    bool accepted = true;
    std::optional<double> score;        // in [0,1] when present
    std::optional<std::string> evidence;
};

// Strategy consulted for every abducible (and, in continual mode, for every
// invented clause head). The base strategy assumes everything.
class Appraiser {
public:
    virtual ~Appraiser() = default;
    virtual Appraisal appraise(const Goal& g, const Trace& trace, const Goal& topgoal) = 0;
};

class AssumeAll : public Appraiser {
public:
    Appraisal appraise(const Goal&, const Trace&, const Goal&) override { return {}; }
};

// Produces OR alternatives and AND decompositions for a goal in a context.
class Unfolder {
public:
    virtual ~Unfolder() = default;
    virtual std::vector<Goal> ask_or(const Goal& g, const std::string& context) = 0;
    virtual std::vector<Goal> ask_and(const Goal& h, const std::string& context) = 0;
};

// Unfolder over two chat agents sharing one prompt pack. Malformed or failed
// responses kill only the branch (empty result); a ReplayMiss propagates so
// broken replays stay loud.
class LlmUnfolder : public Unfolder {
public:
    LlmUnfolder(std::shared_ptr<llm::ChatAgent> or_agent, std::shared_ptr<llm::ChatAgent> and_agent,
                prompt::PromptPack pack);

    std::vector<Goal> ask_or(const Goal& g, const std::string& context) override;
    std::vector<Goal> ask_and(const Goal& h, const std::string& context) override;

    llm::ChatAgent& or_agent() { return *or_agent_; }
    llm::ChatAgent& and_agent() { return *and_agent_; }
    const prompt::PromptPack& pack() const { return pack_; }

private:
    std::vector<Goal> ask(llm::ChatAgent& agent, const prompt::PromptTemplate& tmpl, const Goal& g,
                          const std::string& context);

    std::shared_ptr<llm::ChatAgent> or_agent_;
    std::shared_ptr<llm::ChatAgent> and_agent_;
    prompt::PromptPack pack_;
};

// Fixed maps from goal to alternatives/subgoals; the offline stand-in for
// scripted exploration trees in tests.
class ScriptedUnfolder : public Unfolder {
public:
    ScriptedUnfolder(std::map<std::string, std::vector<std::string>> or_map,
                     std::map<std::string, std::vector<std::string>> and_map)
        : or_map_(std::move(or_map)), and_map_(std::move(and_map)) {}

    std::vector<Goal> ask_or(const Goal& g, const std::string&) override { return lookup(or_map_, g); }
    std::vector<Goal> ask_and(const Goal& h, const std::string&) override { return lookup(and_map_, h); }

private:
    static std::vector<Goal> lookup(const std::map<std::string, std::vector<std::string>>& m,
                                    const Goal& g);
    std::map<std::string, std::vector<std::string>> or_map_;
    std::map<std::string, std::vector<std::string>> and_map_;
};

// Return false to stop the descent after the current answer.
using AnswerSink = std::function<bool(const Answer&)>;

struct EngineOptions {
    // Attach appraisal scores as clause probabilities on accepted abducibles.
    bool annotate_probability = false;
    // Consult the appraiser for every invented clause head, not only at the
    // depth limit; rejected heads are fail-marked and their subtrees skipped.
    bool continual_filter = false;
};

// State and stepping shared by both engines: clause recording, appraisal at
// the depth limit and the OR/AND expansion of a single goal.
class EngineBase {
public:
    EngineBase(Unfolder& unfolder, EngineOptions options = {});
    virtual ~EngineBase() = default;

    void set_appraiser(std::shared_ptr<Appraiser> appraiser);
    const EngineOptions& options() const { return options_; }
    void set_options(EngineOptions options) { options_ = options; }

    // Clause invention for one goal: records the OR clauses as soon as the
    // alternatives arrive, then one AND clause per head with a nonempty body.
    // Heads rejected by the continual filter are fail-marked and skipped.
    std::vector<ClausePair> new_clause(const Goal& g, const Trace& trace, const Goal& topgoal);

    const horn::HornProgram& recorded_program() const { return program_; }

protected:
    // Depth-limit handling: appraise, record the abducible (fact, evidence
    // clause or fail marker) and emit the answer. Returns sink's verdict.
    bool leaf(const Goal& g, const Trace& trace, const Goal& topgoal, const AnswerSink& sink);

    Unfolder& unfolder_;
    EngineOptions options_;
    std::shared_ptr<Appraiser> appraiser_ = std::make_shared<AssumeAll>();
    horn::HornProgram program_;
};

// Depth-first explorer on the host stack; answers stream through the sink in
// discovery order and the descent stops early when the sink returns false.
class AndOrExplorer : public EngineBase {
public:
    using EngineBase::EngineBase;

    void solve(const Goal& initiator, int max_depth, const AnswerSink& sink);
    std::vector<Answer> solve_all(const Goal& initiator, int max_depth);

private:
    bool descend(const Goal& g, int depth, const Trace& trace, const Goal& topgoal,
                 const AnswerSink& sink);
};

struct GoalStackFrame {
    Goal goal;
    int depth;  // remaining depth budget at this goal
    Trace trace;
    std::vector<Goal> siblings_pending;  // same-clause goals still to explore
};

// The same descent driven by an explicit goal stack instead of recursion;
// answer sets and recorded programs match AndOrExplorer on equal inputs.
class GoalStacker : public EngineBase {
public:
    using EngineBase::EngineBase;

    void solve(const Goal& initiator, int max_depth, const AnswerSink& sink);
    std::vector<Answer> solve_all(const Goal& initiator, int max_depth);
};

// One TRACE block: "TRACE:", one goal per line, then a blank line.
void write_trace_block(std::ostream& out, const Answer& answer);

}  // namespace andor::engine
