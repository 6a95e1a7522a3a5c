#include "andor/engine.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_set>
#include <variant>

namespace andor::engine {

namespace {

// Normalizes phrases into goals, dropping empties, reserved atom names and
// duplicates while keeping first-occurrence order.
std::vector<Goal> to_goals(const std::vector<std::string>& phrases) {
    std::vector<Goal> out;
    std::unordered_set<std::string> seen;
    for (const auto& phrase : phrases) {
        std::string text;
        try {
            text = horn::normalize_atom(phrase);
        } catch (const horn::EmptyAtom&) {
            continue;
        }
        if (horn::is_reserved(text)) continue;
        if (seen.insert(text).second) out.push_back(Goal{std::move(text)});
    }
    return out;
}

}  // namespace

LlmUnfolder::LlmUnfolder(std::shared_ptr<llm::ChatAgent> or_agent,
                         std::shared_ptr<llm::ChatAgent> and_agent, prompt::PromptPack pack)
    : or_agent_(std::move(or_agent)), and_agent_(std::move(and_agent)), pack_(std::move(pack)) {}

std::vector<Goal> LlmUnfolder::ask(llm::ChatAgent& agent, const prompt::PromptTemplate& tmpl,
                                   const Goal& g, const std::string& context) {
    const std::string question =
        prompt::instantiate(tmpl, {{"g", g.text}, {"context", context}});
    std::string raw;
    try {
        raw = agent.ask(question, "");
    } catch (const llm::ReplayMiss&) {
        throw;  // a broken replay must stop the run, not silently prune it
    } catch (const llm::ContextOverflow&) {
        throw;
    } catch (const llm::BackendError& e) {
        std::cerr << "[" << agent.name() << "] branch dropped: " << e.what() << "\n";
        return {};
    } catch (const llm::BackendUnavailable& e) {
        std::cerr << "[" << agent.name() << "] branch dropped: " << e.what() << "\n";
        return {};
    } catch (const llm::ScriptMiss& e) {
        std::cerr << "[" << agent.name() << "] branch dropped: " << e.what() << "\n";
        return {};
    }
    try {
        return to_goals(prompt::parse_itemized(raw, pack_.constraints));
    } catch (const prompt::MalformedResponse& e) {
        std::cerr << "[" << agent.name() << "] branch dropped: " << e.what() << "\n";
        return {};
    }
}

std::vector<Goal> LlmUnfolder::ask_or(const Goal& g, const std::string& context) {
    return ask(*or_agent_, pack_.or_p, g, context);
}

std::vector<Goal> LlmUnfolder::ask_and(const Goal& h, const std::string& context) {
    return ask(*and_agent_, pack_.and_p, h, context);
}

std::vector<Goal> ScriptedUnfolder::lookup(
    const std::map<std::string, std::vector<std::string>>& m, const Goal& g) {
    auto it = m.find(g.text);
    if (it == m.end()) return {};
    return to_goals(it->second);
}

EngineBase::EngineBase(Unfolder& unfolder, EngineOptions options)
    : unfolder_(unfolder), options_(options) {}

void EngineBase::set_appraiser(std::shared_ptr<Appraiser> appraiser) {
    appraiser_ = std::move(appraiser);
}

namespace {

struct Expansion {
    std::vector<Goal> heads;
    std::string and_context;
    Trace node_path;  // trace with the expanded goal prepended
};

}  // namespace

// OR step: one clause `g :- h` per alternative, recorded as soon as the
// alternatives arrive. The AND context sees the current goal prepended to
// the trace so decompositions know which step is being expanded.
static Expansion expand_heads(Unfolder& unfolder, horn::HornProgram& program, const Goal& g,
                              const Trace& trace, const Goal& topgoal) {
    Expansion exp;
    exp.heads = unfolder.ask_or(g, prompt::to_context(trace, topgoal));
    for (const Goal& h : exp.heads) program.add_clause(g.text, {h.text});
    Trace and_trace;
    and_trace.reserve(trace.size() + 1);
    and_trace.push_back(g);
    and_trace.insert(and_trace.end(), trace.begin(), trace.end());
    exp.and_context = prompt::to_context(and_trace, topgoal);
    exp.node_path = std::move(and_trace);
    return exp;
}

// AND step for one head. nullopt means the continual filter rejected the
// head (fail-marked, subtree skipped); an empty body means the response was
// unusable and the head is skipped silently.
static std::optional<std::vector<Goal>> expand_body(Unfolder& unfolder,
                                                    horn::HornProgram& program, bool continual,
                                                    const Goal& h, const Expansion& exp,
                                                    const Goal& topgoal, Appraiser& appraiser) {
    if (continual && !appraiser.appraise(h, exp.node_path, topgoal).accepted) {
        program.add_clause(h.text, {horn::kFail});
        return std::nullopt;
    }
    std::vector<Goal> body = unfolder.ask_and(h, exp.and_context);
    std::erase(body, h);  // self-loops are vacuous
    if (!body.empty()) {
        std::vector<std::string> texts;
        texts.reserve(body.size());
        for (const Goal& b : body) texts.push_back(b.text);
        program.add_clause(h.text, std::move(texts));
    }
    return body;
}

std::vector<ClausePair> EngineBase::new_clause(const Goal& g, const Trace& trace,
                                               const Goal& topgoal) {
    Expansion exp = expand_heads(unfolder_, program_, g, trace, topgoal);
    std::vector<ClausePair> out;
    for (const Goal& h : exp.heads) {
        auto body =
            expand_body(unfolder_, program_, options_.continual_filter, h, exp, topgoal,
                        *appraiser_);
        if (body && !body->empty()) out.push_back(ClausePair{h, *body});
    }
    return out;
}

bool EngineBase::leaf(const Goal& g, const Trace& trace, const Goal& topgoal,
                      const AnswerSink& sink) {
    Appraisal appraisal = appraiser_->appraise(g, trace, topgoal);
    if (!appraisal.accepted) {
        program_.add_clause(g.text, {horn::kFail});
        return true;
    }

    std::optional<double> probability;
    if (options_.annotate_probability && appraisal.score) {
        double p = std::clamp(*appraisal.score, 0.0, 1.0);
        if (p > 0.0) probability = p;
    }

    std::optional<std::string> evidence;
    if (appraisal.evidence) {
        try {
            evidence = horn::normalize_atom(*appraisal.evidence);
        } catch (const horn::EmptyAtom&) {
        }
    }

    if (evidence && *evidence != g.text) {
        program_.add_clause(g.text, {*evidence}, probability);
        program_.add_clause(*evidence, {});
    } else {
        program_.add_clause(g.text, {}, probability);
    }

    Trace full = trace;
    full.push_back(g);
    return sink(Answer{std::move(full), g, !evidence.has_value()});
}

void AndOrExplorer::solve(const Goal& initiator, int max_depth, const AnswerSink& sink) {
    descend(initiator, max_depth, {}, initiator, sink);
}

bool AndOrExplorer::descend(const Goal& g, int depth, const Trace& trace, const Goal& topgoal,
                            const AnswerSink& sink) {
    if (depth <= 0) return leaf(g, trace, topgoal, sink);
    Expansion exp = expand_heads(unfolder_, program_, g, trace, topgoal);
    for (const Goal& h : exp.heads) {
        auto body =
            expand_body(unfolder_, program_, options_.continual_filter, h, exp, topgoal,
                        *appraiser_);
        if (!body || body->empty()) continue;
        Trace child = trace;
        child.push_back(g);
        child.push_back(h);
        for (const Goal& b : *body)
            if (!descend(b, depth - 1, child, topgoal, sink)) return false;
    }
    return true;
}

std::vector<Answer> AndOrExplorer::solve_all(const Goal& initiator, int max_depth) {
    std::vector<Answer> answers;
    solve(initiator, max_depth, [&](const Answer& a) {
        answers.push_back(a);
        return true;
    });
    return answers;
}

namespace {

// The pending AND expansions of one node's remaining OR heads.
struct NodeContinuation {
    Goal node_goal;
    int depth;
    Trace trace;
    Expansion expansion;
    std::vector<Goal> heads_pending;
};

}  // namespace

void GoalStacker::solve(const Goal& initiator, int max_depth, const AnswerSink& sink) {
    using Work = std::variant<GoalStackFrame, NodeContinuation>;
    std::vector<Work> stack;
    stack.push_back(GoalStackFrame{initiator, max_depth, {}, {}});

    while (!stack.empty()) {
        Work work = std::move(stack.back());
        stack.pop_back();

        if (auto* frame = std::get_if<GoalStackFrame>(&work)) {
            if (!frame->siblings_pending.empty()) {
                // Continuation for the rest of this clause body, explored
                // after the current goal's subtree.
                stack.push_back(GoalStackFrame{
                    frame->siblings_pending.front(), frame->depth, frame->trace,
                    {frame->siblings_pending.begin() + 1, frame->siblings_pending.end()}});
            }
            if (frame->depth <= 0) {
                if (!leaf(frame->goal, frame->trace, initiator, sink)) return;
                continue;
            }
            Expansion exp = expand_heads(unfolder_, program_, frame->goal, frame->trace, initiator);
            if (exp.heads.empty()) continue;
            std::vector<Goal> heads = exp.heads;
            stack.push_back(NodeContinuation{frame->goal, frame->depth, frame->trace,
                                             std::move(exp), std::move(heads)});
        } else {
            NodeContinuation node = std::get<NodeContinuation>(std::move(work));
            Goal head = node.heads_pending.front();
            if (node.heads_pending.size() > 1) {
                NodeContinuation rest = node;
                rest.heads_pending.erase(rest.heads_pending.begin());
                stack.push_back(std::move(rest));
            }
            auto body = expand_body(unfolder_, program_, options_.continual_filter, head,
                                    node.expansion, initiator, *appraiser_);
            if (!body || body->empty()) continue;
            Trace child = node.trace;
            child.push_back(node.node_goal);
            child.push_back(head);
            stack.push_back(GoalStackFrame{(*body)[0], node.depth - 1, std::move(child),
                                           {body->begin() + 1, body->end()}});
        }
    }
}

std::vector<Answer> GoalStacker::solve_all(const Goal& initiator, int max_depth) {
    std::vector<Answer> answers;
    solve(initiator, max_depth, [&](const Answer& a) {
        answers.push_back(a);
        return true;
    });
    return answers;
}

void write_trace_block(std::ostream& out, const Answer& answer) {
    out << "TRACE:\n";
    for (const Goal& g : answer.trace) out << g.text << "\n";
    out << "\n";
}

}  // namespace andor::engine
