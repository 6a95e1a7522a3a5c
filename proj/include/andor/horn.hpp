#pragma once

// Propositional Horn clause programs: ground Prolog-subset emission and
// parsing, linear-time minimal model computation with integrity constraints,
// and Jaccard distance between models.
//
// Two atom names are reserved: "false" may only appear as the head of an
// integrity constraint, and "fail" may only appear in clause bodies and is
// never derivable, so a clause `g :- fail.` is inert in model computation.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace andor::horn {

inline constexpr const char* kFail = "fail";
inline constexpr const char* kFalse = "false";

inline bool is_reserved(std::string_view atom) {
    return atom == kFail || atom == kFalse;
}

struct EmptyAtom : std::runtime_error {
    EmptyAtom() : std::runtime_error("atom is empty after normalization") {}
};

struct InvalidClause : std::runtime_error {
    explicit InvalidClause(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& what, int line_, int column_)
        : std::runtime_error(what + " at line " + std::to_string(line_) + ", column " +
                             std::to_string(column_)),
          line(line_),
          column(column_) {}
};

// Trims, collapses whitespace runs to single spaces, strips one trailing
// period and replaces apostrophes with spaces (so atoms never need quoting
// escapes). Case is preserved. Throws EmptyAtom when nothing remains.
std::string normalize_atom(std::string_view raw);

struct HornClause {
    std::string head;               // kFalse marks an integrity constraint
    std::vector<std::string> body;  // empty body = fact
    std::optional<double> probability;

    bool is_fact() const { return body.empty(); }
    bool is_constraint() const { return head == kFalse; }
};

bool operator==(const HornClause& a, const HornClause& b);

// Ordered, duplicate-free clause list. Clause identity is the head plus the
// body as a multiset; probabilities do not participate in identity.
class HornProgram {
public:
    // Returns true when the clause was new. Throws InvalidClause for a `fail`
    // head, a reserved-head fact, or a probability outside (0,1].
    bool add_clause(std::string head, std::vector<std::string> body,
                    std::optional<double> probability = std::nullopt);

    const std::vector<HornClause>& clauses() const { return clauses_; }
    std::size_t size() const { return clauses_.size(); }
    bool empty() const { return clauses_.empty(); }
    std::size_t rule_count() const;
    std::size_t fact_count() const;

private:
    std::vector<HornClause> clauses_;
    std::unordered_set<std::string> seen_;
};

bool operator==(const HornProgram& a, const HornProgram& b);

struct ModelResult {
    std::set<std::string> model;
    bool satisfiable = true;
    std::vector<HornClause> violated_constraints;
};

struct SolveOptions {
    bool strict_constraints = false;
    // Stop forward chaining as soon as this atom is derived. Ignored in
    // strict mode, where constraint checking always runs to completion.
    std::optional<std::string> stop_on_atom;
};

// Least-model computation by counter-based forward chaining: per-clause
// unsatisfied-body counters, an atom-to-occurrence index and a worklist give
// time linear in the total program size. Constraints whose bodies become
// fully true are reported in violated_constraints; satisfiable is false only
// in strict mode.
ModelResult minimal_model(const HornProgram& program, const SolveOptions& options = {});

// True iff the goal is in the non-strict minimal model: support holds even
// when constraints are violated in unrelated parts of the program.
bool goal_supported(const HornProgram& program, const std::string& goal,
                    bool stop_early = false);

// 1 - |a n b| / |a u b|; 0 when both sets are empty.
double model_jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Probability with at most four decimals, at least one ("0.593", "1.0").
std::string format_probability(double p);

// Ground Prolog subset: atoms always single-quoted, rule bodies one atom per
// line indented four spaces, facts emitted after rules, insertion order kept.
std::string emit_prolog(const HornProgram& program);

// As emit_prolog but clauses carrying a probability get a `p::` prefix.
std::string emit_annotated(const HornProgram& program);

// Inverse of emit_prolog on its image; also accepts `p::` prefixes and
// %-to-end-of-line comments. Throws ParseError with location on violations.
HornProgram parse_prolog(std::string_view text);

}  // namespace andor::horn
