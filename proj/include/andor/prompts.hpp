#pragma once

// Prompt templates with $-variable substitution, the built-in pack registry,
// trace-to-context serialization and parsing of itemized LLM answers into
// clean goal phrases.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "andor/horn.hpp"

namespace andor::prompt {

struct UnboundPlaceholder : std::runtime_error {
    std::string placeholder;
    explicit UnboundPlaceholder(std::string name)
        : std::runtime_error("no binding for placeholder '$" + name + "'"),
          placeholder(std::move(name)) {}
};

struct MalformedResponse : std::runtime_error {
    explicit MalformedResponse(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownPack : std::runtime_error {
    explicit UnknownPack(const std::string& name)
        : std::runtime_error("unknown prompt pack '" + name + "'") {}
};

// A goal phrase, normalized through horn::normalize_atom so goals and the
// atoms of the compiled program are the same strings.
struct Goal {
    std::string text;
    auto operator<=>(const Goal&) const = default;
};

inline Goal make_goal(std::string_view raw) { return Goal{horn::normalize_atom(raw)}; }

// Chronological goal path, oldest first; on a completed answer the initiator
// is at the front and the abducible at the back.
using Trace = std::vector<Goal>;

struct PromptTemplate {
    std::string body;
};

// Placeholder names appearing in the template ($ followed by an identifier).
std::vector<std::string> placeholders(const PromptTemplate& tmpl);

// Replaces each $name with its binding, single pass, everything else kept
// byte-exact. Throws UnboundPlaceholder for a placeholder with no binding.
std::string instantiate(const PromptTemplate& tmpl,
                        const std::map<std::string, std::string>& bindings);

struct ResponseConstraints {
    std::vector<std::string> forbidden_substrings;
    std::vector<std::string> forbidden_line_prefixes;
    int min_items = 1;
    int max_items = 10;
};

struct PromptPack {
    std::string name;
    PromptTemplate and_p;
    PromptTemplate or_p;
    std::optional<PromptTemplate> decider_p;
    std::optional<PromptTemplate> rater_p;
    // Optional follow-up question an oracle answers with an evidence sentence.
    std::optional<PromptTemplate> explain_p;
    ResponseConstraints constraints;
};

// Splits an itemized answer on line boundaries, strips bullet markers
// ("-", "*", "•", "1.", "1)"), surrounding whitespace and trailing periods,
// drops empty and constraint-violating lines, de-duplicates keeping first
// occurrence and caps the list at max_items. Throws MalformedResponse when
// fewer than min_items lines survive.
std::vector<std::string> parse_itemized(std::string_view raw, const ResponseConstraints& c);

// "Steps so far: g1; g2. Overall we explore: "<topgoal>".", with the steps
// clause omitted for an empty trace. Deterministic for equal inputs.
std::string to_context(const Trace& trace, const Goal& topgoal);

class PackRegistry {
public:
    // Ships causal, sci, oracle, rater, recommend and repair packs.
    static PackRegistry builtin();

    const PromptPack& get(const std::string& name) const;  // throws UnknownPack
    void add(PromptPack pack);                             // replaces same-name pack

    // JSON file mapping pack name to {and_p, or_p, decider_p?, rater_p?,
    // explain_p?, forbidden_substrings?, forbidden_line_prefixes?,
    // min_items?, max_items?}.
    void load_file(const std::filesystem::path& path);

    std::vector<std::string> names() const;

private:
    std::map<std::string, PromptPack> packs_;
};

}  // namespace andor::prompt
