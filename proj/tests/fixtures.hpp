#pragma once

// Shared golden fixtures for the "Logic Programming" run: the compiled
// program exactly as the CLI emits it and the 19-atom model it induces.

#include <set>
#include <string>
#include <vector>

namespace fixtures {

inline const char* kLogicProgram =
    "'Logic Programming' :-\n"
    "    'Symbolic reasoning'.\n"
    "'Logic Programming' :-\n"
    "    'Rule-based systems'.\n"
    "'Logic Programming' :-\n"
    "    'Predicate calculus'.\n"
    "'Symbolic reasoning' :-\n"
    "    'Symbolic representation learning',\n"
    "    'Knowledge-based systems',\n"
    "    'Automated theorem proving',\n"
    "    'First-order logic inference',\n"
    "    'Semantic networks'.\n"
    "'Rule-based systems' :-\n"
    "    'Knowledge representation formalisms',\n"
    "    'Inference engine mechanisms',\n"
    "    'Production rule systems',\n"
    "    'Expert system development',\n"
    "    'Semantic reasoning algorithms'.\n"
    "'Predicate calculus' :-\n"
    "    'Quantifier elimination',\n"
    "    'First-order logic',\n"
    "    'Skolemization process',\n"
    "    'Resolution principle',\n"
    "    'Herbrand universe'.\n"
    "'Symbolic representation learning'.\n"
    "'Knowledge-based systems'.\n"
    "'Automated theorem proving'.\n"
    "'First-order logic inference'.\n"
    "'Semantic networks'.\n"
    "'Knowledge representation formalisms'.\n"
    "'Inference engine mechanisms'.\n"
    "'Production rule systems'.\n"
    "'Expert system development'.\n"
    "'Semantic reasoning algorithms'.\n"
    "'Quantifier elimination'.\n"
    "'First-order logic'.\n"
    "'Skolemization process'.\n"
    "'Resolution principle'.\n"
    "'Herbrand universe'.\n";

inline std::set<std::string> logic_model() {
    return {
        "Automated theorem proving",
        "Expert system development",
        "First-order logic",
        "First-order logic inference",
        "Herbrand universe",
        "Inference engine mechanisms",
        "Knowledge representation formalisms",
        "Knowledge-based systems",
        "Logic Programming",
        "Predicate calculus",
        "Production rule systems",
        "Quantifier elimination",
        "Resolution principle",
        "Rule-based systems",
        "Semantic networks",
        "Semantic reasoning algorithms",
        "Skolemization process",
        "Symbolic reasoning",
        "Symbolic representation learning",
    };
}

// OR alternatives and AND decompositions the replayed run steps through.
inline const std::vector<std::string> kLogicHeads = {
    "Symbolic reasoning",
    "Rule-based systems",
    "Predicate calculus",
};

inline const std::vector<std::vector<std::string>> kLogicBodies = {
    {"Symbolic representation learning", "Knowledge-based systems", "Automated theorem proving",
     "First-order logic inference", "Semantic networks"},
    {"Knowledge representation formalisms", "Inference engine mechanisms",
     "Production rule systems", "Expert system development", "Semantic reasoning algorithms"},
    {"Quantifier elimination", "First-order logic", "Skolemization process",
     "Resolution principle", "Herbrand universe"},
};

}  // namespace fixtures
