#include "andor/horn.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <queue>
#include <unordered_map>

namespace andor::horn {

namespace {

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

}  // namespace

std::string normalize_atom(std::string_view raw) {
    std::string s = collapse_whitespace(raw);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
        while (!s.empty() && s.back() == ' ') s.pop_back();
    }
    if (s.find('\'') != std::string::npos) {
        for (char& c : s)
            if (c == '\'') c = ' ';
        s = collapse_whitespace(s);
    }
    if (s.empty()) throw EmptyAtom();
    return s;
}

bool operator==(const HornClause& a, const HornClause& b) {
    return a.head == b.head && a.body == b.body && a.probability == b.probability;
}

namespace {

// Identity key: head plus body multiset, probability excluded.
std::string clause_key(const std::string& head, const std::vector<std::string>& body) {
    std::vector<std::string> sorted = body;
    std::sort(sorted.begin(), sorted.end());
    std::string key = head;
    for (const auto& b : sorted) {
        key += '\x1f';
        key += b;
    }
    return key;
}

}  // namespace

bool HornProgram::add_clause(std::string head, std::vector<std::string> body,
                             std::optional<double> probability) {
    if (head == kFail) throw InvalidClause("'fail' cannot be a clause head");
    if (head == kFalse && body.empty())
        throw InvalidClause("integrity constraint requires a nonempty body");
    if (head.empty()) throw InvalidClause("clause head is empty");
    if (probability && (*probability <= 0.0 || *probability > 1.0))
        throw InvalidClause("clause probability must be in (0,1]");
    std::string key = clause_key(head, body);
    if (!seen_.insert(std::move(key)).second) return false;
    clauses_.push_back(HornClause{std::move(head), std::move(body), probability});
    return true;
}

std::size_t HornProgram::rule_count() const {
    std::size_t n = 0;
    for (const auto& c : clauses_)
        if (!c.is_fact()) ++n;
    return n;
}

std::size_t HornProgram::fact_count() const { return clauses_.size() - rule_count(); }

bool operator==(const HornProgram& a, const HornProgram& b) {
    return a.clauses() == b.clauses();
}

ModelResult minimal_model(const HornProgram& program, const SolveOptions& options) {
    const auto& clauses = program.clauses();

    std::unordered_map<std::string, int> atom_id;
    std::vector<const std::string*> atom_name;
    auto intern = [&](const std::string& text) {
        auto [it, inserted] = atom_id.emplace(text, static_cast<int>(atom_name.size()));
        if (inserted) atom_name.push_back(&it->first);
        return it->second;
    };

    struct ClauseState {
        int unsatisfied;
        int head;  // -1 for integrity constraints
        std::size_t index;
    };
    std::vector<ClauseState> states;
    states.reserve(clauses.size());
    // occurrences[a] lists clauses once per body occurrence of a, so duplicate
    // body atoms decrement the counter the right number of times.
    std::vector<std::vector<int>> occurrences;

    for (std::size_t i = 0; i < clauses.size(); ++i) {
        const HornClause& c = clauses[i];
        int head = c.is_constraint() ? -1 : intern(c.head);
        states.push_back(ClauseState{static_cast<int>(c.body.size()), head, i});
        for (const auto& b : c.body) {
            int id = intern(b);
            if (static_cast<std::size_t>(id) >= occurrences.size())
                occurrences.resize(atom_name.size());
            occurrences[id].push_back(static_cast<int>(states.size()) - 1);
        }
    }
    occurrences.resize(atom_name.size());

    ModelResult result;
    std::vector<char> truth(atom_name.size(), 0);
    std::vector<int> worklist;
    bool stop = false;
    const bool allow_early_stop = options.stop_on_atom && !options.strict_constraints;

    auto fire = [&](const ClauseState& state) {
        if (state.head < 0) {
            result.violated_constraints.push_back(clauses[state.index]);
            return;
        }
        if (truth[state.head]) return;
        truth[state.head] = 1;
        result.model.insert(*atom_name[state.head]);
        worklist.push_back(state.head);
        if (allow_early_stop && *atom_name[state.head] == *options.stop_on_atom) stop = true;
    };

    for (const auto& state : states) {
        if (state.unsatisfied == 0) fire(state);
        if (stop) break;
    }
    for (std::size_t qi = 0; qi < worklist.size() && !stop; ++qi) {
        int atom = worklist[qi];
        for (int ci : occurrences[atom]) {
            if (--states[ci].unsatisfied == 0) fire(states[ci]);
            if (stop) break;
        }
    }

    if (options.strict_constraints) result.satisfiable = result.violated_constraints.empty();
    return result;
}

bool goal_supported(const HornProgram& program, const std::string& goal, bool stop_early) {
    SolveOptions options;
    if (stop_early) options.stop_on_atom = goal;
    return minimal_model(program, options).model.count(goal) > 0;
}

double model_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t intersection = 0;
    for (const auto& x : a)
        if (b.count(x)) ++intersection;
    std::size_t unions = a.size() + b.size() - intersection;
    return 1.0 - static_cast<double>(intersection) / static_cast<double>(unions);
}

std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", p);
    std::string s = buf;
    while (s.size() > 3 && s.back() == '0') s.pop_back();
    return s;
}

namespace {

void emit_clause(std::string& out, const HornClause& c, bool annotated) {
    if (annotated && c.probability) {
        out += format_probability(*c.probability);
        out += "::";
    }
    out += '\'';
    out += c.head;
    out += '\'';
    if (c.is_fact()) {
        out += ".\n";
        return;
    }
    out += " :-\n";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
        out += "    '";
        out += c.body[i];
        out += '\'';
        out += (i + 1 < c.body.size()) ? ",\n" : ".\n";
    }
}

std::string emit(const HornProgram& program, bool annotated) {
    std::string out;
    for (const auto& c : program.clauses())
        if (!c.is_fact()) emit_clause(out, c, annotated);
    for (const auto& c : program.clauses())
        if (c.is_fact()) emit_clause(out, c, annotated);
    return out;
}

}  // namespace

std::string emit_prolog(const HornProgram& program) { return emit(program, false); }

std::string emit_annotated(const HornProgram& program) { return emit(program, true); }

namespace {

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    enum class Kind { Atom, Number, Neck, Comma, Dot, Annotation, End };

    struct Token {
        Kind kind;
        std::string text;
        int line;
        int column;
    };

    Token next() {
        skip_blank();
        int line = line_, column = column_;
        if (eof()) return {Kind::End, "", line, column};
        char c = peek();
        if (c == '\'') return lex_atom();
        if (c == ':') {
            advance();
            if (!eof() && peek() == '-') {
                advance();
                return {Kind::Neck, ":-", line, column};
            }
            if (!eof() && peek() == ':') {
                advance();
                return {Kind::Annotation, "::", line, column};
            }
            throw ParseError("stray ':'", line, column);
        }
        if (c == ',') {
            advance();
            return {Kind::Comma, ",", line, column};
        }
        if (c == '.') {
            advance();
            return {Kind::Dot, ".", line, column};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
                // A trailing '.' not followed by a digit terminates the clause,
                // not the number ("1::'a'." style input never occurs but "1."
                // followed by end-of-clause should not swallow the dot).
                if (peek() == '.' && (pos_ + 1 >= text_.size() ||
                                      !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))))
                    break;
                num += peek();
                advance();
            }
            return {Kind::Number, num, line, column};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, column);
    }

private:
    Token lex_atom() {
        int line = line_, column = column_;
        advance();  // opening quote
        std::string content;
        while (true) {
            if (eof()) throw ParseError("unterminated atom", line, column);
            char c = peek();
            if (c == '\n') throw ParseError("newline inside atom", line_, column_);
            advance();
            if (c == '\'') break;
            content += c;
        }
        if (content.empty()) throw ParseError("empty atom", line, column);
        return {Kind::Atom, content, line, column};
    }

    void skip_blank() {
        while (!eof()) {
            char c = peek();
            if (c == '%') {
                while (!eof() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

}  // namespace

HornProgram parse_prolog(std::string_view text) {
    Lexer lexer(text);
    HornProgram program;
    Lexer::Token tok = lexer.next();
    while (tok.kind != Lexer::Kind::End) {
        std::optional<double> probability;
        if (tok.kind == Lexer::Kind::Number) {
            try {
                probability = std::stod(tok.text);
            } catch (const std::exception&) {
                throw ParseError("malformed probability '" + tok.text + "'", tok.line, tok.column);
            }
            Lexer::Token sep = lexer.next();
            if (sep.kind != Lexer::Kind::Annotation)
                throw ParseError("expected '::' after probability", sep.line, sep.column);
            tok = lexer.next();
        }
        if (tok.kind != Lexer::Kind::Atom)
            throw ParseError("expected quoted atom", tok.line, tok.column);
        std::string head = tok.text;
        int head_line = tok.line, head_column = tok.column;
        std::vector<std::string> body;
        tok = lexer.next();
        if (tok.kind == Lexer::Kind::Neck) {
            while (true) {
                Lexer::Token atom = lexer.next();
                if (atom.kind != Lexer::Kind::Atom)
                    throw ParseError("expected quoted atom in body", atom.line, atom.column);
                body.push_back(atom.text);
                tok = lexer.next();
                if (tok.kind == Lexer::Kind::Comma) continue;
                break;
            }
        }
        if (tok.kind != Lexer::Kind::Dot)
            throw ParseError("expected '.' at end of clause", tok.line, tok.column);
        try {
            program.add_clause(std::move(head), std::move(body), probability);
        } catch (const InvalidClause& e) {
            throw ParseError(e.what(), head_line, head_column);
        }
        tok = lexer.next();
    }
    return program;
}

}  // namespace andor::horn
