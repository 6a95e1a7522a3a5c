#include "andor/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

namespace andor::prompt {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<std::string> placeholders(const PromptTemplate& tmpl) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    const std::string& body = tmpl.body;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '$' || i + 1 >= body.size() || !is_ident_start(body[i + 1])) continue;
        std::size_t j = i + 1;
        while (j < body.size() && is_ident_char(body[j])) ++j;
        std::string name = body.substr(i + 1, j - i - 1);
        if (seen.insert(name).second) names.push_back(std::move(name));
        i = j - 1;
    }
    return names;
}

std::string instantiate(const PromptTemplate& tmpl,
                        const std::map<std::string, std::string>& bindings) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '$' || i + 1 >= body.size() || !is_ident_start(body[i + 1])) {
            out += body[i];
            continue;
        }
        std::size_t j = i + 1;
        while (j < body.size() && is_ident_char(body[j])) ++j;
        std::string name = body.substr(i + 1, j - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw UnboundPlaceholder(name);
        out += it->second;
        i = j - 1;
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Optional leading "-", "*", "•" or digits followed by "." or ")", then
// whitespace; anything else is content.
std::string_view strip_bullet(std::string_view line) {
    std::size_t marker = 0;
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
        marker = 1;
    } else if (line.size() >= 3 && line.substr(0, 3) == "\xe2\x80\xa2") {
        marker = 3;
    } else if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) {
        std::size_t j = 0;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j < line.size() && (line[j] == '.' || line[j] == ')')) marker = j + 1;
    }
    if (marker == 0) return line;
    if (marker >= line.size() || !std::isspace(static_cast<unsigned char>(line[marker])))
        return line;
    line.remove_prefix(marker);
    return trim(line);
}

}  // namespace

std::vector<std::string> parse_itemized(std::string_view raw, const ResponseConstraints& c) {
    std::vector<std::string> items;
    std::unordered_set<std::string> seen;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find('\n', start);
        std::string_view line =
            raw.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? raw.size() + 1 : end + 1;

        line = trim(line);
        line = strip_bullet(line);
        while (!line.empty() && line.back() == '.') line.remove_suffix(1);
        line = trim(line);
        if (line.empty()) continue;

        std::string item(line);
        bool rejected = false;
        for (const auto& bad : c.forbidden_substrings)
            if (!bad.empty() && item.find(bad) != std::string::npos) {
                rejected = true;
                break;
            }
        for (const auto& prefix : c.forbidden_line_prefixes)
            if (!rejected && !prefix.empty() && item.rfind(prefix, 0) == 0) {
                rejected = true;
                break;
            }
        if (rejected) continue;
        if (seen.insert(item).second) items.push_back(std::move(item));
    }
    if (static_cast<int>(items.size()) > c.max_items) items.resize(c.max_items);
    if (static_cast<int>(items.size()) < c.min_items)
        throw MalformedResponse("itemized answer has " + std::to_string(items.size()) +
                                " usable lines, need " + std::to_string(c.min_items));
    return items;
}

std::string to_context(const Trace& trace, const Goal& topgoal) {
    std::string out;
    if (!trace.empty()) {
        out += "Steps so far: ";
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (i) out += "; ";
            out += trace[i].text;
        }
        out += ". ";
    }
    out += "Overall we explore: \"" + topgoal.text + "\".";
    return out;
}

namespace {

PromptPack causal_pack() {
    PromptPack p;
    p.name = "causal";
    p.and_p.body =
        "We need causal explanations in this context: \"$context\"\n"
        "Generate 3-5 explanations of 2-4 words each for the causes of \"$g\".\n"
        "Itemize your answer, one reason for \"$g\" per line.\n"
        "No explanations needed, just the 2-4 words noun phrase,\n"
        "nothing else.\n"
        "Your answer should not contain \":\" or \"Cause\".\n";
    p.or_p.body =
        "We need causal explanations in this context: \"$context\"\n"
        "Generate 2-3 alternative explanations citing facts that might\n"
        "cause \"$g\".\n"
        "Itemize your answer, one noun phrase per line.\n"
        "No explanations needed, just the noun phrase, nothing else.\n"
        "Avoid starting your sentence with the word \"Alternative\".\n"
        "Your answer should not contain \":\" .\n"
        "Your answer should avoid the words \"Causes\" and \"causes\" .\n";
    p.constraints.forbidden_substrings = {":", "Cause", "causes"};
    p.constraints.forbidden_line_prefixes = {"Alternative"};
    p.constraints.min_items = 2;
    p.constraints.max_items = 5;
    return p;
}

PromptPack sci_pack() {
    PromptPack p;
    p.name = "sci";
    p.and_p.body =
        "The task we are exploring is: \"$context\"\n"
        "Generate 3-5 noun phrases of 2-4 words each that occur as\n"
        "keyphrases only in scientific papers bout \"$g\".\n"
        "Itemize your answer, one noun phrase per line.\n"
        "No explanations needed, just the noun phrase, nothing else.\n";
    p.or_p.body =
        "The topic we are exploring is: \"$context\"\n"
        "Generate 2-3 noun phrases describing details of \"$g\".\n"
        "Itemize your answer, one noun phrase per line.\n"
        "No explanations needed, just the noun phrase, nothing else.\n";
    p.constraints.min_items = 2;
    p.constraints.max_items = 5;
    return p;
}

PromptTemplate generic_and() {
    return {
        "The task we are exploring is: \"$context\"\n"
        "Generate 3-5 short noun phrases detailing what \"$g\" involves.\n"
        "Itemize your answer, one noun phrase per line.\n"
        "No explanations needed, just the noun phrase, nothing else.\n"};
}

PromptTemplate generic_or() {
    return {
        "The topic we are exploring is: \"$context\"\n"
        "Generate 2-3 alternative angles on \"$g\".\n"
        "Itemize your answer, one noun phrase per line.\n"
        "No explanations needed, just the noun phrase, nothing else.\n"};
}

PromptTemplate explain_template() {
    return {
        "State in one sentence the established fact that makes \"$g\"\n"
        "relevant to \"$context\".\n"
        "Answer with just the sentence, nothing else.\n"};
}

PromptPack oracle_pack() {
    PromptPack p;
    p.name = "oracle";
    p.and_p = generic_and();
    p.or_p = generic_or();
    p.decider_p = PromptTemplate{
        "You play the role of an oracle that decides if \"$g\" is relevant for\n"
        "our interest in \"$context\".\n"
        "Your answer should be \"True\" or \"False\" expressing agreement or\n"
        "disagreement with the relevance of \"$g\".\n"};
    p.explain_p = explain_template();
    p.constraints.min_items = 1;
    p.constraints.max_items = 5;
    return p;
}

PromptPack rater_pack() {
    PromptPack p;
    p.name = "rater";
    p.and_p = generic_and();
    p.or_p = generic_or();
    p.rater_p = PromptTemplate{
        "You play the role of an oracle that rates how relevant \"$g\" is for\n"
        "our interest in \"$context\".\n"
        "Your answer should be a single number on the 0 to 100 scale,\n"
        "nothing else.\n"};
    p.explain_p = explain_template();
    p.constraints.min_items = 1;
    p.constraints.max_items = 5;
    return p;
}

PromptPack recommend_pack() {
    PromptPack p;
    p.name = "recommend";
    p.and_p.body =
        "We collect recommendations for someone whose taste is: \"$context\"\n"
        "List 3-5 titles a fan of \"$g\" would also enjoy.\n"
        "Itemize your answer, one title per line.\n"
        "No explanations needed, just the title, nothing else.\n";
    p.or_p.body =
        "We collect recommendations for someone whose taste is: \"$context\"\n"
        "List 2-3 titles closest in spirit to \"$g\".\n"
        "Itemize your answer, one title per line.\n"
        "No explanations needed, just the title, nothing else.\n";
    p.constraints.min_items = 2;
    p.constraints.max_items = 5;
    return p;
}

PromptPack repair_pack() {
    PromptPack p;
    p.name = "repair";
    p.and_p.body =
        "We need practical repair advice in this context: \"$context\"\n"
        "List the concrete steps, in order, needed to \"$g\".\n"
        "Itemize your answer, one full imperative sentence per step,\n"
        "one step per line.\n"
        "No explanations needed, just the steps, nothing else.\n"
        "Do not suggest contacting the manufacturer or seeking an expert.\n";
    p.or_p.body =
        "We need practical repair advice in this context: \"$context\"\n"
        "Generate 2-3 alternative practical ways to \"$g\".\n"
        "Itemize your answer, one short action phrase per line.\n"
        "No explanations needed, just the action phrase, nothing else.\n";
    p.constraints.forbidden_substrings = {"contact the manufacturer", "consult a professional"};
    p.constraints.min_items = 2;
    p.constraints.max_items = 10;
    return p;
}

}  // namespace

PackRegistry PackRegistry::builtin() {
    PackRegistry r;
    r.add(causal_pack());
    r.add(sci_pack());
    r.add(oracle_pack());
    r.add(rater_pack());
    r.add(recommend_pack());
    r.add(repair_pack());
    return r;
}

const PromptPack& PackRegistry::get(const std::string& name) const {
    auto it = packs_.find(name);
    if (it == packs_.end()) throw UnknownPack(name);
    return it->second;
}

void PackRegistry::add(PromptPack pack) {
    std::string name = pack.name;
    packs_.insert_or_assign(std::move(name), std::move(pack));
}

void PackRegistry::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pack file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed pack file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("pack file must be a JSON object");
    for (const auto& [name, entry] : doc.items()) {
        PromptPack pack;
        pack.name = name;
        if (!entry.contains("and_p") || !entry.contains("or_p"))
            throw std::runtime_error("pack '" + name + "' needs both and_p and or_p");
        pack.and_p.body = entry.at("and_p").get<std::string>();
        pack.or_p.body = entry.at("or_p").get<std::string>();
        if (entry.contains("decider_p"))
            pack.decider_p = PromptTemplate{entry.at("decider_p").get<std::string>()};
        if (entry.contains("rater_p"))
            pack.rater_p = PromptTemplate{entry.at("rater_p").get<std::string>()};
        if (entry.contains("explain_p"))
            pack.explain_p = PromptTemplate{entry.at("explain_p").get<std::string>()};
        if (entry.contains("forbidden_substrings"))
            pack.constraints.forbidden_substrings =
                entry.at("forbidden_substrings").get<std::vector<std::string>>();
        if (entry.contains("forbidden_line_prefixes"))
            pack.constraints.forbidden_line_prefixes =
                entry.at("forbidden_line_prefixes").get<std::vector<std::string>>();
        if (entry.contains("min_items")) pack.constraints.min_items = entry.at("min_items");
        if (entry.contains("max_items")) pack.constraints.max_items = entry.at("max_items");
        if (pack.constraints.min_items < 1 ||
            pack.constraints.max_items < pack.constraints.min_items)
            throw std::runtime_error("pack '" + name + "' has invalid item bounds");
        add(std::move(pack));
    }
}

std::vector<std::string> PackRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : packs_) out.push_back(name);
    return out;
}

}  // namespace andor::prompt
