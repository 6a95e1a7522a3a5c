#include "andor/appraise.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>

namespace andor::refine {

Mode mode_from_string(const std::string& name) {
    if (name == "always_true") return Mode::always_true;
    if (name == "semantic") return Mode::semantic;
    if (name == "knn_semantic") return Mode::knn_semantic;
    if (name == "decider") return Mode::decider;
    if (name == "rater") return Mode::rater;
    throw ConfigError("unknown appraisal mode '" + name + "'");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::always_true: return "always_true";
        case Mode::semantic: return "semantic";
        case Mode::knn_semantic: return "knn_semantic";
        case Mode::decider: return "decider";
        case Mode::rater: return "rater";
    }
    return "always_true";
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Optional second oracle question whose reply is adopted as ground truth.
std::optional<std::string> ask_for_evidence(llm::ChatAgent& oracle,
                                            const prompt::PromptPack& pack,
                                            const engine::Goal& g, const std::string& context) {
    if (!pack.explain_p) return std::nullopt;
    try {
        std::string reply = trimmed(oracle.ask(
            prompt::instantiate(*pack.explain_p, {{"g", g.text}, {"context", context}}), ""));
        if (reply.empty()) return std::nullopt;
        return reply;
    } catch (const llm::ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << "[" << oracle.name() << "] evidence question failed: " << e.what() << "\n";
        return std::nullopt;
    }
}

}  // namespace

engine::Appraisal semantic_appraise(const truth::TruthStore& store, const engine::Goal& g,
                                    double threshold, bool capture_evidence) {
    truth::QueryResult r = store.qa(g.text, 1);
    double rate = clamp01(r.rates.at(0));
    engine::Appraisal out;
    out.accepted = rate > threshold;  // strictly greater
    out.score = rate;
    if (out.accepted && capture_evidence) out.evidence = r.neighbors.at(0);
    return out;
}

double knn_score(const std::vector<double>& rates, int k) {
    std::size_t n = std::min<std::size_t>(std::max(k, 1), rates.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += clamp01(rates[i]);
    return n ? sum / static_cast<double>(n) : 0.0;
}

engine::Appraisal knn_appraise(const truth::TruthStore& store, const engine::Goal& g, int k,
                               double threshold, bool capture_evidence) {
    truth::QueryResult r = store.qa(g.text, std::max(k, 1));
    double score = knn_score(r.rates, k);
    engine::Appraisal out;
    out.accepted = score > threshold;
    out.score = score;
    if (out.accepted && capture_evidence) out.evidence = r.neighbors.at(0);
    return out;
}

engine::Appraisal decider_appraise(llm::ChatAgent& oracle, const prompt::PromptPack& pack,
                                   const engine::Goal& g, const std::string& context,
                                   bool capture_evidence) {
    if (!pack.decider_p) throw ConfigError("pack '" + pack.name + "' has no decider template");
    std::string advice;
    try {
        advice = oracle.ask(
            prompt::instantiate(*pack.decider_p, {{"g", g.text}, {"context", context}}), "");
    } catch (const llm::ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << "[" << oracle.name() << "] decider failed, rejecting: " << e.what() << "\n";
        return engine::Appraisal{false, std::nullopt, std::nullopt};
    }
    engine::Appraisal out;
    out.accepted = trimmed(advice) == "True.";
    if (out.accepted && capture_evidence)
        out.evidence = ask_for_evidence(oracle, pack, g, context);
    return out;
}

std::optional<double> first_number(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j < text.size() && text[j] == '.') {
            ++j;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
        return std::stod(text.substr(i, j - i));
    }
    return std::nullopt;
}

engine::Appraisal rater_appraise(llm::ChatAgent& oracle, const prompt::PromptPack& pack,
                                 const engine::Goal& g, const std::string& context,
                                 double threshold, bool capture_evidence) {
    if (!pack.rater_p) throw ConfigError("pack '" + pack.name + "' has no rater template");
    std::string reply;
    try {
        reply = oracle.ask(
            prompt::instantiate(*pack.rater_p, {{"g", g.text}, {"context", context}}), "");
    } catch (const llm::ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << "[" << oracle.name() << "] rater failed, rejecting: " << e.what() << "\n";
        return engine::Appraisal{false, std::nullopt, std::nullopt};
    }
    auto number = first_number(reply);
    if (!number) {
        std::cerr << "[" << oracle.name() << "] " << MalformedRating(trimmed(reply)).what()
                  << "\n";
        return engine::Appraisal{false, std::nullopt, std::nullopt};
    }
    double probability = clamp01(std::clamp(*number, 0.0, 100.0) / 100.0);
    engine::Appraisal out;
    out.accepted = probability > threshold;
    out.score = probability;
    if (out.accepted && capture_evidence)
        out.evidence = ask_for_evidence(oracle, pack, g, context);
    return out;
}

void attach(engine::EngineBase& eng, const AppraisalConfig& config,
            std::shared_ptr<truth::TruthStore> store, std::shared_ptr<llm::ChatAgent> oracle,
            const prompt::PromptPack* oracle_pack) {
    engine::EngineOptions options = eng.options();
    options.annotate_probability = config.annotate_probability;
    options.continual_filter = config.continual;
    eng.set_options(options);

    switch (config.mode) {
        case Mode::always_true:
            eng.set_appraiser(std::make_shared<engine::AssumeAll>());
            return;
        case Mode::semantic:
            if (!store || store->size() == 0)
                throw ConfigError("semantic appraisal needs a nonempty ground-truth store");
            eng.set_appraiser(std::make_shared<SemanticAppraiser>(
                std::move(store), config.threshold, config.capture_evidence));
            return;
        case Mode::knn_semantic:
            if (!store || store->size() == 0)
                throw ConfigError("knn appraisal needs a nonempty ground-truth store");
            if (config.k < 1) throw ConfigError("knn appraisal needs k >= 1");
            eng.set_appraiser(std::make_shared<KnnAppraiser>(std::move(store), config.k,
                                                             config.threshold,
                                                             config.capture_evidence));
            return;
        case Mode::decider:
            if (!oracle || !oracle_pack)
                throw ConfigError("decider appraisal needs an oracle agent and pack");
            if (!oracle_pack->decider_p)
                throw ConfigError("pack '" + oracle_pack->name + "' has no decider template");
            eng.set_appraiser(std::make_shared<DeciderAppraiser>(std::move(oracle), *oracle_pack,
                                                                 config.capture_evidence));
            return;
        case Mode::rater:
            if (!oracle || !oracle_pack)
                throw ConfigError("rater appraisal needs an oracle agent and pack");
            if (!oracle_pack->rater_p)
                throw ConfigError("pack '" + oracle_pack->name + "' has no rater template");
            eng.set_appraiser(std::make_shared<RaterAppraiser>(
                std::move(oracle), *oracle_pack, config.threshold, config.capture_evidence));
            return;
    }
}

}  // namespace andor::refine
