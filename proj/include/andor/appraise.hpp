#pragma once

// Appraisal strategies plugged into the engines: semantic distance to
// ground-truth facts, k-nearest-neighbor averaging, and LLM decider/rater
// oracles, with optional evidence capture and probability annotation.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "andor/engine.hpp"
#include "andor/gateway.hpp"
#include "andor/prompts.hpp"
#include "andor/truth.hpp"

namespace andor::refine {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedRating : std::runtime_error {
    explicit MalformedRating(const std::string& response)
        : std::runtime_error("no numeric rating in oracle response: " + response) {}
};

enum class Mode { always_true, semantic, knn_semantic, decider, rater };

Mode mode_from_string(const std::string& name);  // throws ConfigError
std::string to_string(Mode mode);

struct AppraisalConfig {
    Mode mode = Mode::always_true;
    double threshold = 0.5;  // semantic, knn and rater modes
    int k = 3;               // knn mode
    bool capture_evidence = false;
    bool annotate_probability = false;
    bool continual = false;  // also filter every invented clause head
};

// Cosine rate of the nearest ground-truth fact, clamped to [0,1]; accepted
// on strictly greater than the threshold.
engine::Appraisal semantic_appraise(const truth::TruthStore& store, const engine::Goal& g,
                                    double threshold, bool capture_evidence = false);

// Unweighted mean of the top-k clamped rates (k capped at store size).
engine::Appraisal knn_appraise(const truth::TruthStore& store, const engine::Goal& g, int k,
                               double threshold, bool capture_evidence = false);

// Mean of already-clamped rates over the first k entries; the arithmetic
// behind knn_appraise, exposed for direct checking.
double knn_score(const std::vector<double>& rates, int k);

// Accepted iff the oracle's trimmed reply is exactly "True.".
engine::Appraisal decider_appraise(llm::ChatAgent& oracle, const prompt::PromptPack& pack,
                                   const engine::Goal& g, const std::string& context,
                                   bool capture_evidence = false);

// Parses the first decimal number of the reply as a 0-100 score; probability
// score/100 must strictly exceed the threshold.
engine::Appraisal rater_appraise(llm::ChatAgent& oracle, const prompt::PromptPack& pack,
                                 const engine::Goal& g, const std::string& context,
                                 double threshold, bool capture_evidence = false);

std::optional<double> first_number(const std::string& text);

class SemanticAppraiser : public engine::Appraiser {
public:
    SemanticAppraiser(std::shared_ptr<truth::TruthStore> store, double threshold,
                      bool capture_evidence)
        : store_(std::move(store)), threshold_(threshold), capture_(capture_evidence) {}
    engine::Appraisal appraise(const engine::Goal& g, const engine::Trace&,
                               const engine::Goal&) override {
        return semantic_appraise(*store_, g, threshold_, capture_);
    }

private:
    std::shared_ptr<truth::TruthStore> store_;
    double threshold_;
    bool capture_;
};

class KnnAppraiser : public engine::Appraiser {
public:
    KnnAppraiser(std::shared_ptr<truth::TruthStore> store, int k, double threshold,
                 bool capture_evidence)
        : store_(std::move(store)), k_(k), threshold_(threshold), capture_(capture_evidence) {}
    engine::Appraisal appraise(const engine::Goal& g, const engine::Trace&,
                               const engine::Goal&) override {
        return knn_appraise(*store_, g, k_, threshold_, capture_);
    }

private:
    std::shared_ptr<truth::TruthStore> store_;
    int k_;
    double threshold_;
    bool capture_;
};

// Oracle appraisers steer by the initiator: the context the oracle sees is
// the topgoal of the descent.
class DeciderAppraiser : public engine::Appraiser {
public:
    DeciderAppraiser(std::shared_ptr<llm::ChatAgent> oracle, prompt::PromptPack pack,
                     bool capture_evidence)
        : oracle_(std::move(oracle)), pack_(std::move(pack)), capture_(capture_evidence) {}
    engine::Appraisal appraise(const engine::Goal& g, const engine::Trace&,
                               const engine::Goal& topgoal) override {
        return decider_appraise(*oracle_, pack_, g, topgoal.text, capture_);
    }

private:
    std::shared_ptr<llm::ChatAgent> oracle_;
    prompt::PromptPack pack_;
    bool capture_;
};

class RaterAppraiser : public engine::Appraiser {
public:
    RaterAppraiser(std::shared_ptr<llm::ChatAgent> oracle, prompt::PromptPack pack,
                   double threshold, bool capture_evidence)
        : oracle_(std::move(oracle)),
          pack_(std::move(pack)),
          threshold_(threshold),
          capture_(capture_evidence) {}
    engine::Appraisal appraise(const engine::Goal& g, const engine::Trace&,
                               const engine::Goal& topgoal) override {
        return rater_appraise(*oracle_, pack_, g, topgoal.text, threshold_, capture_);
    }

private:
    std::shared_ptr<llm::ChatAgent> oracle_;
    prompt::PromptPack pack_;
    double threshold_;
    bool capture_;
};

// Wires the configured strategy into an engine: sets the appraiser plus the
// annotation and continual-filter options. Throws ConfigError when the mode's
// dependencies (store, oracle agent, oracle template) are missing.
void attach(engine::EngineBase& eng, const AppraisalConfig& config,
            std::shared_ptr<truth::TruthStore> store = nullptr,
            std::shared_ptr<llm::ChatAgent> oracle = nullptr,
            const prompt::PromptPack* oracle_pack = nullptr);

}  // namespace andor::refine
