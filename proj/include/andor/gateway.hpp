#pragma once

// Everything that talks to an LLM: chat parameters, the wire client with
// retries, persistent response caching keyed on request content, short/long
// term memory with budget trimming, and per-model cost tracking. Replay and
// scripted back-ends make every run reproducible offline.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace andor::llm {

struct BackendError : std::runtime_error {
    int status;
    BackendError(int status_, const std::string& what)
        : std::runtime_error("backend error " + std::to_string(status_) + ": " + what),
          status(status_) {}
};

struct BackendUnavailable : std::runtime_error {
    BackendUnavailable() : std::runtime_error("backend unavailable after retries") {}
};

struct ReplayMiss : std::runtime_error {
    std::string key;
    explicit ReplayMiss(std::string key_)
        : std::runtime_error("replay cache has no entry for key " + key_), key(std::move(key_)) {}
};

struct ScriptMiss : std::runtime_error {
    explicit ScriptMiss(const std::string& question)
        : std::runtime_error("scripted backend has no answer for: " + question) {}
};

struct ContextOverflow : std::runtime_error {
    ContextOverflow() : std::runtime_error("messages exceed the context token budget") {}
};

struct Message {
    std::string role;  // system | user | assistant
    std::string content;
    bool operator==(const Message&) const = default;
};

struct ChatParams {
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    int max_response_tokens = 500;
    int context_token_budget = 4000;
    std::optional<long> seed;
};

// Characters/4 heuristic; a budget bound, not a tokenizer.
int estimate_tokens(std::string_view text);
int estimate_tokens(const std::vector<Message>& messages);

// Stable content hash over model name, temperature and the ordered
// (role, content) list; independent of budgets, seeds and price tables.
std::string cache_key(const ChatParams& params, const std::vector<Message>& messages);

// The exact byte sequence cache_key hashes, for collision audits.
std::string canonical_request(const ChatParams& params, const std::vector<Message>& messages);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const ChatParams& params,
                                 const std::vector<Message>& messages) = 0;
    virtual bool is_replay() const { return false; }
};

struct HttpResponse {
    int status;
    std::string body;
};

struct TransportTimeout {};

// Issues one HTTP POST of a JSON body to the given path and returns the raw
// response; throws TransportTimeout when no response arrives.
using Transport = std::function<HttpResponse(const std::string& path, const std::string& body)>;

// Chat-completions wire client. Retries timeouts, 429 and 5xx with doubling
// backoff for up to five attempts; other statuses raise BackendError at once.
class LiveBackend : public Backend {
public:
    // Reads LLM_API_BASE and LLM_API_KEY from the environment.
    LiveBackend();
    LiveBackend(Transport transport, int backoff_start_ms);

    std::string complete(const ChatParams& params, const std::vector<Message>& messages) override;

    static constexpr int kMaxAttempts = 5;

private:
    Transport transport_;
    int backoff_start_ms_ = 1000;
};

// Serves only from the agent's cache; any actual completion request is a bug
// in the replay setup, so reaching the backend raises.
class ReplayBackend : public Backend {
public:
    std::string complete(const ChatParams&, const std::vector<Message>&) override {
        throw std::logic_error("replay backend asked for a live completion");
    }
    bool is_replay() const override { return true; }
};

// Answers from a fixed question-to-answer list matched against the user
// message content, first entry wins.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::pair<std::string, std::string>> script = {})
        : script_(std::move(script)) {}
    void add(std::string question, std::string answer) {
        script_.emplace_back(std::move(question), std::move(answer));
    }
    std::string complete(const ChatParams&, const std::vector<Message>& messages) override;

private:
    std::vector<std::pair<std::string, std::string>> script_;
};

// Key-to-answer map with concurrent readers and serialized writers.
class CacheStore {
public:
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& answer);
    std::size_t size() const;
    std::map<std::string, std::string> snapshot() const;
    void replace(std::map<std::string, std::string> entries);

private:
    std::map<std::string, std::string> entries_;
    mutable std::shared_mutex mutex_;
};

struct CostCounters {
    long long requests = 0;
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct ModelPrice {
    double prompt_per_1k = 0.0;
    double completion_per_1k = 0.0;
};
using PriceTable = std::map<std::string, ModelPrice>;

// Monotone per-model counters. Lifetime counters persist across runs; session
// counters start at zero with each agent and capture this run's increments.
class CostLedger {
public:
    void record(const std::string& model, long long prompt_tokens, long long completion_tokens);
    const std::map<std::string, CostCounters>& lifetime() const { return lifetime_; }
    const std::map<std::string, CostCounters>& session() const { return session_; }
    void restore_lifetime(std::map<std::string, CostCounters> counters);

private:
    std::map<std::string, CostCounters> lifetime_;
    std::map<std::string, CostCounters> session_;
};

struct CostRow {
    std::string model;
    CostCounters counters;
    std::optional<double> estimate;  // absent for models missing from the price table
};

std::vector<CostRow> cost_report(const std::map<std::string, CostCounters>& counters,
                                 const PriceTable& prices);

struct MessageLog {
    std::vector<Message> short_term;
    std::map<std::string, std::string> long_term;  // question -> answer
};

// Drops the oldest non-system (user, assistant) pairs until the estimated
// size fits the budget; dropped pairs are appended to `spilled`. The leading
// system message is always retained. Throws ContextOverflow when the list
// cannot be shrunk under the budget.
std::vector<Message> trim_messages(std::vector<Message> messages, int budget,
                                   std::vector<std::pair<std::string, std::string>>* spilled);

// One named conversation endpoint: a cache, a message log and a ledger around
// a back-end. State persists to <cache_dir>/<name>.json as readable JSON.
class ChatAgent {
public:
    ChatAgent(std::string name, ChatParams params, std::shared_ptr<Backend> backend,
              std::filesystem::path cache_dir);

    // Sends system = context (when nonempty) plus user = question. A cache
    // hit returns without backend contact and without ledger charges.
    std::string ask(const std::string& question, const std::string& context);

    // Moves every short-term exchange into long-term memory.
    void spill();

    void persist() const;
    void resume();
    void clear();

    const std::string& name() const { return name_; }
    const ChatParams& params() const { return params_; }
    const CostLedger& ledger() const { return ledger_; }
    const CacheStore& cache() const { return cache_; }
    const MessageLog& log() const { return log_; }
    std::filesystem::path state_path() const;

private:
    std::string name_;
    ChatParams params_;
    std::shared_ptr<Backend> backend_;
    std::filesystem::path cache_dir_;
    CacheStore cache_;
    MessageLog log_;
    CostLedger ledger_;
};

}  // namespace andor::llm
