#include "andor/gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace andor::llm {

using nlohmann::json;

int estimate_tokens(std::string_view text) {
    return static_cast<int>((text.size() + 3) / 4);
}

int estimate_tokens(const std::vector<Message>& messages) {
    int total = 0;
    for (const auto& m : messages) total += estimate_tokens(m.role) + estimate_tokens(m.content);
    return total;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

std::string canonical_request(const ChatParams& params, const std::vector<Message>& messages) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.10g", params.temperature);
    std::string out = params.model_name;
    out += '\x1f';
    out += temp;
    for (const auto& m : messages) {
        out += '\x1e';
        out += m.role;
        out += '\x1f';
        out += m.content;
    }
    return out;
}

std::string cache_key(const ChatParams& params, const std::vector<Message>& messages) {
    std::uint64_t h = fnv1a(canonical_request(params, messages));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Splits an endpoint like "http://host:8080/v1" into client base and prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base) {
    auto scheme_end = base.find("://");
    std::size_t path_start =
        base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {base, ""};
    std::string prefix = base.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base.substr(0, path_start), prefix};
}

Transport make_http_transport(const std::string& base, const std::string& api_key) {
    auto [host, prefix] = split_base_url(base);
    return [host, prefix, api_key](const std::string& path, const std::string& body) {
        httplib::Client client(host);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post(prefix + path, headers, body, "application/json");
        if (!res) throw TransportTimeout{};
        return HttpResponse{res->status, res->body};
    };
}

}  // namespace

LiveBackend::LiveBackend() {
    const char* base = std::getenv("LLM_API_BASE");
    if (!base || !*base)
        throw std::runtime_error("live backend needs LLM_API_BASE in the environment");
    const char* key = std::getenv("LLM_API_KEY");
    transport_ = make_http_transport(base, key ? key : "");
}

LiveBackend::LiveBackend(Transport transport, int backoff_start_ms)
    : transport_(std::move(transport)), backoff_start_ms_(backoff_start_ms) {}

std::string LiveBackend::complete(const ChatParams& params,
                                  const std::vector<Message>& messages) {
    json body{
        {"model", params.model_name},
        {"temperature", params.temperature},
        {"max_tokens", params.max_response_tokens},
    };
    if (params.seed) body["seed"] = *params.seed;
    body["messages"] = json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    int delay_ms = backoff_start_ms_;
    for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
        bool transient = false;
        try {
            HttpResponse res = transport_("/chat/completions", payload);
            if (res.status == 200) {
                try {
                    json doc = json::parse(res.body);
                    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
                } catch (const json::exception& e) {
                    throw BackendError(200, std::string("malformed completion body: ") + e.what());
                }
            }
            transient = res.status == 429 || res.status >= 500;
            if (!transient) throw BackendError(res.status, res.body);
        } catch (const TransportTimeout&) {
            transient = true;
        }
        if (transient && attempt < kMaxAttempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
    }
    throw BackendUnavailable();
}

std::string ScriptedBackend::complete(const ChatParams&, const std::vector<Message>& messages) {
    const Message* user = nullptr;
    for (const auto& m : messages)
        if (m.role == "user") user = &m;
    if (!user) throw ScriptMiss("(no user message)");
    for (const auto& [question, answer] : script_)
        if (question == user->content) return answer;
    throw ScriptMiss(user->content);
}

std::optional<std::string> CacheStore::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CacheStore::put(const std::string& key, const std::string& answer) {
    std::unique_lock lock(mutex_);
    entries_[key] = answer;
}

std::size_t CacheStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::map<std::string, std::string> CacheStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

void CacheStore::replace(std::map<std::string, std::string> entries) {
    std::unique_lock lock(mutex_);
    entries_ = std::move(entries);
}

void CostLedger::record(const std::string& model, long long prompt_tokens,
                        long long completion_tokens) {
    for (auto* counters : {&lifetime_, &session_}) {
        CostCounters& c = (*counters)[model];
        c.requests += 1;
        c.prompt_tokens += prompt_tokens;
        c.completion_tokens += completion_tokens;
    }
}

void CostLedger::restore_lifetime(std::map<std::string, CostCounters> counters) {
    lifetime_ = std::move(counters);
}

std::vector<CostRow> cost_report(const std::map<std::string, CostCounters>& counters,
                                 const PriceTable& prices) {
    std::vector<CostRow> rows;
    for (const auto& [model, c] : counters) {
        CostRow row{model, c, std::nullopt};
        auto it = prices.find(model);
        if (it != prices.end())
            row.estimate = c.prompt_tokens / 1000.0 * it->second.prompt_per_1k +
                           c.completion_tokens / 1000.0 * it->second.completion_per_1k;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Message> trim_messages(std::vector<Message> messages, int budget,
                                   std::vector<std::pair<std::string, std::string>>* spilled) {
    while (estimate_tokens(messages) > budget) {
        std::size_t user_at = messages.size();
        for (std::size_t i = 0; i < messages.size(); ++i) {
            if (messages[i].role == "user") {
                user_at = i;
                break;
            }
        }
        if (user_at + 1 >= messages.size() || messages[user_at + 1].role != "assistant")
            throw ContextOverflow();
        if (spilled)
            spilled->emplace_back(messages[user_at].content, messages[user_at + 1].content);
        messages.erase(messages.begin() + user_at, messages.begin() + user_at + 2);
    }
    return messages;
}

ChatAgent::ChatAgent(std::string name, ChatParams params, std::shared_ptr<Backend> backend,
                     std::filesystem::path cache_dir)
    : name_(std::move(name)),
      params_(std::move(params)),
      backend_(std::move(backend)),
      cache_dir_(std::move(cache_dir)) {}

std::filesystem::path ChatAgent::state_path() const {
    return cache_dir_ / (name_ + ".json");
}

std::string ChatAgent::ask(const std::string& question, const std::string& context) {
    std::vector<Message> outgoing;
    if (!context.empty()) outgoing.push_back({"system", context});
    outgoing.push_back({"user", question});
    if (estimate_tokens(outgoing) > params_.context_token_budget) throw ContextOverflow();

    const std::string key = cache_key(params_, outgoing);
    std::string answer;
    if (auto hit = cache_.get(key)) {
        answer = *hit;
    } else {
        if (backend_->is_replay()) throw ReplayMiss(key);
        answer = backend_->complete(params_, outgoing);
        cache_.put(key, answer);
        ledger_.record(params_.model_name, estimate_tokens(outgoing), estimate_tokens(answer));
    }

    log_.long_term[question] = answer;
    log_.short_term.push_back({"user", question});
    log_.short_term.push_back({"assistant", answer});
    std::vector<std::pair<std::string, std::string>> spilled;
    log_.short_term = trim_messages(std::move(log_.short_term),
                                    params_.context_token_budget, &spilled);
    for (auto& [q, a] : spilled) log_.long_term[std::move(q)] = std::move(a);
    return answer;
}

void ChatAgent::spill() {
    for (std::size_t i = 0; i + 1 < log_.short_term.size(); i += 2)
        log_.long_term[log_.short_term[i].content] = log_.short_term[i + 1].content;
    log_.short_term.clear();
}

void ChatAgent::persist() const {
    json ledger_doc = json::object();
    for (const auto& [model, c] : ledger_.lifetime())
        ledger_doc[model] = {{"requests", c.requests},
                             {"prompt_tokens", c.prompt_tokens},
                             {"completion_tokens", c.completion_tokens}};
    json doc{
        {"name", name_},
        {"cache", cache_.snapshot()},
        {"long_term", log_.long_term},
        {"ledger", ledger_doc},
    };
    std::filesystem::create_directories(cache_dir_);
    std::ofstream out(state_path(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write agent state: " + state_path().string());
    out << doc.dump(2) << "\n";
}

void ChatAgent::resume() {
    std::ifstream in(state_path());
    if (!in) return;  // no saved state, keep empty
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt agent state " + state_path().string() + ": " + e.what());
    }
    cache_.replace(doc.value("cache", std::map<std::string, std::string>{}));
    log_.long_term = doc.value("long_term", std::map<std::string, std::string>{});
    std::map<std::string, CostCounters> counters;
    if (doc.contains("ledger"))
        for (const auto& [model, c] : doc.at("ledger").items())
            counters[model] = CostCounters{c.value("requests", 0LL), c.value("prompt_tokens", 0LL),
                                           c.value("completion_tokens", 0LL)};
    ledger_.restore_lifetime(std::move(counters));
}

void ChatAgent::clear() {
    std::error_code ec;
    std::filesystem::remove(state_path(), ec);
    cache_.replace({});
    log_ = MessageLog{};
    ledger_ = CostLedger{};
}

}  // namespace andor::llm
