#pragma once

// Ground-truth fact storage: sentences paired with unit-norm embeddings and
// exact brute-force cosine nearest-neighbor search. Rates are normalized dot
// products in [-1,1]; clamped to [0,1] they double as probabilities.

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "andor/gateway.hpp"

namespace andor::truth {

struct EmbeddingError : std::runtime_error {
    explicit EmbeddingError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::runtime_error {
    DimensionError(std::size_t got, std::size_t want)
        : std::runtime_error("embedding dimension " + std::to_string(got) + " does not match " +
                             std::to_string(want)) {}
};

struct EmptyStore : std::runtime_error {
    EmptyStore() : std::runtime_error("query against an empty truth store") {}
};

using Vec = std::vector<float>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // Unit-normalized, deterministic per provider. Throws EmbeddingError.
    virtual Vec embed(const std::string& text) = 0;
    virtual int dimension() const = 0;
};

// Offline deterministic embedder: lowercased word tokens are hashed into
// signed buckets and the result normalized. Not semantic, but stable across
// platforms, which is what tests and replays need.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(int dimension = 64, std::uint64_t seed = 0x5eedULL);
    Vec embed(const std::string& text) override;
    int dimension() const override { return dimension_; }

private:
    int dimension_;
    std::uint64_t seed_;
};

// Remote embeddings endpoint speaking the standard JSON protocol
// ({"model", "input"} -> data[0].embedding).
class ApiEmbedder : public EmbeddingProvider {
public:
    ApiEmbedder(llm::Transport transport, std::string model, int dimension);
    Vec embed(const std::string& text) override;
    int dimension() const override { return dimension_; }

private:
    llm::Transport transport_;
    std::string model_;
    int dimension_;
};

struct FactRecord {
    std::string sentence;
    Vec vector;
    std::optional<std::string> source;
};

struct QueryResult {
    std::vector<double> rates;           // descending, in [-1, 1]
    std::vector<std::string> neighbors;  // aligned with rates
};

class TruthStore {
public:
    explicit TruthStore(std::shared_ptr<EmbeddingProvider> provider);

    // Embeds and inserts each distinct sentence; exact-text duplicates are
    // skipped. Returns the number actually inserted.
    int add_facts(const std::vector<std::string>& sentences,
                  const std::optional<std::string>& source = std::nullopt);

    // Exact top-k by normalized dot product, ties broken by insertion order.
    QueryResult qa(const std::string& goal, int top_k) const;

    std::size_t size() const { return facts_.size(); }
    const std::vector<FactRecord>& facts() const { return facts_; }
    int dimension() const;

    // Two-part textual file: header, escaped sentences, then a vector table.
    void save(const std::filesystem::path& path) const;
    static TruthStore load(const std::filesystem::path& path,
                           std::shared_ptr<EmbeddingProvider> provider);

private:
    std::shared_ptr<EmbeddingProvider> provider_;
    std::vector<FactRecord> facts_;
    std::unordered_set<std::string> seen_;
};

// Sentence splitter over '.', '?' and '!' boundaries; a terminator only ends
// a sentence when at least three words have accumulated, which keeps
// abbreviations like "Dr." glued to their sentence. Duplicates dropped.
std::vector<std::string> ingest_document(std::string_view text);

}  // namespace andor::truth
