#include "andor/truth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace andor::truth {

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

Vec normalized(std::vector<double> acc) {
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;
    double norm = std::sqrt(norm2);
    Vec out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

double dot(const Vec& a, const Vec& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return sum;
}

}  // namespace

HashEmbedder::HashEmbedder(int dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension < 2) throw EmbeddingError("embedding dimension must be at least 2");
}

Vec HashEmbedder::embed(const std::string& text) {
    if (text.empty()) throw EmbeddingError("cannot embed empty text");
    std::vector<double> acc(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t h = fnv1a(token, kFnvOffset ^ seed_);
        double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
        acc[h % dimension_] += sign;
        token.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            flush();
    }
    flush();
    // Anchor on the raw text so no input ever maps to the zero vector.
    std::uint64_t h = fnv1a(text, kFnvOffset ^ seed_ ^ 0x9e3779b97f4a7c15ULL);
    acc[h % dimension_] += ((h >> 32) & 1) ? 0.25 : -0.25;
    return normalized(std::move(acc));
}

ApiEmbedder::ApiEmbedder(llm::Transport transport, std::string model, int dimension)
    : transport_(std::move(transport)), model_(std::move(model)), dimension_(dimension) {}

Vec ApiEmbedder::embed(const std::string& text) {
    if (text.empty()) throw EmbeddingError("cannot embed empty text");
    nlohmann::json body{{"model", model_}, {"input", text}};
    llm::HttpResponse res;
    try {
        res = transport_("/embeddings", body.dump());
    } catch (const llm::TransportTimeout&) {
        throw EmbeddingError("embeddings endpoint timed out");
    }
    if (res.status != 200)
        throw EmbeddingError("embeddings endpoint returned status " + std::to_string(res.status));
    try {
        nlohmann::json doc = nlohmann::json::parse(res.body);
        auto values = doc.at("data").at(0).at("embedding").get<std::vector<double>>();
        if (static_cast<int>(values.size()) != dimension_)
            throw DimensionError(values.size(), dimension_);
        return normalized(std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw EmbeddingError(std::string("malformed embeddings body: ") + e.what());
    }
}

TruthStore::TruthStore(std::shared_ptr<EmbeddingProvider> provider)
    : provider_(std::move(provider)) {}

int TruthStore::dimension() const { return provider_ ? provider_->dimension() : 0; }

int TruthStore::add_facts(const std::vector<std::string>& sentences,
                          const std::optional<std::string>& source) {
    int added = 0;
    for (const auto& sentence : sentences) {
        if (sentence.empty()) continue;
        if (!seen_.insert(sentence).second) continue;
        Vec v = provider_->embed(sentence);
        if (!facts_.empty() && v.size() != facts_.front().vector.size())
            throw DimensionError(v.size(), facts_.front().vector.size());
        facts_.push_back(FactRecord{sentence, std::move(v), source});
        ++added;
    }
    return added;
}

QueryResult TruthStore::qa(const std::string& goal, int top_k) const {
    if (facts_.empty()) throw EmptyStore();
    if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
    Vec q = provider_->embed(goal);
    if (q.size() != facts_.front().vector.size())
        throw DimensionError(q.size(), facts_.front().vector.size());

    std::vector<std::size_t> order(facts_.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> scores(facts_.size());
    for (std::size_t i = 0; i < facts_.size(); ++i) {
        double s = dot(q, facts_[i].vector);
        scores[i] = std::clamp(s, -1.0, 1.0);
    }
    std::size_t k = std::min<std::size_t>(top_k, facts_.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;  // insertion order breaks ties
                      });

    QueryResult result;
    for (std::size_t i = 0; i < k; ++i) {
        result.rates.push_back(scores[order[i]]);
        result.neighbors.push_back(facts_[order[i]].sentence);
    }
    return result;
}

namespace {

std::string escape_line(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_line(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 >= s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            default: out += s[i];
        }
    }
    return out;
}

}  // namespace

void TruthStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write truth store: " + path.string());
    std::size_t dim = facts_.empty() ? 0 : facts_.front().vector.size();
    out << "truthstore 1\n" << "dim " << dim << "\n" << "count " << facts_.size() << "\n";
    for (const auto& f : facts_) {
        out << escape_line(f.sentence);
        if (f.source) out << "\t" << escape_line(*f.source);
        out << "\n";
    }
    char buf[32];
    for (const auto& f : facts_) {
        for (std::size_t i = 0; i < f.vector.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(f.vector[i]));
            if (i) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

TruthStore TruthStore::load(const std::filesystem::path& path,
                            std::shared_ptr<EmbeddingProvider> provider) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read truth store: " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "truthstore" || version != 1)
        throw std::runtime_error("not a truth store file: " + path.string());
    std::string word;
    std::size_t dim = 0, count = 0;
    in >> word >> dim >> word >> count;
    in.ignore();  // rest of the count line

    TruthStore store(std::move(provider));
    if (store.provider_ && dim && store.provider_->dimension() != static_cast<int>(dim))
        throw DimensionError(dim, store.provider_->dimension());

    std::vector<std::pair<std::string, std::optional<std::string>>> rows;
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated truth store: " + path.string());
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            rows.emplace_back(unescape_line(line), std::nullopt);
        else
            rows.emplace_back(unescape_line(line.substr(0, tab)),
                              unescape_line(line.substr(tab + 1)));
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated vector table: " + path.string());
        std::istringstream vs(line);
        Vec v;
        double x;
        while (vs >> x) v.push_back(static_cast<float>(x));
        if (v.size() != dim) throw DimensionError(v.size(), dim);
        store.facts_.push_back(FactRecord{rows[i].first, std::move(v), rows[i].second});
        store.seen_.insert(rows[i].first);
    }
    return store;
}

std::vector<std::string> ingest_document(std::string_view text) {
    std::vector<std::string> sentences;
    std::unordered_set<std::string> seen;
    std::string current;

    auto word_count = [](const std::string& s) {
        int words = 0;
        bool in_word = false;
        for (char c : s) {
            bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
            if (!space && !in_word) ++words;
            in_word = !space;
        }
        return words;
    };
    auto emit = [&](std::string s) {
        while (!s.empty() && (s.back() == '.' || s.back() == '?' || s.back() == '!' ||
                              std::isspace(static_cast<unsigned char>(s.back()))))
            s.pop_back();
        std::size_t start = 0;
        while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
        s = s.substr(start);
        if (!s.empty() && seen.insert(s).second) sentences.push_back(std::move(s));
    };

    for (char c : text) {
        if (c == '.' || c == '?' || c == '!') {
            if (word_count(current) >= 3) {
                emit(std::move(current));
                current.clear();
            } else {
                current += c;  // abbreviation-like fragment, keep going
            }
        } else {
            current += c;
        }
    }
    emit(std::move(current));
    return sentences;
}

}  // namespace andor::truth
