#include "iterag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "iterag/error.hpp"

namespace iterag::corpus {

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;

double bm25_idf(std::size_t doc_count, std::size_t df) {
    return std::log(1.0 + (static_cast<double>(doc_count) - static_cast<double>(df) + 0.5) /
                              (static_cast<double>(df) + 0.5));
}

/// Unbiased bounded draw via rejection sampling; stdlib distributions are
/// implementation-defined, this keeps sampled sets identical everywhere.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) {
        v = rng();
    }
    return v % n;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

void sort_hits(std::vector<RankedHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.doc_id < b.doc_id;
    });
}

std::vector<std::pair<std::size_t, std::string>> read_source_lines(const std::string& path) {
    try {
        return read_lines(path);
    } catch (const Error& e) {
        throw IngestError(e.what());
    }
}

std::vector<double> normalize_embedding(const std::string& doc_id, std::vector<double> v) {
    double norm_sq = 0.0;
    for (double x : v) {
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw IngestError("embedding for \"" + doc_id + "\" has zero or non-finite norm");
    }
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

} // namespace

json Document::to_json() const {
    json j{{"doc_id", doc_id}, {"title", title}, {"text", text}};
    if (embedding) {
        j["embedding"] = *embedding;
    }
    return j;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::vector<double> HashingEmbedder::embed(const std::string& text, std::size_t dim) const {
    if (dim == 0) {
        throw RetrievalError("hashing embedder needs a positive dimension");
    }
    std::vector<double> v(dim, 0.0);
    for (const auto& token : tokenize(text)) {
        v[fnv1a64(token) % dim] += 1.0;
    }
    double norm_sq = 0.0;
    for (double x : v) {
        norm_sq += x * x;
    }
    if (norm_sq == 0.0) {
        throw RetrievalError("cannot embed a query with no tokens");
    }
    const double norm = std::sqrt(norm_sq);
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

RetrievalMode retrieval_mode_from_string(const std::string& s) {
    if (s == "lexical") {
        return RetrievalMode::Lexical;
    }
    if (s == "dense") {
        return RetrievalMode::Dense;
    }
    throw ConfigError("unknown retrieval_mode \"" + s + "\" (expected lexical or dense)");
}

std::string to_string(RetrievalMode mode) {
    return mode == RetrievalMode::Lexical ? "lexical" : "dense";
}

Corpus Corpus::build(std::vector<Document> documents) {
    if (documents.empty()) {
        throw IngestError("corpus is empty");
    }
    Corpus corpus;
    corpus.documents_ = std::move(documents);

    std::size_t with_embedding = 0;
    std::size_t total_length = 0;
    for (std::size_t i = 0; i < corpus.documents_.size(); ++i) {
        Document& doc = corpus.documents_[i];
        if (doc.doc_id.empty()) {
            throw IngestError("document #" + std::to_string(i + 1) + " has an empty doc_id");
        }
        if (doc.text.empty()) {
            throw IngestError("document \"" + doc.doc_id + "\" has empty text");
        }
        if (!corpus.by_id_.emplace(doc.doc_id, i).second) {
            throw IngestError("duplicate doc_id \"" + doc.doc_id + "\"");
        }

        std::unordered_map<std::string, std::uint32_t> tf;
        std::size_t length = 0;
        for (const auto& token : tokenize(doc.title)) {
            ++tf[token];
            ++length;
        }
        for (const auto& token : tokenize(doc.text)) {
            ++tf[token];
            ++length;
        }
        for (const auto& [term, count] : tf) {
            corpus.postings_[term].emplace_back(i, count);
        }
        corpus.doc_lengths_.push_back(length);
        total_length += length;

        if (doc.embedding) {
            if (!corpus.embedding_dim_) {
                corpus.embedding_dim_ = doc.embedding->size();
            } else if (doc.embedding->size() != *corpus.embedding_dim_) {
                throw IngestError("embedding dimension mismatch: \"" + doc.doc_id + "\" has " +
                                  std::to_string(doc.embedding->size()) + ", expected " +
                                  std::to_string(*corpus.embedding_dim_));
            }
            doc.embedding = normalize_embedding(doc.doc_id, std::move(*doc.embedding));
            ++with_embedding;
        }
    }
    if (corpus.embedding_dim_ && with_embedding != corpus.documents_.size()) {
        throw IngestError("dense index requires an embedding for every document (" +
                          std::to_string(with_embedding) + " of " +
                          std::to_string(corpus.documents_.size()) + " present)");
    }
    corpus.avgdl_ =
        static_cast<double>(total_length) / static_cast<double>(corpus.documents_.size());
    return corpus;
}

const Document& Corpus::document(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    if (it == by_id_.end()) {
        throw RetrievalError("unknown doc_id \"" + doc_id + "\"");
    }
    return documents_[it->second];
}

bool Corpus::contains(const std::string& doc_id) const {
    return by_id_.count(doc_id) > 0;
}

RankedDocuments Corpus::retrieve_lexical(const std::string& query, std::size_t k) const {
    if (k == 0) {
        throw RetrievalError("k must be positive");
    }
    const auto query_tokens = tokenize(query);
    if (query_tokens.empty()) {
        throw RetrievalError("query has no tokens after tokenization");
    }

    // Accumulate per-document in query-token order so scores are bit-stable
    // against a brute-force scorer walking tokens in the same order.
    std::unordered_map<std::size_t, double> scores;
    for (const auto& token : query_tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end()) {
            continue;
        }
        const double idf = bm25_idf(documents_.size(), it->second.size());
        for (const auto& [doc_index, tf] : it->second) {
            const double dl = static_cast<double>(doc_lengths_[doc_index]);
            const double norm = kBm25K1 * (1.0 - kBm25B + kBm25B * dl / avgdl_);
            const double tf_component =
                static_cast<double>(tf) * (kBm25K1 + 1.0) / (static_cast<double>(tf) + norm);
            scores[doc_index] += idf * tf_component;
        }
    }

    std::vector<RankedHit> hits;
    hits.reserve(scores.size());
    for (const auto& [doc_index, score] : scores) {
        hits.push_back({documents_[doc_index].doc_id, score});
    }
    sort_hits(hits);

    const std::size_t want = std::min(k, documents_.size());
    if (hits.size() < want) {
        // Pad with zero-score documents in doc_id order so exactly
        // min(k, N) hits always come back.
        std::vector<std::string> rest;
        for (const auto& doc : documents_) {
            if (!scores.count(by_id_.at(doc.doc_id))) {
                rest.push_back(doc.doc_id);
            }
        }
        std::sort(rest.begin(), rest.end());
        for (const auto& id : rest) {
            if (hits.size() >= want) {
                break;
            }
            hits.push_back({id, 0.0});
        }
    }
    hits.resize(want);
    return RankedDocuments{query, std::move(hits), k};
}

RankedDocuments Corpus::retrieve_dense(const std::string& query, std::size_t k,
                                       const EmbeddingProvider& embedder) const {
    if (k == 0) {
        throw RetrievalError("k must be positive");
    }
    if (!has_dense_index()) {
        throw RetrievalError("dense retrieval requested but the corpus has no dense index");
    }
    if (tokenize(query).empty()) {
        throw RetrievalError("query has no tokens after tokenization");
    }
    const auto q = embedder.embed(query, *embedding_dim_);
    if (q.size() != *embedding_dim_) {
        throw RetrievalError("query embedding dimension " + std::to_string(q.size()) +
                             " does not match corpus dimension " +
                             std::to_string(*embedding_dim_));
    }

    std::vector<RankedHit> hits;
    hits.reserve(documents_.size());
    for (const auto& doc : documents_) {
        double dot = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            dot += q[i] * (*doc.embedding)[i];
        }
        hits.push_back({doc.doc_id, dot});
    }
    sort_hits(hits);
    hits.resize(std::min(k, documents_.size()));
    return RankedDocuments{query, std::move(hits), k};
}

RankedDocuments Corpus::retrieve(const std::string& query, std::size_t k, RetrievalMode mode,
                                 const EmbeddingProvider* embedder) const {
    if (mode == RetrievalMode::Lexical) {
        return retrieve_lexical(query, k);
    }
    if (embedder == nullptr) {
        throw RetrievalError("dense retrieval requires a query embedding provider");
    }
    return retrieve_dense(query, k, *embedder);
}

json Corpus::to_json() const {
    json docs = json::array();
    for (const auto& doc : documents_) {
        docs.push_back(doc.to_json());
    }
    json j{{"format", "iterag-corpus-index"},
           {"version", 1},
           {"doc_count", documents_.size()},
           {"avgdl", avgdl_},
           {"documents", std::move(docs)}};
    j["embedding_dim"] = embedding_dim_ ? json(*embedding_dim_) : json(nullptr);
    return j;
}

Corpus ingest_records(
    std::vector<Document> records,
    const std::optional<std::unordered_map<std::string, std::vector<double>>>& embeddings) {
    if (embeddings) {
        for (auto& doc : records) {
            auto it = embeddings->find(doc.doc_id);
            if (it == embeddings->end()) {
                throw IngestError("embedding sidecar has no vector for doc_id \"" + doc.doc_id +
                                  "\"");
            }
            doc.embedding = it->second;
        }
    }
    return Corpus::build(std::move(records));
}

Corpus ingest_corpus(const std::string& source_path,
                     const std::optional<std::string>& embedding_source_path) {
    std::vector<Document> records;
    for (const auto& [lineno, line] : read_source_lines(source_path)) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IngestError(source_path + ":" + std::to_string(lineno) + ": invalid JSON: " +
                              e.what());
        }
        if (!j.is_object() || !j.contains("doc_id") || !j.contains("title") ||
            !j.contains("text")) {
            throw IngestError(source_path + ":" + std::to_string(lineno) +
                              ": record needs doc_id, title and text");
        }
        records.push_back(Document{j.at("doc_id").get<std::string>(),
                                   j.at("title").get<std::string>(),
                                   j.at("text").get<std::string>(), std::nullopt});
    }

    std::optional<std::unordered_map<std::string, std::vector<double>>> embeddings;
    if (embedding_source_path) {
        embeddings.emplace();
        for (const auto& [lineno, line] : read_source_lines(*embedding_source_path)) {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw IngestError(*embedding_source_path + ":" + std::to_string(lineno) +
                                  ": invalid JSON: " + e.what());
            }
            const auto id = j.at("doc_id").get<std::string>();
            if (!embeddings->emplace(id, j.at("embedding").get<std::vector<double>>()).second) {
                throw IngestError(*embedding_source_path + ": duplicate embedding for doc_id \"" +
                                  id + "\"");
            }
        }
    }
    return ingest_records(std::move(records), embeddings);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    write_file(path, corpus.to_json().dump(2) + "\n");
}

Corpus load_corpus(const std::string& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const Error& e) {
        throw IngestError(e.what());
    }
    if (!j.is_object() || j.value("format", "") != "iterag-corpus-index") {
        throw IngestError(path + " is not an iterag corpus index");
    }
    std::vector<Document> records;
    for (const auto& rec : j.at("documents")) {
        Document doc{rec.at("doc_id").get<std::string>(), rec.at("title").get<std::string>(),
                     rec.at("text").get<std::string>(), std::nullopt};
        if (rec.contains("embedding")) {
            doc.embedding = rec.at("embedding").get<std::vector<double>>();
        }
        records.push_back(std::move(doc));
    }
    Corpus corpus = Corpus::build(std::move(records));
    if (j.at("doc_count").get<std::size_t>() != corpus.size()) {
        throw IngestError(path + ": recorded doc_count does not match the documents");
    }
    return corpus;
}

Corpus load_any(const std::string& path,
                const std::optional<std::string>& embedding_source_path) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const Error& e) {
        throw IngestError(e.what());
    }
    const auto start = content.find_first_not_of(" \t\r\n");
    if (start != std::string::npos && content[start] == '{') {
        const json j = json::parse(content, nullptr, false);
        if (j.is_object() && j.value("format", "") == "iterag-corpus-index") {
            return load_corpus(path);
        }
    }
    return ingest_corpus(path, embedding_source_path);
}

std::size_t noise_injection_count(std::size_t retrieved_size, double target_ratio) {
    if (!(target_ratio >= 0.0) || target_ratio >= 1.0) {
        throw RetrievalError("noise target_ratio must be in [0, 1)");
    }
    const double exact =
        target_ratio * static_cast<double>(retrieved_size) / (1.0 - target_ratio);
    return static_cast<std::size_t>(std::llround(exact));
}

NoisyDocuments inject_noise(const RankedDocuments& retrieved, const Corpus& corpus,
                            double target_ratio, std::uint64_t seed) {
    const std::size_t n_inject = noise_injection_count(retrieved.hits.size(), target_ratio);

    std::vector<std::string> candidates;
    candidates.reserve(corpus.size());
    {
        std::unordered_map<std::string, bool> in_retrieved;
        for (const auto& hit : retrieved.hits) {
            in_retrieved[hit.doc_id] = true;
        }
        for (const auto& doc : corpus.documents()) {
            if (!in_retrieved.count(doc.doc_id)) {
                candidates.push_back(doc.doc_id);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.size() < n_inject) {
        throw RetrievalError("not enough noise candidates: need " + std::to_string(n_inject) +
                             ", corpus has " + std::to_string(candidates.size()) +
                             " outside the retrieved set");
    }

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first n_inject slots become the sample.
    for (std::size_t i = 0; i < n_inject; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(uniform_below(rng, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }

    std::vector<std::string> ids;
    ids.reserve(retrieved.hits.size() + n_inject);
    for (const auto& hit : retrieved.hits) {
        ids.push_back(hit.doc_id);
    }
    ids.insert(ids.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_inject));
    seeded_shuffle(ids, rng);

    NoisyDocuments out;
    out.injected_count = n_inject;
    out.realized_ratio = retrieved.hits.empty() && n_inject == 0
                             ? 0.0
                             : static_cast<double>(n_inject) /
                                   static_cast<double>(retrieved.hits.size() + n_inject);
    out.documents.reserve(ids.size());
    for (const auto& id : ids) {
        out.documents.push_back(corpus.document(id));
    }
    return out;
}

} // namespace iterag::corpus
