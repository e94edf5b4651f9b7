#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "iterag/jsonio.hpp"

namespace iterag::corpus {

/// One retrievable corpus unit.
struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
    /// Unit-normalized embedding; present only when the corpus was ingested
    /// with an embedding sidecar.
    std::optional<std::vector<double>> embedding;

    json to_json() const;
};

/// Tokenization used everywhere retrieval touches text: ASCII lowercase,
/// split on non-alphanumeric. Deterministic and locale-independent.
std::vector<std::string> tokenize(const std::string& text);

/// Supplies query embeddings for dense retrieval. Implementations must be
/// deterministic for retrieval determinism to hold.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<double> embed(const std::string& text, std::size_t dim) const = 0;
};

/// Test/demo embedder: hashes tokens into buckets and L2-normalizes.
/// Never produces a zero vector for a tokenizable input.
class HashingEmbedder : public EmbeddingProvider {
public:
    std::vector<double> embed(const std::string& text, std::size_t dim) const override;
};

enum class RetrievalMode { Lexical, Dense };

RetrievalMode retrieval_mode_from_string(const std::string& s);
std::string to_string(RetrievalMode mode);

struct RankedHit {
    std::string doc_id;
    double score = 0.0;
};

/// Result of one top-k retrieval. Hits are sorted by (score desc, doc_id asc)
/// and always number min(k_requested, corpus size).
struct RankedDocuments {
    std::string query;
    std::vector<RankedHit> hits;
    std::size_t k_requested = 0;
};

/// Immutable after ingestion; safe to share across concurrent readers.
class Corpus {
public:
    /// Build from in-memory records. Embeddings, when provided, must map every
    /// doc_id to a vector of one shared dimension; vectors are L2-normalized
    /// here so the stored form always satisfies the unit-norm invariant.
    static Corpus build(std::vector<Document> documents);

    std::size_t size() const { return documents_.size(); }
    const std::vector<Document>& documents() const { return documents_; }
    const Document& document(const std::string& doc_id) const;
    bool contains(const std::string& doc_id) const;
    std::optional<std::size_t> embedding_dim() const { return embedding_dim_; }
    bool has_dense_index() const { return embedding_dim_.has_value(); }
    double avg_doc_length() const { return avgdl_; }

    /// BM25 (k1=1.2, b=0.75, idf = ln(1 + (N - df + 0.5)/(df + 0.5))) over
    /// title+text tokens. Docs the query never touches fill the tail with
    /// score 0 so exactly min(k, N) hits come back.
    RankedDocuments retrieve_lexical(const std::string& query, std::size_t k) const;

    /// Cosine similarity (dot product of unit vectors) over stored embeddings.
    RankedDocuments retrieve_dense(const std::string& query, std::size_t k,
                                   const EmbeddingProvider& embedder) const;

    RankedDocuments retrieve(const std::string& query, std::size_t k, RetrievalMode mode,
                             const EmbeddingProvider* embedder = nullptr) const;

    json to_json() const;

private:
    Corpus() = default;

    std::vector<Document> documents_;
    std::unordered_map<std::string, std::size_t> by_id_;
    // term -> list of (doc index, term frequency), doc indexes ascending
    std::map<std::string, std::vector<std::pair<std::size_t, std::uint32_t>>> postings_;
    std::vector<std::size_t> doc_lengths_;
    double avgdl_ = 0.0;
    std::optional<std::size_t> embedding_dim_;
};

/// Read line-delimited document records (JSON object per line with doc_id /
/// title / text) plus an optional sidecar mapping doc_id -> vector, and build
/// the corpus. Deterministic: same input bytes, same corpus.
Corpus ingest_corpus(const std::string& source_path,
                     const std::optional<std::string>& embedding_source_path = std::nullopt);

/// Build straight from records, attaching embeddings when given.
Corpus ingest_records(std::vector<Document> records,
                      const std::optional<std::unordered_map<std::string, std::vector<double>>>&
                          embeddings = std::nullopt);

/// Persist / reload the corpus snapshot produced by `iterag ingest`. Loading
/// rebuilds the indexes (ingestion is deterministic) and cross-checks the
/// recorded stats.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

/// Load either a raw line-delimited corpus or a persisted snapshot, sniffing
/// the format.
Corpus load_any(const std::string& path,
                const std::optional<std::string>& embedding_source_path = std::nullopt);

struct NoisyDocuments {
    /// Seeded shuffle of retrieved + injected documents.
    std::vector<Document> documents;
    std::size_t injected_count = 0;
    double realized_ratio = 0.0;
};

/// Inject round(target_ratio * |retrieved| / (1 - target_ratio)) documents
/// sampled uniformly without replacement from the corpus minus the retrieved
/// set, then shuffle everything with the seeded generator. Never drops a
/// retrieved document and never injects one already retrieved.
NoisyDocuments inject_noise(const RankedDocuments& retrieved, const Corpus& corpus,
                            double target_ratio, std::uint64_t seed);

/// The number of documents inject_noise would add for a retrieved set of the
/// given size. Exposed so harness code can report expected counts.
std::size_t noise_injection_count(std::size_t retrieved_size, double target_ratio);

} // namespace iterag::corpus
