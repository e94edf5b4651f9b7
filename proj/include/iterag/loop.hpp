#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iterag/corpus.hpp"
#include "iterag/error.hpp"
#include "iterag/evidence.hpp"
#include "iterag/gateway.hpp"

namespace iterag::loop {

struct NoiseConfig {
    /// Fraction of the post-injection document set that is injected noise.
    double target_ratio = 0.0;
    std::uint64_t seed = 0;
};

struct LoopConfig {
    int max_iterations = 5;
    int top_k = 5;
    int n_max = 4;
    corpus::RetrievalMode retrieval_mode = corpus::RetrievalMode::Lexical;
    /// When set, every sub-query's retrieval is diluted with seeded noise.
    std::optional<NoiseConfig> noise;
    /// Pool raw document text instead of extracted units.
    bool ablation_no_sru = false;
    /// Drop Irrelevant units before they reach the pool.
    bool ablation_no_negative = false;
    /// Skip extraction for documents already in the pool.
    bool skip_seen_docs = true;
};

/// Config echo used in reports and traces.
json to_json(const LoopConfig& config);

/// Outcome of one sub-query's retrieval inside an iteration. doc_ids reflect
/// the order handed to extraction (post noise injection when enabled); a
/// failed retrieval records the error and contributes no documents.
struct SubQueryRetrieval {
    std::string subquery;
    std::vector<std::string> doc_ids;
    std::optional<double> realized_noise_ratio;
    std::optional<std::string> error;

    json to_json() const;
};

struct IterationTrace {
    int iteration = 0;
    std::string query_used;
    std::vector<std::string> sub_queries;
    std::vector<SubQueryRetrieval> retrieved;
    int retrieval_failures = 0;
    int new_units = 0;
    int pool_size = 0;
    /// Absent while the pool holds no structured units.
    std::optional<double> supportive_ratio;
    gateway::DeficiencyReport assessment;
    std::optional<std::string> augmented_query;

    json to_json() const;
};

enum class Outcome { Answered, Abstained };

std::string to_string(Outcome outcome);

struct RunResult {
    Outcome outcome = Outcome::Answered;
    /// Non-empty iff Answered.
    std::string answer;
    /// Non-empty iff Abstained.
    std::string abstain_reason;
    int iterations_used = 0;
    std::vector<IterationTrace> traces;
    evidence::EvidencePool final_pool;

    json to_json() const;
};

/// A reasoning episode died mid-run (backend failure, contract breach, every
/// sub-query's retrieval failing). Carries the completed iteration traces so
/// callers can audit how far the run got.
class RunError : public Error {
public:
    RunError(const std::string& what, std::vector<IterationTrace> traces)
        : Error(what),
          traces_(std::make_shared<const std::vector<IterationTrace>>(std::move(traces))) {}

    const std::vector<IterationTrace>& traces() const { return *traces_; }

private:
    std::shared_ptr<const std::vector<IterationTrace>> traces_;
};

/// Run the full iterative cycle for one question: decompose the working
/// query, retrieve per sub-query, distill new documents into the pool, assess
/// sufficiency against the original question, then stop early, augment, or at
/// the cap consult the abstention judge.
RunResult run_question(const std::string& question, const corpus::Corpus& corpus,
                       const gateway::Gateway& gateway, const LoopConfig& config,
                       const corpus::EmbeddingProvider* embedder = nullptr);

/// One slot of a batch run: exactly one of result / error is set.
struct BatchEntry {
    std::optional<RunResult> result;
    std::optional<std::string> error;

    bool ok() const { return result.has_value(); }
};

/// Run many questions with a worker pool. Results come back in input order;
/// one question's failure never aborts the others.
std::vector<BatchEntry> run_question_batch(const std::vector<std::string>& questions,
                                           const corpus::Corpus& corpus,
                                           const gateway::Gateway& gateway,
                                           const LoopConfig& config, int parallelism,
                                           const corpus::EmbeddingProvider* embedder = nullptr);

} // namespace iterag::loop
