#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "iterag/corpus.hpp"
#include "iterag/evidence.hpp"
#include "iterag/jsonio.hpp"

namespace iterag::gateway {

/// The six LLM-mediated functions of the reasoning cycle.
enum class TaskKind {
    Decompose,
    ExtractSRU,
    AssessEvidence,
    AugmentQuery,
    JudgeAbstention,
    SynthesizeAnswer,
};

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind kind);

/// One typed request crossing the gateway boundary. The payload carries every
/// input the task needs; prompt_template_id names the instruction template a
/// live backend renders around it.
struct TaskRequest {
    TaskKind task_kind;
    json payload;
    std::string prompt_template_id;
};

/// Sufficiency verdict plus the deficiency signals (informational gaps,
/// conflict indicators, negative constraints) that steer query augmentation.
struct DeficiencyReport {
    bool sufficient = false;
    std::vector<std::string> gaps;
    std::vector<std::string> conflicts;
    std::vector<std::string> negative_constraints;
    std::string rationale;

    json to_json() const;
    static DeficiencyReport from_json(const json& j);
    bool operator==(const DeficiencyReport&) const = default;
};

/// Final answerability judgment at the iteration cap.
struct AbstentionVerdict {
    bool answerable = false;
    std::string reason;

    json to_json() const;
    static AbstentionVerdict from_json(const json& j);
    bool operator==(const AbstentionVerdict&) const = default;
};

/// One raw round trip to a response-producing backend. Implementations return
/// the task response as parsed structured data; schema validation and the
/// re-ask budget live in complete_task, not here.
class Backend {
public:
    virtual ~Backend() = default;

    /// `schema_feedback` is empty on the first ask and carries the previous
    /// attempt's schema violation on re-asks so live backends can surface it.
    virtual json complete(const TaskRequest& request, const std::string& schema_feedback) = 0;

    virtual std::string name() const = 0;
};

/// Canonical digest of a task payload: key order never matters.
std::string task_digest(const json& payload);

/// Table key for one scripted entry.
std::string script_key(TaskKind kind, const std::string& digest);

/// Deterministic backend answering from a pre-recorded table keyed by
/// (task_kind, payload digest). A missing entry is a hard error, never a
/// fallback, so every scripted run is bit-reproducible or loudly broken.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::map<std::string, json> entries)
        : entries_(std::move(entries)) {}

    static ScriptedBackend from_json(const json& table);
    static ScriptedBackend from_file(const std::string& path);

    json complete(const TaskRequest& request, const std::string& schema_feedback) override;
    std::string name() const override { return "scripted"; }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, json> entries_;
};

/// Wraps any backend and records every (task_kind, digest) -> response pair,
/// producing a script table that replays the wrapped backend exactly. Safe
/// for concurrent use when the wrapped backend is.
class RecordingBackend : public Backend {
public:
    explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

    json complete(const TaskRequest& request, const std::string& schema_feedback) override;
    std::string name() const override { return inner_->name() + "+recording"; }

    json table_json() const;
    void save(const std::string& path) const;
    std::size_t size() const;

private:
    std::shared_ptr<Backend> inner_;
    mutable std::mutex mutex_;
    std::map<std::string, json> entries_;
};

/// Payload builders. Tests and fixture generators must build payloads through
/// these so their digests match the engine's.
json decompose_payload(const std::string& question, int n_max);
json extract_sru_payload(const std::string& subquery, const corpus::Document& document);
json assess_evidence_payload(const std::string& anchor_question, const evidence::EvidencePool& pool);
json augment_query_payload(const std::string& anchor_question, const evidence::EvidencePool& pool,
                           const DeficiencyReport& report);
json judge_abstention_payload(const std::string& anchor_question, const evidence::EvidencePool& pool);
json synthesize_answer_payload(const std::string& anchor_question, const evidence::EvidencePool& pool);

/// Validate a raw backend response against its task schema. Throws SchemaError
/// with the specific violation; returns the response untouched when valid.
json validate_task_response(const TaskRequest& request, const json& response);

/// One schema-checked task completion: ask the backend, validate, and on a
/// schema violation re-ask with the violation attached, up to
/// max_schema_retries extra attempts. Transport and scripted-miss errors
/// propagate immediately; schema failure after the budget is terminal.
json complete_task(Backend& backend, const TaskRequest& request, int max_schema_retries);

/// Task-typed facade over a backend: builds payloads, enforces call contracts,
/// and converts validated responses into domain values. Stateless between
/// calls and safe for concurrent use.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend, int max_schema_retries = 2);

    /// Split a question into 1..n_max sub-queries. The original question is
    /// not part of the output; callers keep it as the semantic anchor.
    std::vector<std::string> decompose_question(const std::string& question, int n_max) const;

    /// Distill one retrieved document into a structured unit for `subquery`.
    evidence::Sru extract_sru(const std::string& subquery, const corpus::Document& document,
                              int iteration) const;

    /// Judge sufficiency and name the deficiencies, from both pool partitions.
    DeficiencyReport assess_evidence(const std::string& anchor_question,
                                     const evidence::EvidencePool& pool) const;

    /// Produce a compensatory query from the report. Pure text transform; the
    /// pool is never mutated. Requires report.sufficient == false.
    std::string augment_query(const std::string& anchor_question,
                              const evidence::EvidencePool& pool,
                              const DeficiencyReport& report) const;

    /// Final answerability judgment once the iteration cap is hit.
    AbstentionVerdict judge_abstention(const std::string& anchor_question,
                                       const evidence::EvidencePool& pool) const;

    /// Generate the answer from the pool alone (positive units, or raw units
    /// when the pool holds raw text). Requires a non-empty pool.
    std::string synthesize_answer(const std::string& anchor_question,
                                  const evidence::EvidencePool& pool) const;

    Backend& backend() const { return *backend_; }
    int max_schema_retries() const { return max_schema_retries_; }

private:
    json run(TaskKind kind, json payload) const;
    std::shared_ptr<Backend> backend_;
    int max_schema_retries_;
};

} // namespace iterag::gateway
