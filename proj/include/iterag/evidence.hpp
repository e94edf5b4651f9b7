#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iterag/jsonio.hpp"

namespace iterag::evidence {

/// Relevance decision for one source document. Closed vocabulary.
enum class RelevanceLabel { Supportive, Contextual, Irrelevant };

RelevanceLabel relevance_from_string(const std::string& s);
std::string to_string(RelevanceLabel label);

/// Structured reasoning unit distilled from one retrieved document:
/// relevance label, summary, extracted evidence and the backend's confidence
/// in the label, plus the sub-query and iteration that produced it.
struct Sru {
    std::string source_doc_id;
    std::string subquery;
    RelevanceLabel relevance = RelevanceLabel::Irrelevant;
    std::string summary;
    std::optional<std::string> evidence;
    double confidence = 0.0;
    int iteration_born = 0;

    json to_json() const;
    static Sru from_json(const json& j);

    bool operator==(const Sru&) const = default;
};

/// Validate and build an SRU:
///  - confidence in [0, 1]
///  - Irrelevant units carry no evidence
///  - Supportive units carry non-empty evidence
///  - summary non-empty
/// Throws ValidationError otherwise. Contextual evidence may be present or
/// absent.
Sru make_sru(std::string source_doc_id, std::string subquery, RelevanceLabel relevance,
             std::string summary, std::optional<std::string> evidence, double confidence,
             int iteration_born);

/// Raw-text unit used only when SRU extraction is disabled; keeps the source
/// id so seen-document tracking still works.
struct RawUnit {
    std::string source_doc_id;
    std::string text;

    json to_json() const;
    bool operator==(const RawUnit&) const = default;
};

/// Per-question, deduplicated, contrastive collection of SRUs. At most one
/// unit per source document; the anchor question never changes; query text
/// never enters the pool.
class EvidencePool {
public:
    explicit EvidencePool(std::string anchor_question)
        : anchor_question_(std::move(anchor_question)) {}

    const std::string& anchor_question() const { return anchor_question_; }
    const std::map<std::string, Sru>& units() const { return units_; }
    const std::vector<RawUnit>& raw_units() const { return raw_units_; }

    std::size_t size() const { return units_.size(); }
    /// Units of either representation; what traces report as pool size.
    std::size_t total_units() const { return units_.size() + raw_units_.size(); }
    bool has_document(const std::string& doc_id) const;

    /// Merge new units into the pool. Within the batch and against the pool,
    /// the survivor per source document is picked by: higher confidence, then
    /// earlier iteration_born, then the incumbent (pool unit over incoming;
    /// within a batch, ties between distinct candidates fall back to a
    /// content comparison so the result is independent of batch order).
    /// The pool never shrinks.
    void merge(const std::vector<Sru>& new_units);

    /// Add a raw unit; first occurrence per source document wins.
    void add_raw(RawUnit unit);

    /// (Supportive + Contextual, Irrelevant), each sorted by source doc id.
    std::pair<std::vector<Sru>, std::vector<Sru>> partition() const;

    /// count(Supportive) / count(all SRUs). Contextual does not count toward
    /// the numerator. Throws ContractError on an empty pool.
    double supportive_ratio() const;

    /// Anchor question + units sorted by doc id; byte-stable.
    json to_json() const;

private:
    std::string anchor_question_;
    std::map<std::string, Sru> units_;
    std::vector<RawUnit> raw_units_;
};

} // namespace iterag::evidence
