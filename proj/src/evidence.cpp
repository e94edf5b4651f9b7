#include "iterag/evidence.hpp"

#include <algorithm>
#include <tuple>

#include "iterag/error.hpp"

namespace iterag::evidence {

RelevanceLabel relevance_from_string(const std::string& s) {
    if (s == "Supportive") {
        return RelevanceLabel::Supportive;
    }
    if (s == "Contextual") {
        return RelevanceLabel::Contextual;
    }
    if (s == "Irrelevant") {
        return RelevanceLabel::Irrelevant;
    }
    throw ValidationError("unknown relevance label \"" + s + "\"");
}

std::string to_string(RelevanceLabel label) {
    switch (label) {
    case RelevanceLabel::Supportive:
        return "Supportive";
    case RelevanceLabel::Contextual:
        return "Contextual";
    case RelevanceLabel::Irrelevant:
        return "Irrelevant";
    }
    throw ValidationError("invalid relevance label value");
}

json Sru::to_json() const {
    json j{{"source_doc_id", source_doc_id},
           {"subquery", subquery},
           {"relevance", to_string(relevance)},
           {"summary", summary},
           {"confidence", confidence},
           {"iteration_born", iteration_born}};
    j["evidence"] = evidence ? json(*evidence) : json(nullptr);
    return j;
}

Sru Sru::from_json(const json& j) {
    std::optional<std::string> evidence;
    if (j.contains("evidence") && !j.at("evidence").is_null()) {
        evidence = j.at("evidence").get<std::string>();
    }
    return make_sru(j.at("source_doc_id").get<std::string>(),
                    j.at("subquery").get<std::string>(),
                    relevance_from_string(j.at("relevance").get<std::string>()),
                    j.at("summary").get<std::string>(), std::move(evidence),
                    j.at("confidence").get<double>(), j.at("iteration_born").get<int>());
}

Sru make_sru(std::string source_doc_id, std::string subquery, RelevanceLabel relevance,
             std::string summary, std::optional<std::string> evidence, double confidence,
             int iteration_born) {
    if (source_doc_id.empty()) {
        throw ValidationError("SRU source_doc_id is empty");
    }
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw ValidationError("SRU confidence " + std::to_string(confidence) +
                              " outside [0, 1]");
    }
    if (summary.empty()) {
        throw ValidationError("SRU summary is empty");
    }
    if (relevance == RelevanceLabel::Irrelevant && evidence.has_value()) {
        throw ValidationError("Irrelevant SRU for \"" + source_doc_id +
                              "\" must not carry evidence");
    }
    if (relevance == RelevanceLabel::Supportive &&
        (!evidence.has_value() || evidence->empty())) {
        throw ValidationError("Supportive SRU for \"" + source_doc_id +
                              "\" must carry non-empty evidence");
    }
    if (iteration_born < 0) {
        throw ValidationError("SRU iteration_born is negative");
    }
    return Sru{std::move(source_doc_id), std::move(subquery), relevance, std::move(summary),
               std::move(evidence),      confidence,          iteration_born};
}

json RawUnit::to_json() const {
    return json{{"source_doc_id", source_doc_id}, {"text", text}};
}

bool EvidencePool::has_document(const std::string& doc_id) const {
    if (units_.count(doc_id)) {
        return true;
    }
    return std::any_of(raw_units_.begin(), raw_units_.end(),
                       [&](const RawUnit& u) { return u.source_doc_id == doc_id; });
}

namespace {

// Content order used only to break exact (confidence, iteration_born) ties
// between distinct candidates of one batch; makes merge batch-order
// independent.
auto content_key(const Sru& u) {
    return std::tie(u.summary, u.subquery, u.relevance, u.evidence);
}

/// True when `challenger` should replace `incumbent`.
bool beats(const Sru& challenger, const Sru& incumbent, bool incumbent_is_pooled) {
    if (challenger.confidence != incumbent.confidence) {
        return challenger.confidence > incumbent.confidence;
    }
    if (challenger.iteration_born != incumbent.iteration_born) {
        return challenger.iteration_born < incumbent.iteration_born;
    }
    if (incumbent_is_pooled) {
        return false;
    }
    return content_key(challenger) < content_key(incumbent);
}

} // namespace

void EvidencePool::merge(const std::vector<Sru>& new_units) {
    // Resolve duplicates inside the batch first, then challenge the pool.
    std::map<std::string, Sru> batch;
    for (const auto& unit : new_units) {
        auto it = batch.find(unit.source_doc_id);
        if (it == batch.end()) {
            batch.emplace(unit.source_doc_id, unit);
        } else if (beats(unit, it->second, /*incumbent_is_pooled=*/false)) {
            it->second = unit;
        }
    }
    for (auto& [doc_id, unit] : batch) {
        auto it = units_.find(doc_id);
        if (it == units_.end()) {
            units_.emplace(doc_id, std::move(unit));
        } else if (beats(unit, it->second, /*incumbent_is_pooled=*/true)) {
            it->second = std::move(unit);
        }
    }
}

void EvidencePool::add_raw(RawUnit unit) {
    if (unit.source_doc_id.empty()) {
        throw ValidationError("raw unit source_doc_id is empty");
    }
    if (!has_document(unit.source_doc_id)) {
        raw_units_.push_back(std::move(unit));
    }
}

std::pair<std::vector<Sru>, std::vector<Sru>> EvidencePool::partition() const {
    std::vector<Sru> positive;
    std::vector<Sru> negative;
    for (const auto& [_, unit] : units_) {
        if (unit.relevance == RelevanceLabel::Irrelevant) {
            negative.push_back(unit);
        } else {
            positive.push_back(unit);
        }
    }
    return {std::move(positive), std::move(negative)};
}

double EvidencePool::supportive_ratio() const {
    if (units_.empty()) {
        throw ContractError("supportive_ratio is undefined on an empty pool");
    }
    std::size_t supportive = 0;
    for (const auto& [_, unit] : units_) {
        if (unit.relevance == RelevanceLabel::Supportive) {
            ++supportive;
        }
    }
    return static_cast<double>(supportive) / static_cast<double>(units_.size());
}

json EvidencePool::to_json() const {
    json units = json::array();
    for (const auto& [_, unit] : units_) {
        units.push_back(unit.to_json());
    }
    json j{{"anchor_question", anchor_question_}, {"units", std::move(units)}};
    if (!raw_units_.empty()) {
        json raw = json::array();
        for (const auto& unit : raw_units_) {
            raw.push_back(unit.to_json());
        }
        j["raw_units"] = std::move(raw);
    }
    return j;
}

} // namespace iterag::evidence
