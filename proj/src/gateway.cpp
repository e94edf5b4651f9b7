#include "iterag/gateway.hpp"

#include <algorithm>
#include <utility>

#include "iterag/error.hpp"

namespace iterag::gateway {

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "Decompose") {
        return TaskKind::Decompose;
    }
    if (s == "ExtractSRU") {
        return TaskKind::ExtractSRU;
    }
    if (s == "AssessEvidence") {
        return TaskKind::AssessEvidence;
    }
    if (s == "AugmentQuery") {
        return TaskKind::AugmentQuery;
    }
    if (s == "JudgeAbstention") {
        return TaskKind::JudgeAbstention;
    }
    if (s == "SynthesizeAnswer") {
        return TaskKind::SynthesizeAnswer;
    }
    throw ConfigError("unknown task kind \"" + s + "\"");
}

std::string to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::Decompose:
        return "Decompose";
    case TaskKind::ExtractSRU:
        return "ExtractSRU";
    case TaskKind::AssessEvidence:
        return "AssessEvidence";
    case TaskKind::AugmentQuery:
        return "AugmentQuery";
    case TaskKind::JudgeAbstention:
        return "JudgeAbstention";
    case TaskKind::SynthesizeAnswer:
        return "SynthesizeAnswer";
    }
    throw ConfigError("invalid task kind value");
}

json DeficiencyReport::to_json() const {
    return json{{"sufficient", sufficient},
                {"gaps", gaps},
                {"conflicts", conflicts},
                {"negative_constraints", negative_constraints},
                {"rationale", rationale}};
}

DeficiencyReport DeficiencyReport::from_json(const json& j) {
    DeficiencyReport report;
    report.sufficient = j.at("sufficient").get<bool>();
    report.gaps = j.at("gaps").get<std::vector<std::string>>();
    report.conflicts = j.at("conflicts").get<std::vector<std::string>>();
    report.negative_constraints = j.at("negative_constraints").get<std::vector<std::string>>();
    report.rationale = j.at("rationale").get<std::string>();
    return report;
}

json AbstentionVerdict::to_json() const {
    return json{{"answerable", answerable}, {"reason", reason}};
}

AbstentionVerdict AbstentionVerdict::from_json(const json& j) {
    return AbstentionVerdict{j.at("answerable").get<bool>(), j.at("reason").get<std::string>()};
}

std::string task_digest(const json& payload) { return payload_digest(payload); }

std::string script_key(TaskKind kind, const std::string& digest) {
    return to_string(kind) + ":" + digest;
}

ScriptedBackend ScriptedBackend::from_json(const json& table) {
    if (!table.is_object() || table.value("format", "") != "iterag-script-table") {
        throw ConfigError("script table must carry format \"iterag-script-table\"");
    }
    if (table.value("version", 0) != 1) {
        throw ConfigError("unsupported script table version");
    }
    std::map<std::string, json> entries;
    for (const auto& entry : table.at("entries")) {
        TaskKind kind = task_kind_from_string(entry.at("task_kind").get<std::string>());
        std::string key = script_key(kind, entry.at("digest").get<std::string>());
        if (!entries.emplace(key, entry.at("response")).second) {
            throw ConfigError("script table has duplicate entry " + key);
        }
    }
    return ScriptedBackend(std::move(entries));
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    json table;
    try {
        table = read_json_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return from_json(table);
}

json ScriptedBackend::complete(const TaskRequest& request, const std::string&) {
    std::string digest = task_digest(request.payload);
    auto it = entries_.find(script_key(request.task_kind, digest));
    if (it == entries_.end()) {
        std::string payload = canonical_dump(request.payload);
        if (payload.size() > 600) {
            payload.resize(600);
            payload += "...";
        }
        throw ScriptedMissError("scripted table has no entry for task " +
                                to_string(request.task_kind) + " digest " + digest +
                                " (payload " + payload + ")");
    }
    return it->second;
}

json RecordingBackend::complete(const TaskRequest& request, const std::string& schema_feedback) {
    json response = inner_->complete(request, schema_feedback);
    std::string key = script_key(request.task_kind, task_digest(request.payload));
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        entries_.emplace(std::move(key), response);
    } else if (it->second != response) {
        throw ContractError("recording saw two different responses for " + key +
                            "; the wrapped backend is not deterministic");
    }
    return response;
}

std::size_t RecordingBackend::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

json RecordingBackend::table_json() const {
    std::lock_guard lock(mutex_);
    json entries = json::array();
    for (const auto& [key, response] : entries_) {
        auto sep = key.find(':');
        entries.push_back(json{{"task_kind", key.substr(0, sep)},
                               {"digest", key.substr(sep + 1)},
                               {"response", response}});
    }
    return json{{"format", "iterag-script-table"}, {"version", 1}, {"entries", std::move(entries)}};
}

void RecordingBackend::save(const std::string& path) const {
    write_file(path, table_json().dump(2) + "\n");
}

namespace {

json srus_to_json(const std::vector<evidence::Sru>& units) {
    json arr = json::array();
    for (const auto& unit : units) {
        arr.push_back(unit.to_json());
    }
    return arr;
}

/// Shared pool rendering for the pool-conditioned tasks. SRU pools contribute
/// their positive and negative partitions; raw-text pools contribute the raw
/// units instead.
void append_pool_fields(json& payload, const evidence::EvidencePool& pool) {
    if (!pool.units().empty() || pool.raw_units().empty()) {
        auto [positive, negative] = pool.partition();
        payload["positive"] = srus_to_json(positive);
        payload["negative"] = srus_to_json(negative);
    }
    if (!pool.raw_units().empty()) {
        json raw = json::array();
        for (const auto& unit : pool.raw_units()) {
            raw.push_back(unit.to_json());
        }
        payload["raw_units"] = std::move(raw);
    }
}

} // namespace

json decompose_payload(const std::string& question, int n_max) {
    return json{{"question", question}, {"n_max", n_max}};
}

json extract_sru_payload(const std::string& subquery, const corpus::Document& document) {
    return json{{"subquery", subquery},
                {"document", json{{"doc_id", document.doc_id},
                                  {"title", document.title},
                                  {"text", document.text}}}};
}

json assess_evidence_payload(const std::string& anchor_question,
                             const evidence::EvidencePool& pool) {
    json payload{{"question", anchor_question}};
    append_pool_fields(payload, pool);
    return payload;
}

json augment_query_payload(const std::string& anchor_question, const evidence::EvidencePool& pool,
                           const DeficiencyReport& report) {
    json payload = assess_evidence_payload(anchor_question, pool);
    payload["report"] = report.to_json();
    return payload;
}

json judge_abstention_payload(const std::string& anchor_question,
                              const evidence::EvidencePool& pool) {
    return assess_evidence_payload(anchor_question, pool);
}

json synthesize_answer_payload(const std::string& anchor_question,
                               const evidence::EvidencePool& pool) {
    json payload{{"question", anchor_question}};
    if (!pool.units().empty()) {
        payload["evidence"] = srus_to_json(pool.partition().first);
    }
    if (!pool.raw_units().empty()) {
        json raw = json::array();
        for (const auto& unit : pool.raw_units()) {
            raw.push_back(unit.to_json());
        }
        payload["raw_units"] = std::move(raw);
    }
    return payload;
}

namespace {

[[noreturn]] void fail_schema(TaskKind kind, const std::string& detail) {
    throw SchemaError(to_string(kind) + " response " + detail);
}

void check_keys(TaskKind kind, const json& response, const std::vector<std::string>& allowed) {
    if (!response.is_object()) {
        fail_schema(kind, "is not an object: " + canonical_dump(response));
    }
    for (const auto& [key, _] : response.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail_schema(kind, "carries unknown key \"" + key + "\"");
        }
    }
}

const json& require(TaskKind kind, const json& response, const std::string& key) {
    auto it = response.find(key);
    if (it == response.end()) {
        fail_schema(kind, "is missing key \"" + key + "\"");
    }
    return *it;
}

std::string require_string(TaskKind kind, const json& response, const std::string& key,
                           bool allow_empty) {
    const json& value = require(kind, response, key);
    if (!value.is_string()) {
        fail_schema(kind, "key \"" + key + "\" is not a string");
    }
    auto s = value.get<std::string>();
    if (!allow_empty && s.empty()) {
        fail_schema(kind, "key \"" + key + "\" is empty");
    }
    return s;
}

bool require_bool(TaskKind kind, const json& response, const std::string& key) {
    const json& value = require(kind, response, key);
    if (!value.is_boolean()) {
        fail_schema(kind, "key \"" + key + "\" is not a boolean");
    }
    return value.get<bool>();
}

std::vector<std::string> require_string_array(TaskKind kind, const json& response,
                                              const std::string& key) {
    const json& value = require(kind, response, key);
    if (!value.is_array()) {
        fail_schema(kind, "key \"" + key + "\" is not an array");
    }
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) {
            fail_schema(kind, "key \"" + key + "\" holds a non-string element");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

void validate_decompose(const TaskRequest& request, const json& response) {
    TaskKind kind = request.task_kind;
    check_keys(kind, response, {"sub_queries"});
    auto subs = require_string_array(kind, response, "sub_queries");
    int n_max = request.payload.at("n_max").get<int>();
    if (subs.empty()) {
        fail_schema(kind, "holds zero sub-queries");
    }
    if (std::cmp_greater(subs.size(), n_max)) {
        fail_schema(kind, "holds " + std::to_string(subs.size()) +
                              " sub-queries, over the cap of " + std::to_string(n_max));
    }
    for (const auto& s : subs) {
        if (s.empty()) {
            fail_schema(kind, "holds an empty sub-query");
        }
    }
}

void validate_extract_sru(const TaskRequest& request, const json& response) {
    TaskKind kind = request.task_kind;
    check_keys(kind, response, {"relevance", "summary", "evidence", "confidence"});
    std::string label_text = require_string(kind, response, "relevance", false);
    evidence::RelevanceLabel label;
    try {
        label = evidence::relevance_from_string(label_text);
    } catch (const ValidationError&) {
        fail_schema(kind, "carries out-of-vocabulary relevance \"" + label_text + "\"");
    }
    require_string(kind, response, "summary", false);
    const json& confidence = require(kind, response, "confidence");
    if (!confidence.is_number()) {
        fail_schema(kind, "key \"confidence\" is not a number");
    }
    double c = confidence.get<double>();
    if (!(c >= 0.0 && c <= 1.0)) {
        fail_schema(kind, "confidence " + std::to_string(c) + " outside [0, 1]");
    }
    auto evidence_it = response.find("evidence");
    bool has_evidence = evidence_it != response.end() && !evidence_it->is_null();
    if (has_evidence && !evidence_it->is_string()) {
        fail_schema(kind, "key \"evidence\" is neither string nor null");
    }
    if (label == evidence::RelevanceLabel::Irrelevant && has_evidence) {
        fail_schema(kind, "labels the document Irrelevant yet carries evidence");
    }
    if (label == evidence::RelevanceLabel::Supportive &&
        (!has_evidence || evidence_it->get<std::string>().empty())) {
        fail_schema(kind, "labels the document Supportive without evidence");
    }
}

void validate_assess(const TaskRequest& request, const json& response) {
    TaskKind kind = request.task_kind;
    check_keys(kind, response,
               {"sufficient", "gaps", "conflicts", "negative_constraints", "rationale"});
    bool sufficient = require_bool(kind, response, "sufficient");
    auto gaps = require_string_array(kind, response, "gaps");
    auto conflicts = require_string_array(kind, response, "conflicts");
    require_string_array(kind, response, "negative_constraints");
    require_string(kind, response, "rationale", true);
    if (sufficient && (!gaps.empty() || !conflicts.empty())) {
        fail_schema(kind, "claims sufficiency while reporting blocking deficiencies");
    }
}

void validate_augment(const TaskRequest& request, const json& response) {
    check_keys(request.task_kind, response, {"query"});
    require_string(request.task_kind, response, "query", false);
}

void validate_judge(const TaskRequest& request, const json& response) {
    TaskKind kind = request.task_kind;
    check_keys(kind, response, {"answerable", "reason"});
    bool answerable = require_bool(kind, response, "answerable");
    std::string reason = require_string(kind, response, "reason", true);
    if (!answerable && reason.empty()) {
        fail_schema(kind, "abstains without a reason");
    }
}

void validate_synthesize(const TaskRequest& request, const json& response) {
    check_keys(request.task_kind, response, {"answer"});
    require_string(request.task_kind, response, "answer", false);
}

} // namespace

json validate_task_response(const TaskRequest& request, const json& response) {
    switch (request.task_kind) {
    case TaskKind::Decompose:
        validate_decompose(request, response);
        break;
    case TaskKind::ExtractSRU:
        validate_extract_sru(request, response);
        break;
    case TaskKind::AssessEvidence:
        validate_assess(request, response);
        break;
    case TaskKind::AugmentQuery:
        validate_augment(request, response);
        break;
    case TaskKind::JudgeAbstention:
        validate_judge(request, response);
        break;
    case TaskKind::SynthesizeAnswer:
        validate_synthesize(request, response);
        break;
    }
    return response;
}

json complete_task(Backend& backend, const TaskRequest& request, int max_schema_retries) {
    if (max_schema_retries < 0) {
        throw ContractError("max_schema_retries is negative");
    }
    std::string feedback;
    for (int attempt = 0;; ++attempt) {
        try {
            json raw = backend.complete(request, feedback);
            return validate_task_response(request, raw);
        } catch (const SchemaError& e) {
            if (attempt >= max_schema_retries) {
                throw;
            }
            feedback = e.what();
        }
    }
}

namespace {

std::string default_template_id(TaskKind kind) {
    switch (kind) {
    case TaskKind::Decompose:
        return "decompose";
    case TaskKind::ExtractSRU:
        return "extract_sru";
    case TaskKind::AssessEvidence:
        return "assess_evidence";
    case TaskKind::AugmentQuery:
        return "augment_query";
    case TaskKind::JudgeAbstention:
        return "judge_abstention";
    case TaskKind::SynthesizeAnswer:
        return "synthesize_answer";
    }
    throw ConfigError("invalid task kind value");
}

void check_anchor(const std::string& op, const std::string& anchor_question,
                  const evidence::EvidencePool& pool) {
    if (pool.anchor_question() != anchor_question) {
        throw ContractError(op + " called with question \"" + anchor_question +
                            "\" against a pool anchored to \"" + pool.anchor_question() + "\"");
    }
}

} // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, int max_schema_retries)
    : backend_(std::move(backend)), max_schema_retries_(max_schema_retries) {
    if (!backend_) {
        throw ContractError("gateway requires a backend");
    }
    if (max_schema_retries_ < 0) {
        throw ContractError("max_schema_retries is negative");
    }
}

json Gateway::run(TaskKind kind, json payload) const {
    TaskRequest request{kind, std::move(payload), default_template_id(kind)};
    return complete_task(*backend_, request, max_schema_retries_);
}

std::vector<std::string> Gateway::decompose_question(const std::string& question,
                                                     int n_max) const {
    if (question.empty()) {
        throw ContractError("decompose_question requires a non-empty question");
    }
    if (n_max < 1) {
        throw ContractError("decompose_question requires n_max >= 1");
    }
    json response = run(TaskKind::Decompose, decompose_payload(question, n_max));
    return response.at("sub_queries").get<std::vector<std::string>>();
}

evidence::Sru Gateway::extract_sru(const std::string& subquery, const corpus::Document& document,
                                   int iteration) const {
    if (subquery.empty()) {
        throw ContractError("extract_sru requires a non-empty subquery");
    }
    if (iteration < 0) {
        throw ContractError("extract_sru requires a non-negative iteration");
    }
    json response = run(TaskKind::ExtractSRU, extract_sru_payload(subquery, document));
    std::optional<std::string> extracted;
    if (response.contains("evidence") && !response.at("evidence").is_null()) {
        extracted = response.at("evidence").get<std::string>();
    }
    return evidence::make_sru(document.doc_id, subquery,
                              evidence::relevance_from_string(
                                  response.at("relevance").get<std::string>()),
                              response.at("summary").get<std::string>(), std::move(extracted),
                              response.at("confidence").get<double>(), iteration);
}

DeficiencyReport Gateway::assess_evidence(const std::string& anchor_question,
                                          const evidence::EvidencePool& pool) const {
    check_anchor("assess_evidence", anchor_question, pool);
    json response = run(TaskKind::AssessEvidence, assess_evidence_payload(anchor_question, pool));
    return DeficiencyReport::from_json(response);
}

std::string Gateway::augment_query(const std::string& anchor_question,
                                   const evidence::EvidencePool& pool,
                                   const DeficiencyReport& report) const {
    check_anchor("augment_query", anchor_question, pool);
    if (report.sufficient) {
        throw ContractError("augment_query called on a sufficient report");
    }
    json response =
        run(TaskKind::AugmentQuery, augment_query_payload(anchor_question, pool, report));
    return response.at("query").get<std::string>();
}

AbstentionVerdict Gateway::judge_abstention(const std::string& anchor_question,
                                            const evidence::EvidencePool& pool) const {
    check_anchor("judge_abstention", anchor_question, pool);
    json response =
        run(TaskKind::JudgeAbstention, judge_abstention_payload(anchor_question, pool));
    return AbstentionVerdict::from_json(response);
}

std::string Gateway::synthesize_answer(const std::string& anchor_question,
                                       const evidence::EvidencePool& pool) const {
    check_anchor("synthesize_answer", anchor_question, pool);
    if (pool.total_units() == 0) {
        throw ContractError("synthesize_answer called on an empty pool");
    }
    json response =
        run(TaskKind::SynthesizeAnswer, synthesize_answer_payload(anchor_question, pool));
    return response.at("answer").get<std::string>();
}

} // namespace iterag::gateway
