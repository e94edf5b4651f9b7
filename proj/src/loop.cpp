#include "iterag/loop.hpp"

#include <atomic>
#include <thread>

namespace iterag::loop {

json to_json(const LoopConfig& config) {
    json j{{"max_iterations", config.max_iterations},
           {"top_k", config.top_k},
           {"n_max", config.n_max},
           {"retrieval_mode", corpus::to_string(config.retrieval_mode)},
           {"ablation_no_sru", config.ablation_no_sru},
           {"ablation_no_negative", config.ablation_no_negative},
           {"skip_seen_docs", config.skip_seen_docs}};
    if (config.noise) {
        j["noise"] = json{{"target_ratio", config.noise->target_ratio},
                          {"seed", config.noise->seed}};
    }
    return j;
}

json SubQueryRetrieval::to_json() const {
    json j{{"subquery", subquery}, {"doc_ids", doc_ids}};
    if (realized_noise_ratio) {
        j["realized_noise_ratio"] = *realized_noise_ratio;
    }
    if (error) {
        j["error"] = *error;
    }
    return j;
}

json IterationTrace::to_json() const {
    json retrieved_json = json::array();
    for (const auto& r : retrieved) {
        retrieved_json.push_back(r.to_json());
    }
    json j{{"iteration", iteration},
           {"query_used", query_used},
           {"sub_queries", sub_queries},
           {"retrieved", std::move(retrieved_json)},
           {"retrieval_failures", retrieval_failures},
           {"new_units", new_units},
           {"pool_size", pool_size},
           {"assessment", assessment.to_json()}};
    if (supportive_ratio) {
        j["supportive_ratio"] = *supportive_ratio;
    }
    if (augmented_query) {
        j["augmented_query"] = *augmented_query;
    }
    return j;
}

std::string to_string(Outcome outcome) {
    return outcome == Outcome::Answered ? "answered" : "abstained";
}

json RunResult::to_json() const {
    json traces_json = json::array();
    for (const auto& t : traces) {
        traces_json.push_back(t.to_json());
    }
    json j{{"outcome", to_string(outcome)},
           {"iterations_used", iterations_used},
           {"traces", std::move(traces_json)},
           {"final_pool", final_pool.to_json()}};
    if (outcome == Outcome::Answered) {
        j["answer"] = answer;
    } else {
        j["abstain_reason"] = abstain_reason;
    }
    return j;
}

namespace {

void check_preconditions(const std::string& question, const corpus::Corpus& corpus,
                         const LoopConfig& config, const corpus::EmbeddingProvider* embedder) {
    if (question.empty()) {
        throw ContractError("run_question requires a non-empty question");
    }
    if (config.max_iterations < 1) {
        throw ContractError("max_iterations must be at least 1");
    }
    if (config.top_k < 1) {
        throw ContractError("top_k must be at least 1");
    }
    if (config.n_max < 1) {
        throw ContractError("n_max must be at least 1");
    }
    if (config.retrieval_mode == corpus::RetrievalMode::Dense) {
        if (!corpus.has_dense_index()) {
            throw RetrievalError("dense retrieval requires a corpus with embeddings");
        }
        if (embedder == nullptr) {
            throw RetrievalError("dense retrieval requires an embedding provider");
        }
    }
    if (config.noise) {
        double ratio = config.noise->target_ratio;
        if (!(ratio >= 0.0 && ratio < 1.0)) {
            throw RetrievalError("noise target_ratio " + std::to_string(ratio) +
                                 " outside [0, 1)");
        }
    }
}

std::string raw_unit_text(const corpus::Document& doc) {
    return doc.title.empty() ? doc.text : doc.title + "\n" + doc.text;
}

} // namespace

RunResult run_question(const std::string& question, const corpus::Corpus& corpus,
                       const gateway::Gateway& gateway, const LoopConfig& config,
                       const corpus::EmbeddingProvider* embedder) {
    check_preconditions(question, corpus, config, embedder);

    evidence::EvidencePool pool(question);
    std::vector<IterationTrace> traces;
    int current_iteration = 0;
    // Episode-level noise seed, derived from the question text so a batch
    // gives every question its own reproducible noise stream.
    std::uint64_t noise_seed =
        config.noise ? seed_combine(config.noise->seed, question) : 0;
    try {
        std::string current_query = question;
        for (int t = 0; t < config.max_iterations; ++t) {
            current_iteration = t;
            IterationTrace trace;
            trace.iteration = t;
            trace.query_used = current_query;
            trace.sub_queries =
                gateway.decompose_question(current_query, config.n_max);

            std::vector<evidence::Sru> extracted;
            std::vector<evidence::RawUnit> raw_batch;
            std::size_t retrieved_subqueries = 0;
            for (std::size_t s = 0; s < trace.sub_queries.size(); ++s) {
                const std::string& subquery = trace.sub_queries[s];
                SubQueryRetrieval record;
                record.subquery = subquery;
                std::vector<corpus::Document> docs;
                try {
                    auto ranked = corpus.retrieve(subquery,
                                                  static_cast<std::size_t>(config.top_k),
                                                  config.retrieval_mode, embedder);
                    if (config.noise) {
                        auto noisy = corpus::inject_noise(
                            ranked, corpus, config.noise->target_ratio,
                            seed_combine(noise_seed, static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(s)));
                        docs = std::move(noisy.documents);
                        record.realized_noise_ratio = noisy.realized_ratio;
                    } else {
                        for (const auto& hit : ranked.hits) {
                            docs.push_back(corpus.document(hit.doc_id));
                        }
                    }
                    ++retrieved_subqueries;
                } catch (const RetrievalError& e) {
                    record.error = e.what();
                    ++trace.retrieval_failures;
                }
                for (const auto& doc : docs) {
                    record.doc_ids.push_back(doc.doc_id);
                    if (config.skip_seen_docs && pool.has_document(doc.doc_id)) {
                        continue;
                    }
                    if (config.ablation_no_sru) {
                        raw_batch.push_back(evidence::RawUnit{doc.doc_id, raw_unit_text(doc)});
                    } else {
                        extracted.push_back(gateway.extract_sru(subquery, doc, t));
                    }
                }
                trace.retrieved.push_back(std::move(record));
            }
            if (retrieved_subqueries == 0) {
                std::string detail;
                for (const auto& r : trace.retrieved) {
                    detail += "\n  " + r.subquery + ": " + r.error.value_or("unknown");
                }
                throw RunError("every sub-query retrieval failed at iteration " +
                                   std::to_string(t) + detail,
                               traces);
            }

            std::size_t before = pool.total_units();
            if (config.ablation_no_negative) {
                std::erase_if(extracted, [](const evidence::Sru& u) {
                    return u.relevance == evidence::RelevanceLabel::Irrelevant;
                });
            }
            pool.merge(extracted);
            for (auto& unit : raw_batch) {
                pool.add_raw(std::move(unit));
            }
            trace.new_units = static_cast<int>(pool.total_units() - before);
            trace.pool_size = static_cast<int>(pool.total_units());
            if (!pool.units().empty()) {
                trace.supportive_ratio = pool.supportive_ratio();
            }

            trace.assessment = gateway.assess_evidence(question, pool);
            if (trace.assessment.sufficient) {
                traces.push_back(std::move(trace));
                std::string answer = gateway.synthesize_answer(question, pool);
                return RunResult{Outcome::Answered, std::move(answer), "",
                                 t + 1,             std::move(traces), std::move(pool)};
            }
            if (t < config.max_iterations - 1) {
                current_query = gateway.augment_query(question, pool, trace.assessment);
                trace.augmented_query = current_query;
            }
            traces.push_back(std::move(trace));
        }

        current_iteration = config.max_iterations - 1;
        auto verdict = gateway.judge_abstention(question, pool);
        if (verdict.answerable) {
            std::string answer = gateway.synthesize_answer(question, pool);
            return RunResult{Outcome::Answered,     std::move(answer), "",
                             config.max_iterations, std::move(traces), std::move(pool)};
        }
        return RunResult{Outcome::Abstained,     "",                verdict.reason,
                         config.max_iterations,  std::move(traces), std::move(pool)};
    } catch (const RunError&) {
        throw;
    } catch (const Error& e) {
        throw RunError("question \"" + question + "\" failed at iteration " +
                           std::to_string(current_iteration) + ": " + e.what(),
                       std::move(traces));
    }
}

std::vector<BatchEntry> run_question_batch(const std::vector<std::string>& questions,
                                           const corpus::Corpus& corpus,
                                           const gateway::Gateway& gateway,
                                           const LoopConfig& config, int parallelism,
                                           const corpus::EmbeddingProvider* embedder) {
    if (parallelism < 1) {
        throw ContractError("parallelism must be at least 1");
    }
    std::vector<BatchEntry> entries(questions.size());
    if (questions.empty()) {
        return entries;
    }
    auto worker = [&](std::atomic<std::size_t>& next) {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= questions.size()) {
                return;
            }
            try {
                entries[i].result =
                    run_question(questions[i], corpus, gateway, config, embedder);
            } catch (const std::exception& e) {
                entries[i].error = e.what();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    std::size_t workers =
        std::min(static_cast<std::size_t>(parallelism), questions.size());
    if (workers == 1) {
        worker(next);
        return entries;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] { worker(next); });
    }
    for (auto& thread : threads) {
        thread.join();
    }
    return entries;
}

} // namespace iterag::loop
