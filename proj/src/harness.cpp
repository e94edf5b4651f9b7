#include "iterag/harness.hpp"

#include <cmath>
#include <set>

#include "iterag/error.hpp"

namespace iterag::eval {

QaTaskKind qa_task_kind_from_string(const std::string& s) {
    if (s == "short_form") {
        return QaTaskKind::ShortForm;
    }
    if (s == "long_form") {
        return QaTaskKind::LongForm;
    }
    if (s == "multi_hop") {
        return QaTaskKind::MultiHop;
    }
    throw ValidationError("unknown task_kind \"" + s + "\"");
}

std::string to_string(QaTaskKind kind) {
    switch (kind) {
    case QaTaskKind::ShortForm:
        return "short_form";
    case QaTaskKind::LongForm:
        return "long_form";
    case QaTaskKind::MultiHop:
        return "multi_hop";
    }
    throw ValidationError("invalid task_kind value");
}

std::vector<QAInstance> load_dataset(const std::string& path) {
    std::vector<QAInstance> instances;
    std::set<std::string> seen;
    for (const auto& [lineno, line] : read_lines(path)) {
        auto fail = [&](const std::string& detail) -> void {
            throw IngestError("dataset " + path + ":" + std::to_string(lineno) + ": " + detail);
        };
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(e.what());
        }
        try {
            QAInstance instance;
            instance.qid = record.at("qid").get<std::string>();
            instance.question = record.at("question").get<std::string>();
            instance.gold_answers = record.at("gold_answers").get<std::vector<std::string>>();
            instance.task_kind =
                qa_task_kind_from_string(record.at("task_kind").get<std::string>());
            if (instance.qid.empty()) {
                fail("qid is empty");
            }
            if (instance.question.empty()) {
                fail("question is empty");
            }
            if (instance.gold_answers.empty()) {
                fail("gold_answers is empty");
            }
            if (!seen.insert(instance.qid).second) {
                fail("duplicate qid \"" + instance.qid + "\"");
            }
            instances.push_back(std::move(instance));
        } catch (const json::exception& e) {
            fail(e.what());
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }
    if (instances.empty()) {
        throw IngestError("dataset " + path + " holds no instances");
    }
    return instances;
}

json InstanceScore::to_json() const {
    json j{{"qid", qid},
           {"outcome", outcome},
           {"iterations_used", iterations_used},
           {"f1", f1},
           {"acc", acc}};
    if (answer) {
        j["answer"] = *answer;
    }
    if (error) {
        j["error"] = *error;
    }
    if (em) {
        j["em"] = *em;
    }
    return j;
}

json MetricReport::to_json() const {
    json instances_json = json::array();
    for (const auto& instance : instances) {
        instances_json.push_back(instance.to_json());
    }
    json means{{"f1", mean_f1}, {"acc", mean_acc}};
    if (mean_em) {
        means["em"] = *mean_em;
    }
    json j{{"config", config_echo},
           {"seed", seed},
           {"normalization_version", normalization_version},
           {"instances", std::move(instances_json)},
           {"means", std::move(means)},
           {"abstention_rate", abstention_rate},
           {"failure_count", failure_count},
           {"supportive_curve", supportive_curve}};
    if (mean_realized_noise_ratio) {
        j["mean_realized_noise_ratio"] = *mean_realized_noise_ratio;
    }
    return j;
}

std::vector<double> accumulation_curve(const std::vector<loop::RunResult>& results) {
    if (results.empty()) {
        throw ContractError("accumulation_curve requires at least one run");
    }
    std::size_t longest = 0;
    for (const auto& result : results) {
        longest = std::max(longest, result.traces.size());
    }
    std::vector<double> curve;
    curve.reserve(longest);
    for (std::size_t t = 0; t < longest; ++t) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& result : results) {
            // Runs that stopped before t contribute nothing here; raw-text
            // pools carry no ratio and are skipped the same way.
            if (result.traces.size() > t && result.traces[t].supportive_ratio) {
                sum += *result.traces[t].supportive_ratio;
                ++n;
            }
        }
        curve.push_back(n == 0 ? 0.0 : sum / static_cast<double>(n));
    }
    return curve;
}

MetricReport run_benchmark(const std::vector<QAInstance>& dataset, const corpus::Corpus& corpus,
                           const gateway::Gateway& gateway, const loop::LoopConfig& config,
                           std::uint64_t seed, int parallelism,
                           const corpus::EmbeddingProvider* embedder) {
    if (dataset.empty()) {
        throw ContractError("run_benchmark requires a non-empty dataset");
    }
    loop::LoopConfig effective = config;
    if (effective.noise) {
        effective.noise->seed = seed_combine(seed, effective.noise->seed);
    }
    std::vector<std::string> questions;
    questions.reserve(dataset.size());
    for (const auto& instance : dataset) {
        questions.push_back(instance.question);
    }
    auto entries =
        loop::run_question_batch(questions, corpus, gateway, effective, parallelism, embedder);

    MetricReport report;
    report.config_echo = loop::to_json(config);
    report.seed = seed;
    std::vector<loop::RunResult> results;
    int abstained = 0;
    double em_sum = 0.0, f1_sum = 0.0, acc_sum = 0.0;
    std::size_t em_n = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const QAInstance& instance = dataset[i];
        const loop::BatchEntry& entry = entries[i];
        InstanceScore score;
        score.qid = instance.qid;
        bool has_em = instance.task_kind != QaTaskKind::LongForm;
        if (has_em) {
            score.em = 0.0;
        }
        if (!entry.ok()) {
            score.outcome = "failed";
            score.error = entry.error;
            ++report.failure_count;
        } else {
            const loop::RunResult& result = *entry.result;
            score.iterations_used = result.iterations_used;
            if (result.outcome == loop::Outcome::Abstained) {
                score.outcome = "abstained";
                ++abstained;
            } else {
                score.outcome = "answered";
                score.answer = result.answer;
                score.f1 = score_f1(result.answer, instance.gold_answers);
                score.acc = static_cast<double>(score_acc(result.answer, instance.gold_answers));
                if (has_em) {
                    score.em = static_cast<double>(score_em(result.answer, instance.gold_answers));
                }
            }
            results.push_back(result);
        }
        if (score.em) {
            em_sum += *score.em;
            ++em_n;
        }
        f1_sum += score.f1;
        acc_sum += score.acc;
        report.instances.push_back(std::move(score));
    }
    auto n = static_cast<double>(dataset.size());
    report.mean_f1 = f1_sum / n;
    report.mean_acc = acc_sum / n;
    if (em_n > 0) {
        report.mean_em = em_sum / static_cast<double>(em_n);
    }
    report.abstention_rate = static_cast<double>(abstained) / n;
    if (!results.empty()) {
        report.supportive_curve = accumulation_curve(results);
    }
    if (config.noise) {
        double ratio_sum = 0.0;
        std::size_t ratio_n = 0;
        for (const auto& result : results) {
            for (const auto& trace : result.traces) {
                for (const auto& retrieval : trace.retrieved) {
                    if (retrieval.realized_noise_ratio) {
                        ratio_sum += *retrieval.realized_noise_ratio;
                        ++ratio_n;
                    }
                }
            }
        }
        report.mean_realized_noise_ratio =
            ratio_n == 0 ? 0.0 : ratio_sum / static_cast<double>(ratio_n);
    }
    return report;
}

std::vector<SweepPoint> noise_sweep(const std::vector<QAInstance>& dataset,
                                    const corpus::Corpus& corpus,
                                    const gateway::Gateway& gateway,
                                    const loop::LoopConfig& base_config,
                                    const std::vector<double>& ratios, std::uint64_t seed,
                                    int parallelism, const corpus::EmbeddingProvider* embedder) {
    std::vector<SweepPoint> points;
    for (double ratio : ratios) {
        if (!(ratio >= 0.0 && ratio < 1.0)) {
            throw ContractError("noise ratio " + std::to_string(ratio) + " outside [0, 1)");
        }
        loop::LoopConfig config = base_config;
        config.noise = loop::NoiseConfig{
            ratio, static_cast<std::uint64_t>(std::llround(ratio * 1e6))};
        MetricReport report =
            run_benchmark(dataset, corpus, gateway, config, seed, parallelism, embedder);
        SweepPoint point;
        point.target_ratio = ratio;
        point.realized_ratio_mean = report.mean_realized_noise_ratio.value_or(0.0);
        point.report = std::move(report);
        points.push_back(std::move(point));
    }
    return points;
}

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string csv_number(double value) { return json(value).dump(); }

void append_rows(std::string& out, const MetricReport& report,
                 const std::optional<double>& target_ratio) {
    for (const auto& instance : report.instances) {
        out += target_ratio ? csv_number(*target_ratio) : "";
        out += ',' + csv_field(instance.qid);
        out += ',' + instance.outcome;
        out += ',';
        if (instance.em) {
            out += csv_number(*instance.em);
        }
        out += ',' + csv_number(instance.f1);
        out += ',' + csv_number(instance.acc);
        out += ',' + std::to_string(instance.iterations_used);
        out += '\n';
    }
}

constexpr const char* kCsvHeader = "target_ratio,qid,outcome,em,f1,acc,iterations_used\n";

} // namespace

std::string metrics_csv(const MetricReport& report) {
    std::string out = kCsvHeader;
    append_rows(out, report, std::nullopt);
    return out;
}

std::string metrics_csv(const std::vector<SweepPoint>& points) {
    std::string out = kCsvHeader;
    for (const auto& point : points) {
        append_rows(out, point.report, point.target_ratio);
    }
    return out;
}

} // namespace iterag::eval
