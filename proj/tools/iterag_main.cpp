#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iterag/config.hpp"
#include "iterag/corpus.hpp"
#include "iterag/error.hpp"
#include "iterag/harness.hpp"
#include "iterag/jsonio.hpp"
#include "iterag/loop.hpp"

namespace fs = std::filesystem;
using iterag::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitAbstained = 2;
constexpr int kExitConfig = 3;
constexpr int kExitBackend = 4;
constexpr int kExitInput = 5;

int classify(const std::exception& e) {
    if (dynamic_cast<const iterag::ConfigError*>(&e) != nullptr) return kExitConfig;
    if (dynamic_cast<const iterag::loop::RunError*>(&e) != nullptr ||
        dynamic_cast<const iterag::TransportError*>(&e) != nullptr ||
        dynamic_cast<const iterag::SchemaError*>(&e) != nullptr ||
        dynamic_cast<const iterag::ScriptedMissError*>(&e) != nullptr) {
        return kExitBackend;
    }
    if (dynamic_cast<const iterag::IngestError*>(&e) != nullptr ||
        dynamic_cast<const iterag::RetrievalError*>(&e) != nullptr) {
        return kExitInput;
    }
    return kExitFailure;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw iterag::Error("cannot write output file " + path.string());
}

std::string trace_lines(const std::vector<iterag::loop::IterationTrace>& traces) {
    std::string lines;
    for (const auto& trace : traces) {
        lines += trace.to_json().dump();
        lines += "\n";
    }
    return lines;
}

std::string number_text(double value) { return json(value).dump(); }

void fold_noise_seed(iterag::config::RunConfigFile& cfg) {
    if (cfg.loop.noise) {
        cfg.loop.noise->seed = iterag::seed_combine(cfg.seed, cfg.loop.noise->seed);
    }
}

int run_ingest(const std::string& corpus_path, const std::optional<std::string>& embeddings_path,
               const std::string& out_path) {
    auto corpus = iterag::corpus::ingest_corpus(corpus_path, embeddings_path);
    iterag::corpus::save_corpus(corpus, out_path);
    std::cout << corpus.size() << " documents indexed\n";
    return kExitOk;
}

int run_ask(const std::string& question, const std::string& config_path,
            const std::optional<std::string>& output_dir) {
    auto cfg = iterag::config::load_run_config(config_path);
    if (output_dir) cfg.output_dir = *output_dir;
    fold_noise_seed(cfg);

    auto corpus = iterag::corpus::load_any(cfg.corpus_path, cfg.embeddings_path);
    auto gateway = iterag::config::make_gateway(cfg.backend);
    iterag::corpus::HashingEmbedder embedder;
    const fs::path out_dir(cfg.output_dir);

    try {
        auto result = iterag::loop::run_question(question, corpus, gateway, cfg.loop, &embedder);
        write_file(out_dir / "result.json", result.to_json().dump(2) + "\n");
        write_file(out_dir / "trace.jsonl", trace_lines(result.traces));
        if (result.outcome == iterag::loop::Outcome::Answered) {
            std::cout << result.answer << "\n";
            return kExitOk;
        }
        std::cout << "abstained: " << result.abstain_reason << "\n";
        return kExitAbstained;
    } catch (const iterag::loop::RunError& e) {
        write_file(out_dir / "trace.jsonl", trace_lines(e.traces()));
        throw;
    }
}

void print_means(const std::string& prefix, const iterag::eval::MetricReport& report) {
    std::cout << prefix;
    if (report.mean_em) std::cout << "mean_em " << number_text(*report.mean_em) << " ";
    std::cout << "mean_f1 " << number_text(report.mean_f1) << " mean_acc "
              << number_text(report.mean_acc) << " abstention_rate "
              << number_text(report.abstention_rate) << " failures " << report.failure_count
              << "\n";
}

int run_eval(const std::string& config_path, const std::optional<std::string>& dataset_path,
             const std::optional<std::string>& output_dir, const std::vector<double>& noise_ratios,
             const std::string& ablation) {
    auto cfg = iterag::config::load_run_config(config_path);
    if (dataset_path) cfg.dataset_path = *dataset_path;
    if (output_dir) cfg.output_dir = *output_dir;
    if (!cfg.dataset_path) {
        throw iterag::ConfigError(
            "eval requires a dataset: set \"dataset\" in the config or pass --dataset");
    }

    std::string ablation_tag = "none";
    if (!ablation.empty()) {
        if (ablation == "no_sru") {
            cfg.loop.ablation_no_sru = true;
        } else if (ablation == "no_negative") {
            cfg.loop.ablation_no_negative = true;
        } else {
            throw iterag::ConfigError("unknown ablation \"" + ablation +
                                      "\" (expected no_sru or no_negative)");
        }
        ablation_tag = ablation;
    }

    auto dataset = iterag::eval::load_dataset(*cfg.dataset_path);
    auto corpus = iterag::corpus::load_any(cfg.corpus_path, cfg.embeddings_path);
    auto gateway = iterag::config::make_gateway(cfg.backend);
    iterag::corpus::HashingEmbedder embedder;
    const fs::path out_dir(cfg.output_dir);

    json report_json;
    std::string csv;
    if (!noise_ratios.empty()) {
        auto points = iterag::eval::noise_sweep(dataset, corpus, gateway, cfg.loop, noise_ratios,
                                                cfg.seed, cfg.parallelism, &embedder);
        json sweep = json::array();
        for (const auto& point : points) {
            sweep.push_back({{"target_ratio", point.target_ratio},
                             {"realized_ratio_mean", point.realized_ratio_mean},
                             {"report", point.report.to_json()}});
            print_means("ratio " + number_text(point.target_ratio) + " realized " +
                            number_text(point.realized_ratio_mean) + " ",
                        point.report);
        }
        report_json = json{{"ablation", ablation_tag}, {"sweep", sweep}};
        csv = iterag::eval::metrics_csv(points);
    } else {
        auto report = iterag::eval::run_benchmark(dataset, corpus, gateway, cfg.loop, cfg.seed,
                                                  cfg.parallelism, &embedder);
        report_json = report.to_json();
        report_json["ablation"] = ablation_tag;
        csv = iterag::eval::metrics_csv(report);
        print_means("", report);
    }

    write_file(out_dir / "report.json", report_json.dump(2) + "\n");
    write_file(out_dir / "metrics.csv", csv);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "iterag: iterative evidence-driven retrieval QA.\n"
        "Exit codes: 0 ok, 1 runtime failure, 2 abstained, 3 config error, 4 backend error, "
        "5 input error."};
    app.require_subcommand(1);

    std::string ingest_corpus_path;
    std::string ingest_out_path;
    std::string ingest_embeddings;
    auto* ingest = app.add_subcommand("ingest", "Build and persist corpus indexes");
    ingest->add_option("corpus", ingest_corpus_path, "Line-delimited document records")->required();
    ingest->add_option("out", ingest_out_path, "Snapshot output path")->required();
    ingest->add_option("--embeddings", ingest_embeddings, "Embedding sidecar (doc_id -> vector)");

    std::string ask_question;
    std::string ask_config;
    std::string ask_output_dir;
    auto* ask = app.add_subcommand("ask", "Answer one question through the reasoning loop");
    ask->add_option("question", ask_question, "Question text")->required();
    ask->add_option("--config", ask_config, "Run config file")->required();
    ask->add_option("--output-dir", ask_output_dir, "Override the config output directory");

    std::string eval_config;
    std::string eval_dataset;
    std::string eval_output_dir;
    std::vector<double> eval_noise_ratios;
    std::string eval_ablation;
    auto* eval = app.add_subcommand("eval", "Score a dataset and write a metric report");
    eval->add_option("--config", eval_config, "Run config file")->required();
    eval->add_option("--dataset", eval_dataset, "Override the config dataset path");
    eval->add_option("--output-dir", eval_output_dir, "Override the config output directory");
    eval->add_option("--noise-ratios", eval_noise_ratios,
                     "Comma-separated target noise ratios for a sweep")
        ->delimiter(',');
    eval->add_option("--ablation", eval_ablation, "Variant to run: no_sru or no_negative");

    auto opt = [](const std::string& s) {
        return s.empty() ? std::nullopt : std::optional<std::string>(s);
    };

    int rc = kExitOk;
    ingest->callback(
        [&] { rc = run_ingest(ingest_corpus_path, opt(ingest_embeddings), ingest_out_path); });
    ask->callback([&] { rc = run_ask(ask_question, ask_config, opt(ask_output_dir)); });
    eval->callback([&] {
        rc = run_eval(eval_config, opt(eval_dataset), opt(eval_output_dir), eval_noise_ratios,
                      eval_ablation);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int parse_rc = app.exit(e);
        return parse_rc == 0 ? kExitOk : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return rc;
}
