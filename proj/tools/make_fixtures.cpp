#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "iterag/gateway.hpp"
#include "iterag/harness.hpp"
#include "iterag/jsonio.hpp"
#include "iterag/loop.hpp"
#include "support/scenario.hpp"

namespace fs = std::filesystem;
using iterag::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string corpus_jsonl(const testsup::World& world) {
    std::string lines;
    for (const auto& doc : world.documents) {
        lines += json{{"doc_id", doc.doc_id}, {"title", doc.title}, {"text", doc.text}}.dump();
        lines += "\n";
    }
    return lines;
}

std::string dataset_jsonl(const std::vector<iterag::eval::QAInstance>& dataset) {
    std::string lines;
    for (const auto& instance : dataset) {
        lines += json{{"qid", instance.qid},
                      {"question", instance.question},
                      {"gold_answers", instance.gold_answers},
                      {"task_kind", iterag::eval::to_string(instance.task_kind)}}
                     .dump();
        lines += "\n";
    }
    return lines;
}

} // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("data/demo");
    try {
        const auto world = testsup::demo_world();
        const auto dataset = testsup::demo_dataset();
        const auto corpus = world.build_corpus();

        iterag::loop::LoopConfig loop;
        loop.max_iterations = 3;
        loop.top_k = 5;
        loop.n_max = 4;
        loop.skip_seen_docs = false;
        const std::uint64_t seed = 7;

        auto recorder = std::make_shared<iterag::gateway::RecordingBackend>(
            std::make_shared<testsup::OracleBackend>(world));
        const iterag::gateway::Gateway gateway(recorder);

        // Cover every payload the CLI can produce against these fixtures: the
        // plain benchmark (which also covers per-question asks, since the demo
        // config carries no noise), a 0.2-ratio sweep, and the raw-pool variant.
        iterag::eval::run_benchmark(dataset, corpus, gateway, loop, seed, 1);
        iterag::eval::noise_sweep(dataset, corpus, gateway, loop, {0.2}, seed, 1);
        iterag::loop::LoopConfig raw_loop = loop;
        raw_loop.ablation_no_sru = true;
        iterag::eval::run_benchmark(dataset, corpus, gateway, raw_loop, seed, 1);
        iterag::loop::LoopConfig contrast_loop = loop;
        contrast_loop.ablation_no_negative = true;
        iterag::eval::run_benchmark(dataset, corpus, gateway, contrast_loop, seed, 1);

        const std::string demo_root = out_dir.generic_string();
        const json config{
            {"corpus", demo_root + "/corpus.jsonl"},
            {"dataset", demo_root + "/dataset.jsonl"},
            {"output_dir", "out/demo"},
            {"seed", seed},
            {"parallelism", 1},
            {"backend", {{"kind", "scripted"}, {"script_table", demo_root + "/script_table.json"}}},
            {"loop",
             {{"max_iterations", loop.max_iterations},
              {"top_k", loop.top_k},
              {"n_max", loop.n_max},
              {"skip_seen_docs", loop.skip_seen_docs}}}};

        write_file(out_dir / "corpus.jsonl", corpus_jsonl(world));
        write_file(out_dir / "dataset.jsonl", dataset_jsonl(dataset));
        write_file(out_dir / "config.json", config.dump(2) + "\n");
        write_file(out_dir / "script_table.json", recorder->table_json().dump(2) + "\n");

        std::cout << "wrote " << demo_root << " fixtures (" << recorder->size()
                  << " scripted responses)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures failed: " << e.what() << "\n";
        return 1;
    }
}
