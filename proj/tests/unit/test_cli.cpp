#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "iterag/jsonio.hpp"

using iterag::json;

namespace {

namespace fs = std::filesystem;

struct CliRun {
    int exit_code = -1;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(ITERAG_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return {};
    }
    std::string output;
    char buffer[4096];
    while (fgets(buffer, sizeof(buffer), pipe) != nullptr) {
        output += buffer;
    }
    const int status = pclose(pipe);
    CliRun run;
    run.output = std::move(output);
    if (WIFEXITED(status)) {
        run.exit_code = WEXITSTATUS(status);
    }
    return run;
}

fs::path cli_tmp(const std::string& name) {
    const auto dir = fs::path(ITERAG_TEST_TMP) / "cli" / name;
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string quoted(const std::string& text) { return "'" + text + "'"; }

const char* kDemoConfig = "data/demo/config.json";

std::string write_tmp_config(const std::string& name, const json& body) {
    const auto path = cli_tmp("configs") / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body.dump(2);
    return path.string();
}

json demo_config_json() { return json::parse(read_file(kDemoConfig)); }

} // namespace

TEST_CASE("cli fixtures exist") {
    REQUIRE_MESSAGE(fs::exists(kDemoConfig),
                    "run the make_fixtures tool to generate data/demo before testing");
    REQUIRE(fs::exists("data/demo/corpus.jsonl"));
    REQUIRE(fs::exists("data/demo/dataset.jsonl"));
    REQUIRE(fs::exists("data/demo/script_table.json"));
}

TEST_CASE("ask answers on stdout and writes result artifacts") {
    const auto out_dir = cli_tmp("ask_river");
    const auto run = run_cli("ask " +
                             quoted("Which river flows through the capital of France?") +
                             " --config " + std::string(kDemoConfig) + " --output-dir " +
                             out_dir.string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("The Seine") != std::string::npos);

    const auto result = json::parse(read_file(out_dir / "result.json"));
    CHECK(result.at("outcome") == "answered");
    CHECK(result.at("answer") == "The Seine");

    const auto trace_text = read_file(out_dir / "trace.jsonl");
    int lines = 0;
    for (char c : trace_text) {
        lines += c == '\n' ? 1 : 0;
    }
    CHECK(lines == result.at("iterations_used").get<int>());
    std::istringstream trace_in(trace_text);
    std::string line;
    int iteration = 0;
    while (std::getline(trace_in, line)) {
        const auto trace = json::parse(line);
        CHECK(trace.at("iteration") == iteration++);
        CHECK(trace.contains("retrieved"));
    }
}

TEST_CASE("ask reruns are byte-identical") {
    const auto dir_a = cli_tmp("ask_again_a");
    const auto dir_b = cli_tmp("ask_again_b");
    const std::string base = "ask " + quoted("What is the capital of Germany?") +
                             " --config " + std::string(kDemoConfig) + " --output-dir ";
    const auto first = run_cli(base + dir_a.string());
    const auto second = run_cli(base + dir_b.string());
    CHECK(first.exit_code == 0);
    CHECK(second.exit_code == 0);
    CHECK(first.output == second.output);
    const auto result_a = read_file(dir_a / "result.json");
    CHECK(!result_a.empty());
    CHECK(result_a == read_file(dir_b / "result.json"));
    CHECK(read_file(dir_a / "trace.jsonl") == read_file(dir_b / "trace.jsonl"));
}

TEST_CASE("ask exits 2 on abstention and explains why") {
    const auto out_dir = cli_tmp("ask_atlantis");
    const auto run = run_cli("ask " + quoted("What is the capital of Atlantis?") +
                             " --config " + std::string(kDemoConfig) + " --output-dir " +
                             out_dir.string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 2);
    CHECK(run.output.find("abstained: no supportive evidence was found") != std::string::npos);
    const auto result = json::parse(read_file(out_dir / "result.json"));
    CHECK(result.at("outcome") == "abstained");
    CHECK(result.at("abstain_reason") == "no supportive evidence was found");
}

TEST_CASE("eval writes a report and per-question metrics") {
    const auto out_dir = cli_tmp("eval_plain");
    const auto run = run_cli("eval --config " + std::string(kDemoConfig) +
                             " --output-dir " + out_dir.string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("mean_f1") != std::string::npos);

    const auto report = json::parse(read_file(out_dir / "report.json"));
    CHECK(report.at("ablation") == "none");
    CHECK(report.at("seed") == 7);
    CHECK(report.at("means").at("f1") == 2.0 / 3.0);
    CHECK(report.at("means").at("em") == 2.0 / 3.0);
    CHECK(report.at("abstention_rate") == 1.0 / 3.0);
    CHECK(report.at("failure_count") == 0);
    REQUIRE(report.at("instances").size() == 3);
    CHECK(report.at("instances")[0].at("qid") == "demo_river");

    const auto csv = read_file(out_dir / "metrics.csv");
    CHECK(csv.find("target_ratio,qid,outcome,em,f1,acc,iterations_used\n") == 0);
    CHECK(csv.find(",demo_river,answered,1.0,1.0,1.0,") != std::string::npos);
    CHECK(csv.find(",demo_atlantis,abstained,0.0,0.0,0.0,3") != std::string::npos);
}

TEST_CASE("eval reruns are byte-identical across output directories") {
    const auto dir_a = cli_tmp("eval_again_a");
    const auto dir_b = cli_tmp("eval_again_b");
    const std::string base = "eval --config " + std::string(kDemoConfig) + " --output-dir ";
    const auto first = run_cli(base + dir_a.string());
    const auto second = run_cli(base + dir_b.string());
    CHECK(first.exit_code == 0);
    CHECK(second.exit_code == 0);
    const auto report_a = read_file(dir_a / "report.json");
    CHECK(!report_a.empty());
    CHECK(report_a == read_file(dir_b / "report.json"));
    CHECK(read_file(dir_a / "metrics.csv") == read_file(dir_b / "metrics.csv"));
}

TEST_CASE("eval sweeps noise ratios into one report") {
    const auto out_dir = cli_tmp("eval_sweep");
    const auto run = run_cli("eval --config " + std::string(kDemoConfig) +
                             " --noise-ratios 0.2 --output-dir " + out_dir.string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("ratio 0.2 realized ") != std::string::npos);

    const auto report = json::parse(read_file(out_dir / "report.json"));
    CHECK(report.at("ablation") == "none");
    REQUIRE(report.at("sweep").size() == 1);
    const auto& point = report.at("sweep")[0];
    CHECK(point.at("target_ratio") == 0.2);
    CHECK(point.at("realized_ratio_mean").get<double>() > 0.0);
    CHECK(point.at("report").at("mean_realized_noise_ratio") ==
          point.at("realized_ratio_mean"));

    const auto csv = read_file(out_dir / "metrics.csv");
    CHECK(csv.find("0.2,demo_river,") != std::string::npos);
    CHECK(csv.find("0.2,demo_atlantis,") != std::string::npos);
}

TEST_CASE("eval ablation flags change the pipeline variant") {
    const auto full_dir = cli_tmp("eval_full");
    const auto full = run_cli("eval --config " + std::string(kDemoConfig) +
                              " --output-dir " + full_dir.string());
    REQUIRE(full.exit_code == 0);
    const double full_f1 =
        json::parse(read_file(full_dir / "report.json")).at("means").at("f1").get<double>();

    const auto raw_dir = cli_tmp("eval_no_sru");
    const auto raw = run_cli("eval --config " + std::string(kDemoConfig) +
                             " --ablation no_sru --output-dir " + raw_dir.string());
    INFO("output: ", raw.output);
    REQUIRE(raw.exit_code == 0);
    const auto raw_report = json::parse(read_file(raw_dir / "report.json"));
    CHECK(raw_report.at("ablation") == "no_sru");
    CHECK(raw_report.at("means").at("f1").get<double>() < full_f1);
    CHECK(raw_report.at("config").at("ablation_no_sru") == true);

    const auto contrast_dir = cli_tmp("eval_no_negative");
    const auto contrast = run_cli("eval --config " + std::string(kDemoConfig) +
                                  " --ablation no_negative --output-dir " +
                                  contrast_dir.string());
    INFO("output: ", contrast.output);
    REQUIRE(contrast.exit_code == 0);
    const auto contrast_report = json::parse(read_file(contrast_dir / "report.json"));
    CHECK(contrast_report.at("ablation") == "no_negative");
    CHECK(contrast_report.at("config").at("ablation_no_negative") == true);

    const auto bad = run_cli("eval --config " + std::string(kDemoConfig) +
                             " --ablation everything --output-dir " +
                             cli_tmp("eval_bad_ablation").string());
    CHECK(bad.exit_code == 3);
    CHECK(bad.output.find("unknown ablation \"everything\"") != std::string::npos);
}

TEST_CASE("config mistakes exit 3 and name the offender") {
    auto body = demo_config_json();
    body["corpsu"] = "x";
    const auto bad_key = run_cli("eval --config " +
                                 write_tmp_config("bad_key.json", body) + " --output-dir " +
                                 cli_tmp("bad_key_out").string());
    CHECK(bad_key.exit_code == 3);
    CHECK(bad_key.output.find("unknown key \"corpsu\"") != std::string::npos);

    auto no_dataset = demo_config_json();
    no_dataset.erase("dataset");
    const auto config_path = write_tmp_config("no_dataset.json", no_dataset);
    const auto missing = run_cli("eval --config " + config_path + " --output-dir " +
                                 cli_tmp("no_dataset_out").string());
    CHECK(missing.exit_code == 3);
    CHECK(missing.output.find("eval requires a dataset") != std::string::npos);

    const auto overridden = run_cli("eval --config " + config_path +
                                    " --dataset data/demo/dataset.jsonl --output-dir " +
                                    cli_tmp("dataset_flag_out").string());
    CHECK(overridden.exit_code == 0);

    const auto unparsed = run_cli("ask --config " + std::string(kDemoConfig));
    CHECK(unparsed.exit_code == 3);
    const auto unknown_cmd = run_cli("frobnicate");
    CHECK(unknown_cmd.exit_code == 3);
}

TEST_CASE("missing input files exit 5") {
    auto body = demo_config_json();
    body["corpus"] = "data/demo/no_such_corpus.jsonl";
    const auto run = run_cli("ask " + quoted("What is the capital of Germany?") +
                             " --config " + write_tmp_config("gone_corpus.json", body) +
                             " --output-dir " + cli_tmp("gone_corpus_out").string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 5);
    CHECK(run.output.find("cannot read file") != std::string::npos);
}

TEST_CASE("scripted misses exit 4") {
    auto body = demo_config_json();
    body["corpus"] = "data/toy/corpus.jsonl";
    const auto run = run_cli("ask " + quoted("What is the capital of France?") +
                             " --config " + write_tmp_config("toy_corpus.json", body) +
                             " --output-dir " + cli_tmp("miss_out").string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 4);
    CHECK(run.output.find("scripted table has no entry") != std::string::npos);
}

TEST_CASE("ingest builds an index and reports the document count") {
    const auto out_path = cli_tmp("ingest") / "toy_index.json";
    const auto run = run_cli("ingest data/toy/corpus.jsonl " + out_path.string());
    INFO("output: ", run.output);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("3 documents indexed") != std::string::npos);
    const auto index = json::parse(read_file(out_path));
    CHECK(index.at("format") == "iterag-corpus-index");
    CHECK(index.at("doc_count") == 3);

    const auto dup_path = cli_tmp("ingest") / "dup.jsonl";
    {
        std::ofstream out(dup_path, std::ios::binary | std::ios::trunc);
        out << R"({"doc_id":"dup_a","title":"","text":"alpha"})" << "\n"
            << R"({"doc_id":"dup_a","title":"","text":"beta"})" << "\n";
    }
    const auto dup = run_cli("ingest " + dup_path.string() + " " +
                             (cli_tmp("ingest") / "dup_index.json").string());
    INFO("output: ", dup.output);
    CHECK(dup.exit_code == 5);
    CHECK(dup.output.find("duplicate doc_id \"dup_a\"") != std::string::npos);
}
