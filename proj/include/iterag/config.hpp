#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "iterag/gateway.hpp"
#include "iterag/gateway_http.hpp"
#include "iterag/loop.hpp"

namespace iterag::config {

struct BackendSpec {
    enum class Kind { Scripted, Http };
    Kind kind = Kind::Scripted;
    /// Scripted: path to the response table.
    std::string script_table;
    /// Http: endpoint, model, credentials env var, prompt templates.
    gateway::HttpBackendConfig http;
    int max_schema_retries = 2;
};

/// One run's full configuration. The file is the single source of truth;
/// command-line flags only pick sweeps and paths.
struct RunConfigFile {
    std::string corpus_path;
    std::optional<std::string> embeddings_path;
    std::optional<std::string> dataset_path;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int parallelism = 1;
    BackendSpec backend;
    loop::LoopConfig loop;
};

/// Parse a config file. Unknown keys are rejected by name at every level so
/// typos never silently fall back to defaults.
RunConfigFile load_run_config(const std::string& path);

std::shared_ptr<gateway::Backend> make_backend(const BackendSpec& spec);

gateway::Gateway make_gateway(const BackendSpec& spec);

} // namespace iterag::config
