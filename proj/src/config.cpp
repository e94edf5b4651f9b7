#include "iterag/config.hpp"

#include "iterag/error.hpp"
#include "iterag/jsonio.hpp"

namespace iterag::config {

namespace {

void strict_keys(const json& value, const std::vector<std::string>& allowed,
                 const std::string& where) {
    try {
        reject_unknown_keys(value, allowed, where);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key \"" + key + "\" has the wrong type");
    }
}

loop::LoopConfig parse_loop(const json& obj) {
    strict_keys(obj,
                {"max_iterations", "top_k", "n_max", "retrieval_mode", "noise",
                 "ablation_no_sru", "ablation_no_negative", "skip_seen_docs"},
                "config section \"loop\"");
    loop::LoopConfig cfg;
    cfg.max_iterations = get_or(obj, "max_iterations", cfg.max_iterations);
    cfg.top_k = get_or(obj, "top_k", cfg.top_k);
    cfg.n_max = get_or(obj, "n_max", cfg.n_max);
    if (obj.contains("retrieval_mode")) {
        cfg.retrieval_mode =
            corpus::retrieval_mode_from_string(obj.at("retrieval_mode").get<std::string>());
    }
    if (obj.contains("noise") && !obj.at("noise").is_null()) {
        const json& noise = obj.at("noise");
        strict_keys(noise, {"target_ratio", "seed"}, "config section \"loop.noise\"");
        loop::NoiseConfig nc;
        if (!noise.contains("target_ratio")) {
            throw ConfigError("config section \"loop.noise\" needs target_ratio");
        }
        nc.target_ratio = noise.at("target_ratio").get<double>();
        nc.seed = get_or<std::uint64_t>(noise, "seed", 0);
        cfg.noise = nc;
    }
    cfg.ablation_no_sru = get_or(obj, "ablation_no_sru", cfg.ablation_no_sru);
    cfg.ablation_no_negative = get_or(obj, "ablation_no_negative", cfg.ablation_no_negative);
    cfg.skip_seen_docs = get_or(obj, "skip_seen_docs", cfg.skip_seen_docs);
    if (cfg.max_iterations < 1) {
        throw ConfigError("max_iterations must be at least 1");
    }
    if (cfg.top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    if (cfg.n_max < 1) {
        throw ConfigError("n_max must be at least 1");
    }
    return cfg;
}

BackendSpec parse_backend(const json& obj) {
    strict_keys(obj,
                {"kind", "script_table", "endpoint", "model", "api_key_env", "templates_dir",
                 "temperature", "timeout_ms", "max_in_flight", "max_schema_retries"},
                "config section \"backend\"");
    BackendSpec spec;
    std::string kind = get_or<std::string>(obj, "kind", "scripted");
    if (kind == "scripted") {
        spec.kind = BackendSpec::Kind::Scripted;
        spec.script_table = get_or<std::string>(obj, "script_table", "");
        if (spec.script_table.empty()) {
            throw ConfigError("scripted backend needs script_table");
        }
    } else if (kind == "http") {
        spec.kind = BackendSpec::Kind::Http;
        spec.http.endpoint = get_or<std::string>(obj, "endpoint", "");
        spec.http.model = get_or<std::string>(obj, "model", "");
        if (spec.http.endpoint.empty() || spec.http.model.empty()) {
            throw ConfigError("http backend needs endpoint and model");
        }
        spec.http.api_key_env = get_or(obj, "api_key_env", spec.http.api_key_env);
        spec.http.templates_dir = get_or(obj, "templates_dir", spec.http.templates_dir);
        spec.http.temperature = get_or(obj, "temperature", spec.http.temperature);
        spec.http.timeout_ms = get_or(obj, "timeout_ms", spec.http.timeout_ms);
        spec.http.max_in_flight = get_or(obj, "max_in_flight", spec.http.max_in_flight);
    } else {
        throw ConfigError("backend kind must be \"scripted\" or \"http\", got \"" + kind +
                          "\"");
    }
    spec.max_schema_retries = get_or(obj, "max_schema_retries", spec.max_schema_retries);
    if (spec.max_schema_retries < 0) {
        throw ConfigError("max_schema_retries must be non-negative");
    }
    return spec;
}

} // namespace

RunConfigFile load_run_config(const std::string& path) {
    json root;
    try {
        root = read_json_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config file " + path + " is not an object");
    }
    strict_keys(root,
                {"corpus", "embeddings", "dataset", "output_dir", "seed", "parallelism",
                 "backend", "loop"},
                "config file " + path);
    RunConfigFile cfg;
    cfg.corpus_path = get_or<std::string>(root, "corpus", "");
    if (cfg.corpus_path.empty()) {
        throw ConfigError("config file " + path + " needs a corpus path");
    }
    if (root.contains("embeddings") && !root.at("embeddings").is_null()) {
        cfg.embeddings_path = root.at("embeddings").get<std::string>();
    }
    if (root.contains("dataset") && !root.at("dataset").is_null()) {
        cfg.dataset_path = root.at("dataset").get<std::string>();
    }
    cfg.output_dir = get_or(root, "output_dir", cfg.output_dir);
    cfg.seed = get_or<std::uint64_t>(root, "seed", 0);
    cfg.parallelism = get_or(root, "parallelism", cfg.parallelism);
    if (cfg.parallelism < 1) {
        throw ConfigError("parallelism must be at least 1");
    }
    if (!root.contains("backend")) {
        throw ConfigError("config file " + path + " needs a backend section");
    }
    cfg.backend = parse_backend(root.at("backend"));
    if (root.contains("loop")) {
        cfg.loop = parse_loop(root.at("loop"));
    }
    return cfg;
}

std::shared_ptr<gateway::Backend> make_backend(const BackendSpec& spec) {
    if (spec.kind == BackendSpec::Kind::Scripted) {
        return std::make_shared<gateway::ScriptedBackend>(
            gateway::ScriptedBackend::from_file(spec.script_table));
    }
    return gateway::HttpBackend::create(spec.http);
}

gateway::Gateway make_gateway(const BackendSpec& spec) {
    return gateway::Gateway(make_backend(spec), spec.max_schema_retries);
}

} // namespace iterag::config
