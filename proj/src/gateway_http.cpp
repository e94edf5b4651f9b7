#include "iterag/gateway_http.hpp"

#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <mutex>

#include <httplib.h>

#include "iterag/error.hpp"

namespace iterag::gateway {

namespace {

class HttplibTransport : public ChatTransport {
public:
    HttplibTransport(const std::string& endpoint, std::string api_key, int timeout_ms)
        : api_key_(std::move(api_key)), timeout_ms_(timeout_ms) {
        auto scheme_end = endpoint.find("://");
        if (scheme_end == std::string::npos) {
            throw ConfigError("endpoint \"" + endpoint + "\" has no scheme");
        }
        auto path_start = endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = endpoint;
        } else {
            base_ = endpoint.substr(0, path_start);
            path_ = endpoint.substr(path_start);
        }
        while (!path_.empty() && path_.back() == '/') {
            path_.pop_back();
        }
        const std::string suffix = "/chat/completions";
        if (path_.size() < suffix.size() ||
            path_.compare(path_.size() - suffix.size(), suffix.size(), suffix) != 0) {
            path_ += suffix;
        }
    }

    json chat(const json& request_body) override {
        httplib::Client client(base_);
        client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        httplib::Headers headers;
        if (!api_key_.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }
        auto res = client.Post(path_, headers, request_body.dump(), "application/json");
        if (!res) {
            throw TransportError("chat request to " + base_ + path_ +
                                 " failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw TransportError("chat request to " + base_ + path_ + " returned status " +
                                 std::to_string(res->status) + ": " + res->body.substr(0, 300));
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw TransportError(std::string("chat response body is not valid JSON: ") +
                                 e.what());
        }
    }

private:
    std::string base_;
    std::string path_;
    std::string api_key_;
    int timeout_ms_;
};

} // namespace

std::unique_ptr<ChatTransport> make_http_transport(const std::string& endpoint,
                                                   const std::string& api_key, int timeout_ms) {
    return std::make_unique<HttplibTransport>(endpoint, api_key, timeout_ms);
}

PromptTemplate PromptTemplate::from_json(const json& j) {
    try {
        reject_unknown_keys(j, {"id", "system", "user"}, "prompt template");
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    PromptTemplate t;
    t.id = j.at("id").get<std::string>();
    t.system = j.at("system").get<std::string>();
    t.user = j.at("user").get<std::string>();
    if (t.id.empty() || t.user.empty()) {
        throw ConfigError("prompt template needs a non-empty id and user message");
    }
    return t;
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, text.size() - pos);
            return out;
        }
        auto close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            throw ConfigError("template has an unterminated {{ placeholder");
        }
        out.append(text, pos, open - pos);
        std::string name = text.substr(open + 2, close - open - 2);
        auto it = vars.find(name);
        if (it == vars.end()) {
            throw ConfigError("template references unknown placeholder {{" + name + "}}");
        }
        out += it->second;
        pos = close + 2;
    }
}

std::map<std::string, std::string> template_vars(const TaskRequest& request) {
    std::map<std::string, std::string> vars;
    for (const auto& [key, value] : request.payload.items()) {
        vars[key] = value.is_string() ? value.get<std::string>() : canonical_dump(value);
    }
    vars["payload"] = canonical_dump(request.payload);
    vars["task"] = to_string(request.task_kind);
    return vars;
}

/// Counting gate bounding concurrent transport calls.
class HttpBackend::InFlightGate {
public:
    explicit InFlightGate(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

namespace {

struct GateGuard {
    HttpBackend::InFlightGate* gate;
    ~GateGuard();
};

/// Strip an optional Markdown code fence from a model reply.
std::string strip_fences(const std::string& content) {
    auto begin = content.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    auto end = content.find_last_not_of(" \t\r\n");
    std::string body = content.substr(begin, end - begin + 1);
    if (body.size() >= 6 && body.compare(0, 3, "```") == 0 &&
        body.compare(body.size() - 3, 3, "```") == 0) {
        auto nl = body.find('\n');
        if (nl != std::string::npos) {
            body = body.substr(nl + 1, body.size() - nl - 1 - 3);
        }
    }
    return body;
}

} // namespace

GateGuard::~GateGuard() { gate->release(); }

HttpBackend::HttpBackend(HttpBackendConfig config, std::unique_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (!transport_) {
        throw ConfigError("http backend requires a transport");
    }
    if (config_.model.empty()) {
        throw ConfigError("http backend requires a model name");
    }
    if (config_.max_in_flight < 1) {
        throw ConfigError("max_in_flight must be at least 1");
    }
    gate_ = std::make_unique<InFlightGate>(config_.max_in_flight);
    namespace fs = std::filesystem;
    for (const char* id : {"decompose", "extract_sru", "assess_evidence", "augment_query",
                           "judge_abstention", "synthesize_answer"}) {
        fs::path file = fs::path(config_.templates_dir) / (std::string(id) + ".json");
        json spec;
        try {
            spec = read_json_file(file.string());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        PromptTemplate t = PromptTemplate::from_json(spec);
        if (t.id != id) {
            throw ConfigError("prompt template " + file.string() + " declares id \"" + t.id +
                              "\"");
        }
        templates_.emplace(t.id, std::move(t));
    }
}

HttpBackend::~HttpBackend() = default;

std::shared_ptr<HttpBackend> HttpBackend::create(HttpBackendConfig config) {
    if (config.endpoint.empty()) {
        throw ConfigError("http backend requires an endpoint");
    }
    std::string api_key;
    if (!config.api_key_env.empty()) {
        if (const char* value = std::getenv(config.api_key_env.c_str())) {
            api_key = value;
        }
    }
    auto transport = make_http_transport(config.endpoint, api_key, config.timeout_ms);
    return std::make_shared<HttpBackend>(std::move(config), std::move(transport));
}

json HttpBackend::complete(const TaskRequest& request, const std::string& schema_feedback) {
    auto it = templates_.find(request.prompt_template_id);
    if (it == templates_.end()) {
        throw ConfigError("no prompt template loaded for id \"" + request.prompt_template_id +
                          "\"");
    }
    const PromptTemplate& tmpl = it->second;
    auto vars = template_vars(request);

    json messages = json::array();
    if (!tmpl.system.empty()) {
        messages.push_back(json{{"role", "system"}, {"content", render_template(tmpl.system, vars)}});
    }
    messages.push_back(json{{"role", "user"}, {"content", render_template(tmpl.user, vars)}});
    if (!schema_feedback.empty()) {
        messages.push_back(json{
            {"role", "user"},
            {"content", "Your previous reply violated the response schema: " + schema_feedback +
                            "\nAnswer again with ONLY one valid JSON object, no prose."}});
    }
    json body{{"model", config_.model},
              {"messages", std::move(messages)},
              {"temperature", config_.temperature}};

    gate_->acquire();
    GateGuard guard{gate_.get()};
    json response = transport_->chat(body);

    if (!response.contains("choices") || !response.at("choices").is_array() ||
        response.at("choices").empty()) {
        throw TransportError("chat response carries no choices");
    }
    const json& message = response.at("choices").at(0).at("message");
    if (!message.contains("content") || !message.at("content").is_string()) {
        throw TransportError("chat response message carries no text content");
    }
    std::string content = strip_fences(message.at("content").get<std::string>());
    try {
        return json::parse(content);
    } catch (const json::parse_error&) {
        throw SchemaError(to_string(request.task_kind) +
                          " reply is not a JSON object: " + content.substr(0, 200));
    }
}

} // namespace iterag::gateway
