#pragma once

#include <map>
#include <memory>
#include <string>

#include "iterag/gateway.hpp"

namespace iterag::gateway {

/// One chat-completions round trip: full request body in, parsed response
/// body out. Swappable so tests can fake the wire without a server.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual json chat(const json& request_body) = 0;
};

/// Live transport against an OpenAI-compatible endpoint. `endpoint` is the
/// API base (e.g. https://api.openai.com/v1); /chat/completions is appended
/// unless already present. Empty api_key sends no Authorization header.
std::unique_ptr<ChatTransport> make_http_transport(const std::string& endpoint,
                                                   const std::string& api_key, int timeout_ms);

struct HttpBackendConfig {
    std::string endpoint;
    std::string model;
    /// Environment variable holding the bearer token; resolved at
    /// construction. Unset or empty means anonymous access.
    std::string api_key_env = "ITERAG_API_KEY";
    std::string templates_dir = "assets/prompts";
    double temperature = 0.0;
    int timeout_ms = 60000;
    int max_in_flight = 4;
};

/// Instruction template for one task: a system message plus a user message
/// with {{placeholder}} slots filled from the task payload.
struct PromptTemplate {
    std::string id;
    std::string system;
    std::string user;

    static PromptTemplate from_json(const json& j);
};

/// Substitute every {{name}} slot from vars; an unknown slot is a config
/// error so template typos surface immediately.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars);

/// Variables available to a template for one request: every top-level payload
/// field by name plus {{payload}} (canonical JSON) and {{task}}.
std::map<std::string, std::string> template_vars(const TaskRequest& request);

/// Backend speaking the chat-completions wire format. Prompts come from
/// external template files so prompt iteration never needs a rebuild. The
/// model reply must be a single JSON object (optionally fenced); anything
/// else is a schema violation, which complete_task turns into a re-ask.
class HttpBackend : public Backend {
public:
    HttpBackend(HttpBackendConfig config, std::unique_ptr<ChatTransport> transport);
    ~HttpBackend() override;

    /// Build with the live transport, resolving credentials from the
    /// configured environment variable.
    static std::shared_ptr<HttpBackend> create(HttpBackendConfig config);

    json complete(const TaskRequest& request, const std::string& schema_feedback) override;
    std::string name() const override { return "http"; }

    class InFlightGate;

private:
    HttpBackendConfig config_;
    std::unique_ptr<ChatTransport> transport_;
    std::map<std::string, PromptTemplate> templates_;
    std::unique_ptr<InFlightGate> gate_;
};

} // namespace iterag::gateway
