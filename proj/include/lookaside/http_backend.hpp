#pragma once
// OpenAI-compatible chat-completions client for the TextCompletionBackend
// contract. Kept in its own header so only the CLI and its tests pay for the
// HTTP stack.

#include <httplib.h>
#include <json.hpp>

// glibc's resolv.h (dragged in by the HTTP stack) leaks a `_res` macro that
// mangles unrelated parameter names, notably inside Eigen.
#ifdef _res
#undef _res
#endif

#include <cstdlib>
#include <string>

#include "lookaside/llm_backend.hpp"

namespace lookaside::agent {

namespace detail {

struct ParsedEndpoint {
    std::string host;
    int port = 80;
    std::string path;
};

inline ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    std::string rest = endpoint;
    const std::string http = "http://";
    if (rest.rfind(http, 0) != 0)
        throw BackendError("only http:// endpoints are supported: " + endpoint);
    rest = rest.substr(http.size());
    ParsedEndpoint out;
    const size_t slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const size_t colon = hostport.find(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        out.port = std::stoi(hostport.substr(colon + 1));
    }
    if (out.host.empty()) throw BackendError("endpoint has no host: " + endpoint);
    return out;
}

}  // namespace detail

class HttpTextBackend final : public TextCompletionBackend {
public:
    explicit HttpTextBackend(LlmSettings settings) : settings_(std::move(settings)) {
        if (!settings_.configured())
            throw BackendError("LLM backend requires endpoint and model");
    }

    std::string complete(const std::string& prompt) override {
        const auto ep = detail::parse_endpoint(settings_.endpoint);
        httplib::Client client(ep.host, ep.port);
        const auto timeout = static_cast<time_t>(settings_.timeout_s);
        client.set_connection_timeout(timeout, 0);
        client.set_read_timeout(timeout, 0);
        client.set_write_timeout(timeout, 0);

        httplib::Headers headers;
        if (!settings_.api_key_env.empty()) {
            if (const char* key = std::getenv(settings_.api_key_env.c_str()); key && *key) {
                headers.emplace("Authorization", std::string("Bearer ") + key);
            }
        }

        nlohmann::json body;
        body["model"] = settings_.model;
        body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});

        const auto res = client.Post(ep.path, headers, body.dump(), "application/json");
        if (!res) throw BackendError("LLM transport failure: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError("LLM backend returned status " + std::to_string(res->status) +
                               ": " + res->body);
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed LLM backend response: ") + e.what());
        }
    }

private:
    LlmSettings settings_;
};

}  // namespace lookaside::agent
