#pragma once
// Minimal text-completion contract for LLM-backed planning: send prompt text,
// receive reply text. Any backend can be wired in behind this interface; the
// bundled HTTP implementation lives in http_backend.hpp.

#include <string>

#include "lookaside/common.hpp"

namespace lookaside::agent {

// Transport or protocol failure talking to a backend.
struct BackendError : Error {
    using Error::Error;
};

class TextCompletionBackend {
public:
    virtual ~TextCompletionBackend() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmSettings {
    std::string endpoint;   // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model;
    double timeout_s = 60.0;
    std::string api_key_env = "LOOKASIDE_API_KEY";

    bool configured() const { return !endpoint.empty() && !model.empty(); }
};

}  // namespace lookaside::agent
