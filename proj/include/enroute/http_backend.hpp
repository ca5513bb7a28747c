#pragma once

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "enroute/backend.hpp"
#include "enroute/error.hpp"

namespace enroute {

// Live adapter for providers speaking the wire contract in
// docs/wire-contract.md. Transport problems and server-side failures map to
// backend_unavailable (retryable); contract violations -- a provider that
// cannot return per-token logprobs or token counts -- map to
// logprobs_unsupported and name the backend, since retrying cannot fix them.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendDescriptor desc,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(5000))
        : desc_(std::move(desc)), client_(make_client(desc_, timeout)) {}

    const std::string& model_id() const override { return desc_.model_id; }

    void validate_capabilities() override {
        auto res = client_.Get("/v1/capabilities");
        if (!res)
            raise(ErrorKind::backend_unavailable,
                  desc_.model_id + ": capability probe failed (" +
                      httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            raise(ErrorKind::backend_unavailable,
                  desc_.model_id + ": capability probe returned HTTP " +
                      std::to_string(res->status));
        auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.value("logprobs", false))
            raise(ErrorKind::logprobs_unsupported,
                  "backend '" + desc_.model_id + "' does not offer per-token logprobs");
    }

    CompletionResult complete(std::uint64_t prompt_tokens, std::int64_t step) override {
        nlohmann::ordered_json req;
        req["model"] = desc_.model_id;
        req["step"] = step;
        req["prompt_tokens"] = prompt_tokens;
        req["logprobs"] = true;

        auto started = std::chrono::steady_clock::now();
        auto res = client_.Post("/v1/completions", req.dump(), "application/json");
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();

        if (!res)
            raise(ErrorKind::backend_unavailable,
                  desc_.model_id + ": transport failure (" + httplib::to_string(res.error()) +
                      ")");
        if (res->status != 200)
            raise(ErrorKind::backend_unavailable,
                  desc_.model_id + ": HTTP " + std::to_string(res->status));

        auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded())
            raise(ErrorKind::backend_unavailable, desc_.model_id + ": malformed response body");
        if (!j.contains("token_logprobs") || !j["token_logprobs"].is_array() ||
            j["token_logprobs"].empty())
            raise(ErrorKind::logprobs_unsupported,
                  "backend '" + desc_.model_id + "' returned no token logprobs");
        if (!j.contains("input_tokens") || !j.contains("output_tokens"))
            raise(ErrorKind::logprobs_unsupported,
                  "backend '" + desc_.model_id + "' returned no token counts");

        CompletionResult result;
        try {
            result.record.sequence_id = step;
            result.record.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
            result.record.input_tokens = j["input_tokens"].get<std::uint64_t>();
            result.record.output_tokens = j["output_tokens"].get<std::uint64_t>();
            if (j.contains("confidence"))
                result.record.task_confidence = j["confidence"].get<double>();
            result.truncated = j.value("truncated", false);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::backend_unavailable,
                  desc_.model_id + ": malformed response field (" + std::string(e.what()) + ")");
        }
        result.latency_ms = elapsed;
        return result;
    }

private:
    static httplib::Client make_client(const BackendDescriptor& desc,
                                       std::chrono::milliseconds timeout) {
        desc.validate();
        if (desc.kind != BackendKind::live)
            raise(ErrorKind::domain_error, "descriptor is not a live backend");
        httplib::Client client(*desc.endpoint);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        return client;
    }

    BackendDescriptor desc_;
    httplib::Client client_;
};

} // namespace enroute
