#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enroute/error.hpp"
#include "enroute/record.hpp"
#include "enroute/trace.hpp"

namespace enroute {

enum class BackendKind { live, replay };

inline const char* to_string(BackendKind kind) noexcept {
    return kind == BackendKind::live ? "live" : "replay";
}

struct BackendDescriptor {
    std::string model_id;
    BackendKind kind = BackendKind::replay;
    std::optional<std::string> endpoint;    // required for live backends
    std::optional<std::string> trace_path;  // required for replay backends
    std::optional<std::string> price_ref;   // key into the pricing table

    void validate() const {
        if (model_id.empty())
            raise(ErrorKind::domain_error, "backend descriptor needs a model_id");
        if (kind == BackendKind::live && !endpoint)
            raise(ErrorKind::domain_error,
                  "live backend '" + model_id + "' needs an endpoint");
        if (kind == BackendKind::replay && !trace_path)
            raise(ErrorKind::domain_error,
                  "replay backend '" + model_id + "' needs a trace_path");
    }
};

struct CompletionResult {
    InferenceRecord record;
    double latency_ms = 0.0;
    bool truncated = false;
};

// Uniform completion surface. Steps are 1-based ordinals within a session;
// prompt_tokens is a size hint only (the provider's reported counts are
// authoritative for billing).
class Backend {
public:
    virtual ~Backend() = default;
    virtual const std::string& model_id() const = 0;
    // Called once at configuration time; providers that cannot return
    // per-token logprobs must be rejected here, not mid-session.
    virtual void validate_capabilities() {}
    virtual CompletionResult complete(std::uint64_t prompt_tokens, std::int64_t step) = 0;
};

// Serves recorded traces verbatim. Deterministic: identical (backend, step)
// always yields the identical record.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(BackendDescriptor desc) : desc_(std::move(desc)) {
        desc_.validate();
        if (desc_.kind != BackendKind::replay)
            raise(ErrorKind::domain_error, "descriptor is not a replay backend");
        records_ = load_trace(*desc_.trace_path);
    }

    ReplayBackend(std::string model_id, std::vector<InferenceRecord> records)
        : records_(std::move(records)) {
        desc_.model_id = std::move(model_id);
        desc_.kind = BackendKind::replay;
        desc_.trace_path = "<memory>";
    }

    const std::string& model_id() const override { return desc_.model_id; }

    std::size_t size() const { return records_.size(); }

    CompletionResult complete(std::uint64_t /*prompt_tokens*/, std::int64_t step) override {
        if (step < 1 || static_cast<std::size_t>(step) > records_.size())
            raise(ErrorKind::trace_exhausted,
                  "step " + std::to_string(step) + " beyond trace of " +
                      std::to_string(records_.size()) + " records");
        return CompletionResult{records_[static_cast<std::size_t>(step) - 1], 0.0, false};
    }

private:
    BackendDescriptor desc_;
    std::vector<InferenceRecord> records_;
};

} // namespace enroute
