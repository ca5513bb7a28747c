#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enroute/error.hpp"

namespace enroute {

enum class Role { base, support };

inline const char* to_string(Role role) noexcept {
    return role == Role::base ? "base" : "support";
}

inline Role role_from_string(const std::string& s) {
    if (s == "base") return Role::base;
    if (s == "support") return Role::support;
    raise(ErrorKind::malformed_trace, "unknown role '" + s + "'");
}

// One completed model call: per-token natural-log probabilities of the output
// tokens plus the token counts the meter bills against.
struct InferenceRecord {
    std::int64_t sequence_id = 0;
    std::vector<double> token_logprobs;          // one per output token, each <= 0
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    std::optional<double> task_confidence;       // in [0,1] when present
    Role role = Role::base;
};

// Throws malformed_trace naming the offending field. `where` is prepended to
// messages so trace loaders can report line numbers.
inline void validate_record(const InferenceRecord& rec, const std::string& where = {}) {
    auto fail = [&](const std::string& what) {
        raise(ErrorKind::malformed_trace, where.empty() ? what : where + ": " + what);
    };
    for (double lp : rec.token_logprobs) {
        if (!std::isfinite(lp)) fail("token_logprobs: non-finite entry");
        if (lp > 0.0) fail("token_logprobs: positive entry " + std::to_string(lp));
    }
    if (!rec.token_logprobs.empty() &&
        rec.output_tokens != rec.token_logprobs.size()) {
        fail("output_tokens (" + std::to_string(rec.output_tokens) +
             ") != logprob count (" + std::to_string(rec.token_logprobs.size()) + ")");
    }
    if (rec.task_confidence) {
        double c = *rec.task_confidence;
        if (!(c >= 0.0 && c <= 1.0)) fail("task_confidence outside [0,1]");
    }
}

} // namespace enroute
