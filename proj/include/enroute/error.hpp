#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace enroute {

// Typed failure kinds; RetryPolicy decides per kind whether an operation is
// worth retrying.
enum class ErrorKind {
    empty_sequence,
    malformed_trace,
    malformed_series,
    domain_error,
    out_of_range,
    not_reached,
    trace_exhausted,
    backend_unavailable,
    logprobs_unsupported,
    alignment_error,
    config_mismatch,
    corrupt_checkpoint,
    io_error,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::empty_sequence:       return "empty_sequence";
        case ErrorKind::malformed_trace:      return "malformed_trace";
        case ErrorKind::malformed_series:     return "malformed_series";
        case ErrorKind::domain_error:         return "domain_error";
        case ErrorKind::out_of_range:         return "out_of_range";
        case ErrorKind::not_reached:          return "not_reached";
        case ErrorKind::trace_exhausted:      return "trace_exhausted";
        case ErrorKind::backend_unavailable:  return "backend_unavailable";
        case ErrorKind::logprobs_unsupported: return "logprobs_unsupported";
        case ErrorKind::alignment_error:      return "alignment_error";
        case ErrorKind::config_mismatch:      return "config_mismatch";
        case ErrorKind::corrupt_checkpoint:   return "corrupt_checkpoint";
        case ErrorKind::io_error:             return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace enroute
