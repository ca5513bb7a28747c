#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "enroute/error.hpp"
#include "enroute/record.hpp"

namespace enroute {

// Weights and scale for the uncertainty signals. alpha/beta are renormalized
// to sum to 1 on construction; the floor keeps both entropies strictly
// positive so the harmonic mean never divides by zero.
struct EntropyParams {
    double alpha = 0.7;
    double beta = 0.3;
    std::uint64_t vocab_size = 131072;
    double entropy_floor = 1e-9;

    EntropyParams() = default;

    EntropyParams(double a, double b, std::uint64_t vocab, double floor = 1e-9)
        : alpha(a), beta(b), vocab_size(vocab), entropy_floor(floor) {
        if (!(a > 0.0) || !(b > 0.0))
            raise(ErrorKind::domain_error, "alpha and beta must be positive");
        if (vocab < 2)
            raise(ErrorKind::domain_error, "vocab_size must be >= 2");
        if (!(floor > 0.0) || floor > 1e-3)
            raise(ErrorKind::domain_error, "entropy_floor must lie in (0, 1e-3]");
        alpha = a / (a + b);
        beta = b / (a + b);
    }
};

// Derived uncertainty tuple for one inference.
struct EntropySignal {
    double perplexity = 1.0;
    double avg_token_prob = 1.0;
    double h_p = 0.0;                       // normalized token entropy, [0,1]
    std::optional<double> h_c;              // normalized confidence entropy
    double e_combined = 0.0;
};

namespace detail {
inline void check_logprobs(const InferenceRecord& rec) {
    if (rec.token_logprobs.empty())
        raise(ErrorKind::empty_sequence, "record has no token logprobs");
    for (double lp : rec.token_logprobs) {
        if (!std::isfinite(lp) || lp > 0.0)
            raise(ErrorKind::malformed_trace,
                  "invalid logprob " + std::to_string(lp));
    }
}
} // namespace detail

// exp(-(1/N) sum log p_i): geometric mean of inverse token probabilities.
inline double perplexity(const InferenceRecord& rec) {
    detail::check_logprobs(rec);
    double sum = 0.0;
    for (double lp : rec.token_logprobs) sum += lp;
    return std::exp(-sum / static_cast<double>(rec.token_logprobs.size()));
}

// Arithmetic mean of the token probabilities.
inline double avg_token_prob(const InferenceRecord& rec) {
    detail::check_logprobs(rec);
    double sum = 0.0;
    for (double lp : rec.token_logprobs) sum += std::exp(lp);
    return sum / static_cast<double>(rec.token_logprobs.size());
}

// log-perplexity over log-vocab, clamped to [floor, 1]. Vocab size bounds the
// attainable perplexity, so the ratio maps token uncertainty onto [0,1].
inline double normalized_entropy(double perplexity_value, const EntropyParams& params) {
    if (!(perplexity_value >= 1.0))
        raise(ErrorKind::domain_error,
              "perplexity must be >= 1, got " + std::to_string(perplexity_value));
    double h = std::log(perplexity_value) / std::log(static_cast<double>(params.vocab_size));
    return std::clamp(h, params.entropy_floor, 1.0);
}

// Binary Shannon entropy of the task confidence, rescaled by ln 2 so it
// shares the [0,1] range of the token signal, then clamped to [floor, 1].
// Convention 0*ln 0 = 0.
inline double confidence_entropy(double c, const EntropyParams& params) {
    if (!(c >= 0.0 && c <= 1.0))
        raise(ErrorKind::domain_error, "confidence must lie in [0,1]");
    double h = 0.0;
    if (c > 0.0) h -= c * std::log(c);
    if (c < 1.0) h -= (1.0 - c) * std::log(1.0 - c);
    return std::clamp(h / std::numbers::ln2_v<double>, params.entropy_floor, 1.0);
}

// Weighted harmonic mean (alpha/h_p + beta/h_c)^-1. Small whenever either
// signal is confident. Without a confidence estimate the token signal carries
// full weight.
inline double combined_entropy(double h_p, std::optional<double> h_c,
                               const EntropyParams& params) {
    if (!h_c) return h_p;
    return 1.0 / (params.alpha / h_p + params.beta / *h_c);
}

// Full signal for one record.
inline EntropySignal make_signal(const InferenceRecord& rec, const EntropyParams& params) {
    EntropySignal sig;
    sig.perplexity = perplexity(rec);
    sig.avg_token_prob = avg_token_prob(rec);
    sig.h_p = normalized_entropy(sig.perplexity, params);
    if (rec.task_confidence)
        sig.h_c = confidence_entropy(*rec.task_confidence, params);
    sig.e_combined = combined_entropy(sig.h_p, sig.h_c, params);
    return sig;
}

} // namespace enroute
