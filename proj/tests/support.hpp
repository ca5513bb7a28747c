#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "enroute/record.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& rel) {
    return std::string(ENROUTE_FIXTURE_DIR) + "/" + rel;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("enroute_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    return dir;
}

// Random record with logprobs drawn log-uniformly in [lo, 0].
inline enroute::InferenceRecord random_record(std::mt19937_64& rng, std::size_t max_tokens = 64,
                                              double lo = -8.0) {
    std::uniform_int_distribution<std::size_t> len(1, max_tokens);
    std::uniform_real_distribution<double> lp(lo, 0.0);
    enroute::InferenceRecord rec;
    std::size_t n = len(rng);
    rec.token_logprobs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rec.token_logprobs.push_back(lp(rng));
    rec.output_tokens = n;
    std::uniform_int_distribution<std::uint64_t> toks(1, 20000);
    rec.input_tokens = toks(rng);
    return rec;
}

} // namespace testsupport
