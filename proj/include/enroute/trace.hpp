#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "enroute/error.hpp"
#include "enroute/record.hpp"

namespace enroute {

// Trace files are line-oriented: one UTF-8 JSON object per record, so
// multi-gigabyte session logs stream without whole-file parsing. Key order is
// fixed (step, role, input_tokens, output_tokens, logprobs, confidence) and
// numbers print in shortest round-trip form, making the encoding canonical:
// serialize(load(p)) reproduces p byte-for-byte for files written here.

inline nlohmann::ordered_json record_to_json(const InferenceRecord& rec) {
    nlohmann::ordered_json j;
    j["step"] = rec.sequence_id;
    j["role"] = to_string(rec.role);
    j["input_tokens"] = rec.input_tokens;
    j["output_tokens"] = rec.output_tokens;
    j["logprobs"] = rec.token_logprobs;
    if (rec.task_confidence) j["confidence"] = *rec.task_confidence;
    return j;
}

inline std::string serialize_record(const InferenceRecord& rec) {
    return record_to_json(rec).dump();
}

inline InferenceRecord record_from_json(const nlohmann::json& j, const std::string& where = {}) {
    auto fail = [&](const std::string& what) {
        raise(ErrorKind::malformed_trace, where.empty() ? what : where + ": " + what);
    };
    if (!j.is_object()) fail("record is not an object");
    InferenceRecord rec;
    try {
        rec.sequence_id = j.at("step").get<std::int64_t>();
        rec.role = role_from_string(j.at("role").get<std::string>());
        rec.input_tokens = j.at("input_tokens").get<std::uint64_t>();
        rec.output_tokens = j.at("output_tokens").get<std::uint64_t>();
        rec.token_logprobs = j.at("logprobs").get<std::vector<double>>();
        if (j.contains("confidence"))
            rec.task_confidence = j.at("confidence").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    validate_record(rec, where);
    return rec;
}

inline InferenceRecord parse_trace_line(const std::string& line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
        raise(ErrorKind::malformed_trace, where + ": invalid JSON");
    return record_from_json(j, where);
}

inline std::vector<InferenceRecord> load_trace(std::istream& in) {
    std::vector<InferenceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        records.push_back(parse_trace_line(line, line_no));
    }
    return records;
}

inline std::vector<InferenceRecord> load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io_error, "cannot open trace file " + path);
    return load_trace(in);
}

inline std::string serialize_trace(const std::vector<InferenceRecord>& records) {
    std::string out;
    for (const InferenceRecord& rec : records) {
        out += serialize_record(rec);
        out += '\n';
    }
    return out;
}

inline void save_trace(const std::vector<InferenceRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io_error, "cannot write trace file " + path);
    out << serialize_trace(records);
    if (!out) raise(ErrorKind::io_error, "short write to " + path);
}

} // namespace enroute
