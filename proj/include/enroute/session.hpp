#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "enroute/backend.hpp"
#include "enroute/cost.hpp"
#include "enroute/entropy.hpp"
#include "enroute/error.hpp"
#include "enroute/routing.hpp"
#include "enroute/trace.hpp"

namespace enroute {

// ---------------------------------------------------------------------------
// Session directory layout
//
//   <dir>/config.json        frozen config snapshot (written once)
//   <dir>/trace.jsonl        completed inference records, append-only
//   <dir>/decisions.jsonl    one routing decision per step, append-only
//   <dir>/entropy.jsonl      derived uncertainty signals, append-only
//   <dir>/cost.jsonl         per-step metered cost, append-only
//   <dir>/checkpoints/       ckpt_<step>.json, written atomically
//
// All logs are line-oriented JSON in the trace format family. A checkpoint
// names the exact byte offsets of the log prefix it covers; (checkpoint,
// log prefixes) always suffice to resume with identical future output on
// deterministic backends. Logs flush per step and are never rewritten;
// resume truncates any tail beyond the checkpoint before re-executing it.
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{0};
    double backoff_multiplier = 1.0;
    std::set<ErrorKind> retryable_errors{ErrorKind::backend_unavailable};

    void validate() const {
        if (max_attempts < 1) raise(ErrorKind::domain_error, "max_attempts must be >= 1");
        if (backoff_multiplier < 1.0)
            raise(ErrorKind::domain_error, "backoff_multiplier must be >= 1");
    }
};

struct WorkStep {
    std::uint64_t prompt_tokens = 0;
};

// Opaque source of work: the runtime never interprets prompt content, only
// sizes. Returns nullopt when the session's work is exhausted.
class WorkSource {
public:
    virtual ~WorkSource() = default;
    virtual std::optional<WorkStep> step(std::int64_t step_ordinal) = 0;
};

// Fixed number of steps, e.g. the length of a replay trace.
class StepCountSource : public WorkSource {
public:
    explicit StepCountSource(std::int64_t steps, std::uint64_t prompt_tokens = 0)
        : steps_(steps), prompt_tokens_(prompt_tokens) {}

    std::optional<WorkStep> step(std::int64_t s) override {
        if (s > steps_) return std::nullopt;
        return WorkStep{prompt_tokens_};
    }

private:
    std::int64_t steps_;
    std::uint64_t prompt_tokens_;
};

inline nlohmann::ordered_json routing_config_to_json(const RoutingConfig& c) {
    nlohmann::ordered_json j;
    j["tau"] = c.tau;
    j["k"] = c.k;
    j["trigger_on_high"] = c.trigger_on_high;
    j["alpha"] = c.entropy_params.alpha;
    j["beta"] = c.entropy_params.beta;
    j["vocab_size"] = c.entropy_params.vocab_size;
    j["entropy_floor"] = c.entropy_params.entropy_floor;
    j["base_model_id"] = c.base_model_id;
    j["support_model_id"] = c.support_model_id;
    return j;
}

inline RoutingConfig routing_config_from_json(const nlohmann::json& j) {
    RoutingConfig c;
    c.tau = j.at("tau").get<double>();
    c.k = j.at("k").get<int>();
    c.trigger_on_high = j.at("trigger_on_high").get<bool>();
    c.entropy_params.alpha = j.at("alpha").get<double>();
    c.entropy_params.beta = j.at("beta").get<double>();
    c.entropy_params.vocab_size = j.at("vocab_size").get<std::uint64_t>();
    c.entropy_params.entropy_floor = j.at("entropy_floor").get<double>();
    c.base_model_id = j.at("base_model_id").get<std::string>();
    c.support_model_id = j.at("support_model_id").get<std::string>();
    return c;
}

// FNV-1a over the canonical config serialization; guards resume against
// config drift.
inline std::uint64_t config_hash(const RoutingConfig& c) {
    std::string bytes = routing_config_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

struct LogOffsets {
    std::uint64_t trace = 0;
    std::uint64_t decisions = 0;
    std::uint64_t entropy = 0;
    std::uint64_t cost = 0;
};

struct SessionCheckpoint {
    std::string session_id;
    RoutingState routing_state;
    bool fresh_trigger = false;
    bool fresh_expiry = false;
    std::int64_t inference_log_offset = 0;   // records durably written
    LogOffsets offsets;                      // exact log bytes covered
    std::int64_t cost_accumulator_micro = 0;
    std::int64_t total_tokens = 0;
    std::int64_t support_decisions = 0;
    std::uint64_t config_hash = 0;
    std::string created_at;
};

namespace detail {

inline nlohmann::ordered_json signal_to_json(const EntropySignal& s) {
    nlohmann::ordered_json j;
    j["perplexity"] = s.perplexity;
    j["avg_token_prob"] = s.avg_token_prob;
    j["h_p"] = s.h_p;
    if (s.h_c) j["h_c"] = *s.h_c;
    j["e_combined"] = s.e_combined;
    return j;
}

inline EntropySignal signal_from_json(const nlohmann::json& j) {
    EntropySignal s;
    s.perplexity = j.at("perplexity").get<double>();
    s.avg_token_prob = j.at("avg_token_prob").get<double>();
    s.h_p = j.at("h_p").get<double>();
    if (j.contains("h_c")) s.h_c = j.at("h_c").get<double>();
    s.e_combined = j.at("e_combined").get<double>();
    return s;
}

inline std::string now_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

inline nlohmann::ordered_json checkpoint_to_json(const SessionCheckpoint& c) {
    nlohmann::ordered_json j;
    j["session_id"] = c.session_id;
    nlohmann::ordered_json st;
    st["mode"] = c.routing_state.mode == Mode::base ? "base" : "support_hold";
    st["remaining"] = c.routing_state.remaining;
    st["step"] = c.routing_state.step;
    st["switch_count"] = c.routing_state.switch_count;
    if (c.routing_state.last_signal)
        st["last_signal"] = detail::signal_to_json(*c.routing_state.last_signal);
    st["fresh_trigger"] = c.fresh_trigger;
    st["fresh_expiry"] = c.fresh_expiry;
    j["routing_state"] = st;
    j["inference_log_offset"] = c.inference_log_offset;
    j["log_offsets"] = {{"trace", c.offsets.trace},
                        {"decisions", c.offsets.decisions},
                        {"entropy", c.offsets.entropy},
                        {"cost", c.offsets.cost}};
    j["cost_accumulator_micro"] = c.cost_accumulator_micro;
    j["total_tokens"] = c.total_tokens;
    j["support_decisions"] = c.support_decisions;
    j["config_hash"] = c.config_hash;
    j["created_at"] = c.created_at;
    return j;
}

inline SessionCheckpoint checkpoint_from_json(const nlohmann::json& j) {
    SessionCheckpoint c;
    try {
        c.session_id = j.at("session_id").get<std::string>();
        const auto& st = j.at("routing_state");
        c.routing_state.mode =
            st.at("mode").get<std::string>() == "base" ? Mode::base : Mode::support_hold;
        c.routing_state.remaining = st.at("remaining").get<int>();
        c.routing_state.step = st.at("step").get<std::int64_t>();
        c.routing_state.switch_count = st.at("switch_count").get<std::int64_t>();
        if (st.contains("last_signal"))
            c.routing_state.last_signal = detail::signal_from_json(st.at("last_signal"));
        c.fresh_trigger = st.at("fresh_trigger").get<bool>();
        c.fresh_expiry = st.at("fresh_expiry").get<bool>();
        c.inference_log_offset = j.at("inference_log_offset").get<std::int64_t>();
        const auto& off = j.at("log_offsets");
        c.offsets.trace = off.at("trace").get<std::uint64_t>();
        c.offsets.decisions = off.at("decisions").get<std::uint64_t>();
        c.offsets.entropy = off.at("entropy").get<std::uint64_t>();
        c.offsets.cost = off.at("cost").get<std::uint64_t>();
        c.cost_accumulator_micro = j.at("cost_accumulator_micro").get<std::int64_t>();
        c.total_tokens = j.at("total_tokens").get<std::int64_t>();
        c.support_decisions = j.at("support_decisions").get<std::int64_t>();
        c.config_hash = j.at("config_hash").get<std::uint64_t>();
        c.created_at = j.at("created_at").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::corrupt_checkpoint, e.what());
    }
    return c;
}

enum class SessionStatus { clean_finish, resumable_halt };

struct SessionResult {
    SessionStatus status = SessionStatus::clean_finish;
    SessionCheckpoint checkpoint;
    std::int64_t steps_executed = 0;     // completed by this invocation
    std::string error;
    CostReport cost;
};

struct SessionOptions {
    std::string session_id = "session";
    std::int64_t checkpoint_every = 25;
    // Test hook: stop after N completed steps without writing a checkpoint,
    // simulating an abrupt kill.
    std::optional<std::int64_t> stop_after_steps;
};

class SessionRunner {
public:
    SessionRunner(RoutingConfig config, PricingTable pricing, RetryPolicy retry,
                  std::filesystem::path dir, SessionOptions options = {})
        : config_(std::move(config)),
          pricing_(std::move(pricing)),
          retry_(std::move(retry)),
          dir_(std::move(dir)),
          options_(std::move(options)) {
        config_.validate();
        retry_.validate();
        if (options_.checkpoint_every < 1)
            raise(ErrorKind::domain_error, "checkpoint_every must be >= 1");
    }

    void add_backend(std::shared_ptr<Backend> backend) {
        backends_[backend->model_id()] = std::move(backend);
    }

    std::filesystem::path trace_log() const { return dir_ / "trace.jsonl"; }
    std::filesystem::path decision_log() const { return dir_ / "decisions.jsonl"; }
    std::filesystem::path entropy_log() const { return dir_ / "entropy.jsonl"; }
    std::filesystem::path cost_log() const { return dir_ / "cost.jsonl"; }
    std::filesystem::path checkpoint_dir() const { return dir_ / "checkpoints"; }

    static std::optional<SessionCheckpoint> latest_checkpoint(const std::filesystem::path& dir) {
        auto ckpt_dir = dir / "checkpoints";
        if (!std::filesystem::is_directory(ckpt_dir)) return std::nullopt;
        std::optional<std::filesystem::path> best;
        for (const auto& entry : std::filesystem::directory_iterator(ckpt_dir)) {
            auto name = entry.path().filename().string();
            if (name.rfind("ckpt_", 0) != 0 || entry.path().extension() != ".json") continue;
            if (!best || name > best->filename().string()) best = entry.path();
        }
        if (!best) return std::nullopt;
        std::ifstream in(*best);
        if (!in) raise(ErrorKind::io_error, "cannot read checkpoint " + best->string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            raise(ErrorKind::corrupt_checkpoint, "unparseable checkpoint " + best->string());
        return checkpoint_from_json(j);
    }

    // Fresh session. Validates backends up front, snapshots the config, and
    // drives decide -> complete -> signal -> observe -> meter per step.
    SessionResult run(WorkSource& work) {
        if (latest_checkpoint(dir_))
            raise(ErrorKind::io_error,
                  "session directory already has checkpoints; resume instead");
        std::filesystem::create_directories(checkpoint_dir());
        validate_backends();
        write_config_snapshot();
        // stray logs from a hand-assembled directory would corrupt offsets
        for (const auto& log : {trace_log(), decision_log(), entropy_log(), cost_log()})
            truncate_to(log, 0);

        SessionCheckpoint start;
        start.session_id = options_.session_id;
        start.config_hash = enroute::config_hash(config_);
        PolicyDriver driver(config_);
        if (!try_checkpoint(start, driver))
            return halted(start, 0, "checkpoint write failed at session start",
                          metered_report(start));
        return run_loop(start, work);
    }

    // Continue from the newest checkpoint. Refuses on config drift; demands
    // logs at least as long as the checkpoint's offsets, truncating any
    // uncheckpointed tail before re-executing it.
    SessionResult resume(WorkSource& work) {
        auto latest = latest_checkpoint(dir_);
        if (!latest)
            raise(ErrorKind::corrupt_checkpoint,
                  "no checkpoint found under " + dir_.string());
        if (latest->config_hash != enroute::config_hash(config_))
            raise(ErrorKind::config_mismatch,
                  "checkpoint was written under a different config");
        validate_backends();
        truncate_to(trace_log(), latest->offsets.trace);
        truncate_to(decision_log(), latest->offsets.decisions);
        truncate_to(entropy_log(), latest->offsets.entropy);
        truncate_to(cost_log(), latest->offsets.cost);
        return run_loop(*latest, work);
    }

private:
    struct LogFiles {
        std::ofstream trace, decisions, entropy, cost;
    };

    void validate_backends() const {
        for (const auto& id : {config_.base_model_id, config_.support_model_id}) {
            auto it = backends_.find(id);
            if (it == backends_.end())
                raise(ErrorKind::domain_error, "no backend registered for model '" + id + "'");
            it->second->validate_capabilities();
            pricing_for(pricing_, id);   // pricing must be configured up front
        }
    }

    void write_config_snapshot() const {
        nlohmann::ordered_json j;
        j["session_id"] = options_.session_id;
        j["routing"] = routing_config_to_json(config_);
        j["checkpoint_every"] = options_.checkpoint_every;
        nlohmann::ordered_json prices;
        for (const auto& [id, pm] : pricing_) {
            prices[id] = {{"input_micro_per_million", pm.input_price_micro_per_million},
                          {"output_micro_per_million", pm.output_price_micro_per_million}};
        }
        j["pricing"] = prices;
        std::ofstream out(dir_ / "config.json", std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::io_error, "cannot write config snapshot");
        out << j.dump(2) << '\n';
    }

    static void truncate_to(const std::filesystem::path& path, std::uint64_t size) {
        std::error_code ec;
        auto current = std::filesystem::exists(path) ? std::filesystem::file_size(path, ec) : 0;
        if (ec) raise(ErrorKind::io_error, "cannot stat " + path.string());
        if (current < size)
            raise(ErrorKind::corrupt_checkpoint,
                  path.filename().string() + " shorter than checkpointed offset");
        if (current > size) {
            std::filesystem::resize_file(path, size, ec);
            if (ec) raise(ErrorKind::io_error, "cannot truncate " + path.string());
        }
        if (!std::filesystem::exists(path)) std::ofstream touch(path, std::ios::binary);
    }

    static bool append_line(std::ofstream& out, const std::string& line) {
        out << line << '\n';
        out.flush();
        return static_cast<bool>(out);
    }

    bool try_checkpoint(SessionCheckpoint& ckpt, const PolicyDriver& driver) {
        ckpt.session_id = options_.session_id;
        ckpt.routing_state = driver.state();
        ckpt.fresh_trigger = driver.fresh_trigger();
        ckpt.fresh_expiry = driver.fresh_expiry();
        ckpt.created_at = detail::now_utc();
        auto name = "ckpt_" + [&] {
            std::string s = std::to_string(ckpt.inference_log_offset);
            return std::string(9 - std::min<std::size_t>(9, s.size()), '0') + s;
        }() + ".json";
        auto tmp = checkpoint_dir() / (name + ".tmp");
        auto final_path = checkpoint_dir() / name;
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) return false;
            out << checkpoint_to_json(ckpt).dump(2) << '\n';
            out.flush();
            if (!out) return false;
        }
        std::error_code ec;
        std::filesystem::rename(tmp, final_path, ec);
        return !ec;
    }

    CompletionResult complete_with_retries(Backend& backend, const WorkStep& step,
                                           std::int64_t ordinal) {
        auto delay = retry_.base_delay;
        for (int attempt = 1;; ++attempt) {
            try {
                return backend.complete(step.prompt_tokens, ordinal);
            } catch (const Error& e) {
                bool retryable = retry_.retryable_errors.count(e.kind()) > 0;
                if (!retryable || attempt >= retry_.max_attempts) throw;
                if (delay.count() > 0) std::this_thread::sleep_for(delay);
                delay = std::chrono::milliseconds(static_cast<std::int64_t>(
                    std::ceil(static_cast<double>(delay.count()) * retry_.backoff_multiplier)));
            }
        }
    }

    CostReport metered_report(const SessionCheckpoint& c) const {
        CostReport report;
        report.total_tokens = c.total_tokens;
        report.total_cost_micro = Rational(c.cost_accumulator_micro);
        report.support_fraction = c.inference_log_offset == 0
                                      ? Rational(0)
                                      : Rational(c.support_decisions, c.inference_log_offset);
        report.reduction = Rational(1) - report.support_fraction;
        if (c.total_tokens > 0 && !report.support_fraction.is_zero())
            report.blended_rate_micro_per_million =
                report.total_cost_micro /
                (Rational(c.total_tokens, 1'000'000) * report.support_fraction);
        return report;
    }

    SessionResult halted(const SessionCheckpoint& ckpt, std::int64_t steps,
                         const std::string& why, CostReport cost) const {
        return SessionResult{SessionStatus::resumable_halt, ckpt, steps, why, std::move(cost)};
    }

    SessionResult run_loop(SessionCheckpoint ckpt, WorkSource& work) {
        LogFiles logs;
        logs.trace.open(trace_log(), std::ios::binary | std::ios::app);
        logs.decisions.open(decision_log(), std::ios::binary | std::ios::app);
        logs.entropy.open(entropy_log(), std::ios::binary | std::ios::app);
        logs.cost.open(cost_log(), std::ios::binary | std::ios::app);
        if (!logs.trace || !logs.decisions || !logs.entropy || !logs.cost)
            raise(ErrorKind::io_error, "cannot open session logs under " + dir_.string());

        PolicyDriver driver(config_);
        driver.restore(ckpt.routing_state, ckpt.fresh_trigger, ckpt.fresh_expiry);

        std::int64_t executed = 0;
        for (std::int64_t step = ckpt.inference_log_offset + 1;; ++step) {
            auto work_step = work.step(step);
            if (!work_step) {
                if (!try_checkpoint(ckpt, driver))
                    return halted(ckpt, executed, "final checkpoint write failed",
                                  metered_report(ckpt));
                return SessionResult{SessionStatus::clean_finish, ckpt, executed, {},
                                     metered_report(ckpt)};
            }

            RouteDecision decision = driver.next_decision();
            InferenceRecord record;
            EntropySignal signal;
            std::int64_t step_cost = 0;
            try {
                auto backend_it = backends_.find(decision.model_id);
                if (backend_it == backends_.end())
                    raise(ErrorKind::domain_error,
                          "no backend for decided model '" + decision.model_id + "'");
                auto result = complete_with_retries(*backend_it->second, *work_step, step);
                record = std::move(result.record);
                record.sequence_id = step;
                record.role = decision.model_id == config_.support_model_id ? Role::support
                                                                            : Role::base;
                validate_record(record, "step " + std::to_string(step));
                signal = make_signal(record, config_.entropy_params);
                step_cost = record_cost_micro(record, pricing_for(pricing_, decision.model_id));
            } catch (const Error& e) {
                // Halt resumably at the last completed step. The checkpoint
                // write may race the same broken disk; the previous durable
                // checkpoint still covers a consistent prefix.
                try_checkpoint(ckpt, driver);
                return halted(ckpt, executed, e.what(), metered_report(ckpt));
            }

            // Logs first, then state. A write failure halts before the step
            // is considered executed.
            nlohmann::ordered_json dj;
            dj["step"] = step;
            dj["model"] = decision.model_id;
            dj["reason"] = to_string(decision.reason);
            nlohmann::ordered_json ej = detail::signal_to_json(signal);
            ej["step"] = step;
            nlohmann::ordered_json cj;
            cj["step"] = step;
            cj["model"] = decision.model_id;
            cj["input_tokens"] = record.input_tokens;
            cj["output_tokens"] = record.output_tokens;
            cj["cost_micro"] = step_cost;
            cj["cumulative_micro"] = ckpt.cost_accumulator_micro + step_cost;
            bool ok = append_line(logs.trace, serialize_record(record)) &&
                      append_line(logs.decisions, dj.dump()) &&
                      append_line(logs.entropy, ej.dump()) &&
                      append_line(logs.cost, cj.dump());
            if (!ok)
                return halted(ckpt, executed, "log append failed at step " + std::to_string(step),
                              metered_report(ckpt));

            driver.observe(signal);
            ckpt.inference_log_offset = step;
            ckpt.offsets.trace = static_cast<std::uint64_t>(logs.trace.tellp());
            ckpt.offsets.decisions = static_cast<std::uint64_t>(logs.decisions.tellp());
            ckpt.offsets.entropy = static_cast<std::uint64_t>(logs.entropy.tellp());
            ckpt.offsets.cost = static_cast<std::uint64_t>(logs.cost.tellp());
            ckpt.cost_accumulator_micro += step_cost;
            ckpt.total_tokens += static_cast<std::int64_t>(record.input_tokens + record.output_tokens);
            if (decision.reason == Reason::triggered || decision.reason == Reason::holding)
                ++ckpt.support_decisions;
            ++executed;

            if (step % options_.checkpoint_every == 0) {
                if (!try_checkpoint(ckpt, driver))
                    return halted(ckpt, executed,
                                  "checkpoint write failed at step " + std::to_string(step),
                                  metered_report(ckpt));
            }
            if (options_.stop_after_steps && executed >= *options_.stop_after_steps)
                return halted(ckpt, executed, "interrupted by stop_after_steps",
                              metered_report(ckpt));
        }
    }

    RoutingConfig config_;
    PricingTable pricing_;
    RetryPolicy retry_;
    std::filesystem::path dir_;
    SessionOptions options_;
    std::map<std::string, std::shared_ptr<Backend>> backends_;
};

} // namespace enroute
