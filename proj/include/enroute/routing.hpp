#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enroute/entropy.hpp"
#include "enroute/error.hpp"

namespace enroute {

// Policy parameters for the base/support switching machine. trigger_on_high
// selects the trigger direction: with the default, combined entropy at or
// above tau activates the support model; the flag flips the comparison for
// configurations that treat low combined entropy as the activation signal.
struct RoutingConfig {
    double tau = 0.03;
    int k = 2;
    bool trigger_on_high = true;
    EntropyParams entropy_params;
    std::string base_model_id = "base";
    std::string support_model_id = "support";

    void validate() const {
        if (!(tau > 0.0)) raise(ErrorKind::domain_error, "tau must be > 0");
        if (k < 1) raise(ErrorKind::domain_error, "k must be >= 1");
        if (base_model_id == support_model_id)
            raise(ErrorKind::domain_error, "base and support model ids must differ");
    }

    bool triggers(double e_combined) const {
        // Ties count as triggered in both directions.
        return trigger_on_high ? e_combined >= tau : e_combined <= tau;
    }
};

enum class Mode { base, support_hold };

struct RoutingState {
    Mode mode = Mode::base;
    int remaining = 0;                      // in [1,k] while holding
    std::int64_t step = 0;                  // observed signals so far
    std::optional<EntropySignal> last_signal;
    std::int64_t switch_count = 0;
};

enum class Reason { below_threshold, triggered, holding, re_evaluating };

inline const char* to_string(Reason r) noexcept {
    switch (r) {
        case Reason::below_threshold: return "below_threshold";
        case Reason::triggered:       return "triggered";
        case Reason::holding:         return "holding";
        case Reason::re_evaluating:   return "re_evaluating";
    }
    return "unknown";
}

inline Reason reason_from_string(const std::string& s) {
    if (s == "below_threshold") return Reason::below_threshold;
    if (s == "triggered") return Reason::triggered;
    if (s == "holding") return Reason::holding;
    if (s == "re_evaluating") return Reason::re_evaluating;
    raise(ErrorKind::domain_error, "unknown reason '" + s + "'");
}

struct RouteDecision {
    std::string model_id;
    Reason reason = Reason::below_threshold;
};

// Model choice for the upcoming inference. Pure in (state, config).
inline RouteDecision decide_next(const RoutingState& state, const RoutingConfig& config) {
    if (state.mode == Mode::support_hold)
        return {config.support_model_id, Reason::holding};
    return {config.base_model_id, Reason::below_threshold};
}

// Fold one completed inference's signal into the state. Signals observed
// during a hold never trigger: re-evaluation happens only once the hold has
// expired and the base model produces the next signal.
inline RoutingState observe(RoutingState state, const EntropySignal& signal,
                            const RoutingConfig& config) {
    if (state.mode == Mode::base) {
        if (config.triggers(signal.e_combined)) {
            state.mode = Mode::support_hold;
            state.remaining = config.k;
            ++state.switch_count;
        }
    } else {
        if (--state.remaining == 0) {
            state.mode = Mode::base;
        }
    }
    ++state.step;
    state.last_signal = signal;
    return state;
}

// Stepwise driver shared by batch simulation and the session runtime. It
// tracks transitions so decisions carry the richer reasons: the first
// decision of a hold is `triggered`, the first base decision after a hold
// expires is `re_evaluating`.
class PolicyDriver {
public:
    explicit PolicyDriver(RoutingConfig config, RoutingState state = {})
        : config_(std::move(config)), state_(state) {
        config_.validate();
    }

    RouteDecision next_decision() const {
        RouteDecision d = decide_next(state_, config_);
        if (state_.mode == Mode::support_hold && fresh_trigger_)
            d.reason = Reason::triggered;
        else if (state_.mode == Mode::base && fresh_expiry_)
            d.reason = Reason::re_evaluating;
        return d;
    }

    void observe(const EntropySignal& signal) {
        Mode before = state_.mode;
        state_ = enroute::observe(state_, signal, config_);
        fresh_trigger_ = before == Mode::base && state_.mode == Mode::support_hold;
        fresh_expiry_ = before == Mode::support_hold && state_.mode == Mode::base;
    }

    const RoutingState& state() const { return state_; }
    const RoutingConfig& config() const { return config_; }

    // Transition flags are part of the resumable state: without them a
    // decision logged right after a resume could carry a different reason
    // than the uninterrupted run's.
    bool fresh_trigger() const { return fresh_trigger_; }
    bool fresh_expiry() const { return fresh_expiry_; }

    void restore(const RoutingState& state, bool fresh_trigger = false,
                 bool fresh_expiry = false) {
        state_ = state;
        fresh_trigger_ = fresh_trigger;
        fresh_expiry_ = fresh_expiry;
    }

private:
    RoutingConfig config_;
    RoutingState state_;
    bool fresh_trigger_ = false;
    bool fresh_expiry_ = false;
};

// One decision per signal position; decision i depends only on signals
// observed before it.
inline std::vector<RouteDecision> simulate_policy(const std::vector<EntropySignal>& signals,
                                                  const RoutingConfig& config) {
    if (signals.empty())
        raise(ErrorKind::empty_sequence, "no signals to simulate");
    std::vector<RouteDecision> decisions;
    decisions.reserve(signals.size());
    PolicyDriver driver(config);
    for (const EntropySignal& sig : signals) {
        decisions.push_back(driver.next_decision());
        driver.observe(sig);
    }
    return decisions;
}

} // namespace enroute
