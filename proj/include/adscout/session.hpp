#pragma once

#include "adscout/bundle.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adscout {

struct SyslogRecord {
    double timestamp = 0.0;
    std::string tag;
    std::string message;
};

std::string format_syslog_line(const SyslogRecord& rec);

struct StepOutcome {
    UiState next;
    std::vector<SyslogRecord> events;
    std::optional<std::string> ad_exposed;
    bool crashed = false;
    bool backgrounded = false;
    bool noop = false; // dead tap: the action had no binding in the current state
};

// Single-owner interactive run over one bundle. The latent state id is kept
// private to the environment; callers observe UiState only. Fixtures and
// oracles that need ground truth go through latent_state().
class Session {
public:
    Session(const AppBundle& bundle, uint64_t seed, double event_interval_seconds = 5.0);

    // Back to the initial state with clock 0 and an empty emission log.
    UiState reset();

    UiState observe() const;

    // Executes one action key ("tap:<i>", "tap_region:<i>", "back", "scroll",
    // "restart"). Unknown keys are dead taps: same state, clock still advances.
    // Coordinate taps "tap_xy:<x>,<y>" are resolved against the current
    // screen (regions in canvas mode, clickable widgets otherwise) so that
    // callers never need ground-truth indices.
    StepOutcome step(const std::string& action_key);

    // Resolved form of an action key for the current state, e.g.
    // "tap_xy:540,300" -> "tap_region:7". Identity for anything else.
    std::string resolve_action(const std::string& action_key) const;

    double clock_seconds() const { return clock_; }
    const AppBundle& bundle() const { return *bundle_; }
    const std::vector<SyslogRecord>& emission_log() const { return emission_log_; }
    const std::vector<std::string>& action_history() const { return action_history_; }
    uint64_t seed() const { return seed_; }

    // Ground truth accessor for tests and trace tooling.
    const std::string& latent_state() const { return current_state_; }

private:
    UiState make_observation(const std::string& state_id) const;
    std::optional<std::string> exposure_at(const std::string& arrived_state, double step_duration) const;

    const AppBundle* bundle_;
    uint64_t seed_;
    double event_interval_;
    std::string current_state_;
    double clock_ = 0.0;
    std::vector<SyslogRecord> emission_log_;
    std::vector<std::string> action_history_;
};

} // namespace adscout
