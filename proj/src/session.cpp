#include "adscout/session.hpp"

#include "adscout/fingerprint.hpp"

#include <cstdio>

namespace adscout {

std::string format_syslog_line(const SyslogRecord& rec) {
    char ts[32];
    std::snprintf(ts, sizeof(ts), "%.3f", rec.timestamp);
    return std::string(ts) + "|" + rec.tag + "|" + rec.message;
}

Session::Session(const AppBundle& bundle, uint64_t seed, double event_interval_seconds)
    : bundle_(&bundle), seed_(seed), event_interval_(event_interval_seconds),
      current_state_(bundle.behavior.initial_state) {}

UiState Session::make_observation(const std::string& state_id) const {
    const ScreenRendering& scr = bundle_->screen(state_id);
    UiState state;
    state.activity = scr.activity;
    state.mode = scr.mode;
    state.clock_seconds = clock_;
    if (scr.mode == RenderingMode::Hierarchy) {
        state.widgets = scr.widgets;
    } else {
        state.canvas_bounds = scr.canvas_bounds;
        state.canvas_regions = scr.regions;
        state.coarse_contours = scr.coarse_contours;
    }
    state.state_fingerprint = short_hash(canonical_state_serialization(state));
    return state;
}

UiState Session::reset() {
    current_state_ = bundle_->behavior.initial_state;
    clock_ = 0.0;
    emission_log_.clear();
    action_history_.clear();
    return make_observation(current_state_);
}

UiState Session::observe() const {
    return make_observation(current_state_);
}

std::optional<std::string> Session::exposure_at(const std::string& arrived_state,
                                                double step_duration) const {
    for (const auto& trig : bundle_->behavior.ad_triggers) {
        if (trig.host_state != arrived_state) continue;
        if (step_duration < trig.min_dwell_seconds) continue;
        const auto& ctx = trig.required_context;
        if (ctx.size() > action_history_.size()) continue;
        bool suffix = true;
        for (size_t i = 0; i < ctx.size(); ++i) {
            if (action_history_[action_history_.size() - ctx.size() + i] != ctx[i]) {
                suffix = false;
                break;
            }
        }
        if (suffix) return trig.ad_id;
    }
    return std::nullopt;
}

std::string Session::resolve_action(const std::string& action_key) const {
    if (action_key.rfind("tap_xy:", 0) != 0) return action_key;
    const std::string coords = action_key.substr(7);
    const size_t comma = coords.find(',');
    if (comma == std::string::npos) return action_key;
    int x = 0;
    int y = 0;
    try {
        x = std::stoi(coords.substr(0, comma));
        y = std::stoi(coords.substr(comma + 1));
    } catch (const std::exception&) {
        return action_key;
    }
    const ScreenRendering& scr = bundle_->screen(current_state_);
    if (scr.mode == RenderingMode::Canvas) {
        for (size_t i = 0; i < scr.regions.size(); ++i) {
            const Rect& b = scr.regions[i].bounds;
            if (x >= b.left && x < b.right && y >= b.top && y < b.bottom) {
                return "tap_region:" + std::to_string(i);
            }
        }
    } else {
        for (const auto& w : scr.widgets) {
            if (!w.clickable) continue;
            const Rect& b = w.bounds;
            if (x >= b.left && x < b.right && y >= b.top && y < b.bottom) {
                return "tap:" + std::to_string(w.index);
            }
        }
    }
    return action_key;
}

StepOutcome Session::step(const std::string& raw_action_key) {
    StepOutcome out;
    const double start = clock_;
    const std::string action_key = resolve_action(raw_action_key);
    action_history_.push_back(action_key);

    if (action_key == "restart") {
        current_state_ = bundle_->behavior.initial_state;
        clock_ += event_interval_;
        out.next = make_observation(current_state_);
        return out;
    }

    auto it = bundle_->behavior.transitions.find({current_state_, action_key});
    if (it == bundle_->behavior.transitions.end()) {
        // Dead tap: real devices ignore taps on inert pixels, but time passes.
        clock_ += event_interval_;
        out.noop = true;
        out.next = make_observation(current_state_);
        return out;
    }

    const TransitionEffect& effect = it->second;
    const double duration = effect.delay_seconds + event_interval_;
    clock_ += duration;

    auto em = bundle_->behavior.emissions.find({current_state_, action_key});
    if (em != bundle_->behavior.emissions.end()) {
        for (const auto& e : em->second) {
            SyslogRecord rec{start + e.offset_seconds, e.tag, e.message};
            emission_log_.push_back(rec);
            out.events.push_back(rec);
        }
    }

    current_state_ = effect.next_state;
    out.crashed = effect.crash;
    out.backgrounded = effect.background;
    out.ad_exposed = exposure_at(current_state_, duration);
    out.next = make_observation(current_state_);
    return out;
}

} // namespace adscout
