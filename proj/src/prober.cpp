#include "adscout/prober.hpp"

#include "adscout/events.hpp"
#include "adscout/rng.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace adscout {

namespace {

std::string simple_class_name(const std::string& cls) {
    const size_t dot = cls.rfind('.');
    return dot == std::string::npos ? cls : cls.substr(dot + 1);
}

std::string rect_csv(const Rect& r) {
    return std::to_string(r.left) + "," + std::to_string(r.top) + "," +
           std::to_string(r.right) + "," + std::to_string(r.bottom);
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Action keys a metadata-only walker can issue. Canvas screens are tapped by
// contour centers; nothing here reads the hidden transition table.
std::vector<std::string> probe_actions(const UiState& state) {
    std::vector<std::string> actions;
    if (state.mode == RenderingMode::Hierarchy) {
        for (const auto& w : state.widgets) {
            if (w.clickable) actions.push_back("tap:" + std::to_string(w.index));
        }
    } else {
        for (const auto& contour : state.coarse_contours) {
            const int cx = (contour.left + contour.right) / 2;
            const int cy = (contour.top + contour.bottom) / 2;
            actions.push_back("tap_xy:" + std::to_string(cx) + "," + std::to_string(cy));
        }
    }
    actions.push_back("back");
    return actions;
}

} // namespace

std::string canonical_event_desc(const UiState& from, const std::string& key) {
    const std::string& fp = from.state_fingerprint;
    if (key == "restart") return "RestartAppEvent()";
    if (key == "back") return "KeyEvent(state=" + fp + ", name=BACK)";
    if (key == "scroll") return "ScrollEvent(state=" + fp + ", direction=DOWN)";
    if (key.rfind("tap:", 0) == 0) {
        const int idx = std::atoi(key.c_str() + 4);
        for (const auto& w : from.widgets) {
            if (w.index != idx) continue;
            if (w.content_desc && !w.content_desc->empty()) {
                return "TouchEvent(state=" + fp + ", view=[button alt='" + *w.content_desc +
                       "' bound_box=" + rect_csv(w.bounds) + "][/button])";
            }
            return "TouchEvent(state=" + fp + ", view=[" + rect_csv(w.bounds) + "-" +
                   simple_class_name(w.widget_class) + "-])";
        }
        return "TouchEvent(state=" + fp + ", view=[unknown])";
    }
    if (key.rfind("tap_region:", 0) == 0) {
        const size_t idx = static_cast<size_t>(std::atoi(key.c_str() + 11));
        if (idx < from.canvas_regions.size()) {
            return "TouchEvent(state=" + fp + ", region=[" +
                   rect_csv(from.canvas_regions[idx].bounds) + "])";
        }
        return "TouchEvent(state=" + fp + ", region=[unknown])";
    }
    if (key.rfind("tap_xy:", 0) == 0) {
        return "TouchEvent(state=" + fp + ", point=" + key.substr(7) + ")";
    }
    return "UnknownEvent(state=" + fp + ", key=" + key + ")";
}

std::pair<Utg, ProbeTrace> random_probe(const AppBundle& bundle, int budget_steps, uint64_t seed,
                                        double event_interval_seconds) {
    if (budget_steps < 1) throw std::invalid_argument("budget_steps must be >= 1");
    Session session(bundle, seed, event_interval_seconds);
    Rng rng(seed ^ 0xabcdef1234567890ULL);

    Utg graph;
    ProbeTrace trace;
    UiState current = session.reset();

    for (int step = 0; step < budget_steps; ++step) {
        const auto actions = probe_actions(current);
        const std::string chosen = actions[rng.pick(actions.size())];
        const std::string resolved = session.resolve_action(chosen);

        trace.events.push_back(ProbeEvent{session.clock_seconds(), current.state_fingerprint, resolved});
        StepOutcome outcome = session.step(resolved);
        for (const auto& rec : outcome.events) trace.syslog.push_back(rec);
        graph.record_transition(current.state_fingerprint, current.activity,
                                canonical_event_desc(current, resolved),
                                outcome.next.state_fingerprint, outcome.next.activity);
        current = outcome.next;

        if (outcome.crashed || outcome.backgrounded) {
            UiState before = current;
            StepOutcome restarted = session.step("restart");
            graph.record_transition(before.state_fingerprint, before.activity, "RestartAppEvent()",
                                    restarted.next.state_fingerprint, restarted.next.activity);
            current = restarted.next;
        }
    }

    std::stable_sort(trace.syslog.begin(), trace.syslog.end(),
                     [](const SyslogRecord& a, const SyslogRecord& b) { return a.timestamp < b.timestamp; });
    return {std::move(graph), std::move(trace)};
}

std::vector<TrafficItem> extract_ad_traffic(const std::vector<SyslogRecord>& syslog,
                                            const std::vector<std::string>& ad_domains,
                                            const std::vector<std::string>& keywords) {
    std::vector<TrafficItem> out;
    for (const auto& rec : syslog) {
        const std::string msg = lowercase(rec.message);
        bool hit = false;
        for (const auto& d : ad_domains) {
            if (msg.find(lowercase(d)) != std::string::npos) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            for (const auto& k : keywords) {
                if (msg.find(lowercase(k)) != std::string::npos) {
                    hit = true;
                    break;
                }
            }
        }
        if (!hit) continue;

        size_t pos = rec.message.find("https://");
        if (pos == std::string::npos) pos = rec.message.find("http://");
        std::string url;
        if (pos != std::string::npos) {
            size_t end = rec.message.find_first_of(" \t\"'", pos);
            url = rec.message.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        } else {
            url = rec.message; // matched line without an explicit url token
        }
        out.push_back(TrafficItem{url, rec.timestamp});
    }
    return out;
}

NetworkPrior correlate(const std::vector<ProbeEvent>& events, const std::vector<TrafficItem>& traffic,
                       double delta_seconds) {
    if (delta_seconds <= 0.0) throw std::invalid_argument("delta must be > 0");
    NetworkPrior prior;
    prior.window_delta_seconds = delta_seconds;

    size_t next_event = 0;
    long long latest = -1;
    for (const auto& item : traffic) {
        while (next_event < events.size() && events[next_event].timestamp <= item.timestamp) {
            latest = static_cast<long long>(next_event);
            ++next_event;
        }
        if (latest >= 0) {
            const double lag = item.timestamp - events[static_cast<size_t>(latest)].timestamp;
            if (lag < delta_seconds) {
                prior.links.push_back(NetworkLink{static_cast<size_t>(latest), item.url, lag});
                continue;
            }
        }
        prior.unlinked.push_back(item);
    }
    return prior;
}

std::optional<std::string> url_host(const std::string& url) {
    size_t start = url.find("://");
    if (start == std::string::npos) return std::nullopt;
    start += 3;
    const size_t end = url.find_first_of("/:?", start);
    std::string host = url.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (host.empty()) return std::nullopt;
    return host;
}

} // namespace adscout
