#pragma once

#include "adscout/bundle.hpp"
#include "adscout/session.hpp"
#include "adscout/utg.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adscout {

struct ProbeEvent {
    double timestamp = 0.0;
    std::string state_fingerprint;
    std::string action;
};

struct ProbeTrace {
    std::vector<ProbeEvent> events;       // time-ordered
    std::vector<SyslogRecord> syslog;     // time-ordered
};

struct TrafficItem {
    std::string url;
    double timestamp = 0.0;
};

struct NetworkLink {
    size_t event_index = 0; // index into the probe trace's events
    std::string url;
    double lag_seconds = 0.0;
};

struct NetworkPrior {
    std::vector<NetworkLink> links;
    std::vector<TrafficItem> unlinked; // kept: still feeds the global domain list
    double window_delta_seconds = 5.0;
};

// Uniform random walk over the currently actionable set. Deterministic per
// seed; every observed transition lands in the returned graph.
std::pair<Utg, ProbeTrace> random_probe(const AppBundle& bundle, int budget_steps, uint64_t seed,
                                        double event_interval_seconds = 5.0);

// Disjunctive filter: a line qualifies if it mentions a known ad domain or
// any keyword. Order-preserving; the url is the first http(s) token found.
std::vector<TrafficItem> extract_ad_traffic(const std::vector<SyslogRecord>& syslog,
                                            const std::vector<std::string>& ad_domains,
                                            const std::vector<std::string>& keywords);

// Links each traffic item to the latest event with 0 <= t_traffic - t_event
// < delta (strict upper bound). Two-pointer sweep over the sorted inputs;
// equivalent to the quadratic all-pairs scan.
NetworkPrior correlate(const std::vector<ProbeEvent>& events, const std::vector<TrafficItem>& traffic,
                       double delta_seconds);

std::optional<std::string> url_host(const std::string& url);

} // namespace adscout
