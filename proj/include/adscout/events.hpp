#pragma once

#include "adscout/bundle.hpp"

#include <string>

namespace adscout {

// Canonical event descriptor used for UTG edges, history lines and prompt
// text. Offline and online graphs must agree on these strings so their
// edges merge, which is why this lives apart from perception.
std::string canonical_event_desc(const UiState& from, const std::string& resolved_action_key);

} // namespace adscout
