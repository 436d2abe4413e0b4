#pragma once

#include "adscout/bundle.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace adscout {

// Synthetic app families exercising structural aliasing: loop pages share
// identical widget metadata (including text), so every metadata-level policy
// sees a single merged state.

struct AliasedCycleFamily {
    AppBundle bundle;
    std::string loop_action_key; // cycles within the aliased pages
    std::string exit_action_key; // leaves the loop (works from every page)
    std::map<std::string, double> r_sem_table;
    double r_loop = 0.0;
    double r_exit = 0.0;
};

// Pure aliased m-cycle with an always-available exit hosting the ad.
// r_exit <= r_loop makes the semantics ambiguous: escape then relies on the
// visit penalty alone.
AliasedCycleFamily make_aliased_cycle(int cycle_length, double r_loop, double r_exit);

struct GateFamily {
    AppBundle bundle;
    std::map<std::string, double> r_sem_table;
    int total_ads = 1;
    std::string loop_activity;
};

// Dominance family: aliased loop with decoy actions that reset progress,
// then a three-level semantically cued path (hub -> reward center -> gate)
// to the ad. Wrong picks anywhere reset to the loop. Cue positions are
// shuffled per seed.
GateFamily make_gate_family(int cycle_length, uint64_t seed);

} // namespace adscout
