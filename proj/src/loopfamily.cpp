#include "adscout/loopfamily.hpp"

#include "adscout/rng.hpp"

#include <stdexcept>

namespace adscout {

namespace {

Widget make_button(int index, const std::string& text, int row) {
    Widget w;
    w.index = index;
    w.widget_class = "android.widget.Button";
    w.text = text;
    w.bounds = Rect{40, 200 + row * 180, 1040, 340 + row * 180};
    w.clickable = true;
    return w;
}

ScreenRendering make_screen(const std::string& activity, const std::vector<std::string>& buttons) {
    ScreenRendering scr;
    scr.mode = RenderingMode::Hierarchy;
    scr.activity = activity;
    for (size_t i = 0; i < buttons.size(); ++i) {
        scr.widgets.push_back(make_button(static_cast<int>(i), buttons[i], static_cast<int>(i)));
    }
    return scr;
}

} // namespace

AliasedCycleFamily make_aliased_cycle(int cycle_length, double r_loop, double r_exit) {
    if (cycle_length < 2) throw std::invalid_argument("cycle length must be >= 2");
    AliasedCycleFamily family;
    AppBundle& b = family.bundle;
    b.app_id = "synthetic.cycle" + std::to_string(cycle_length);
    b.manifest.activities = {"LoopActivity", "ExitActivity"};

    for (int i = 0; i < cycle_length; ++i) {
        // All pages carry identical metadata: one merged node for any
        // structural policy.
        b.rendering["L" + std::to_string(i)] = make_screen("LoopActivity", {"Next", "Continue"});
    }
    ScreenRendering exit_screen = make_screen("ExitActivity", {"Sponsored offer"});
    b.rendering["EXIT"] = std::move(exit_screen);

    b.behavior.initial_state = "L0";
    for (int i = 0; i < cycle_length; ++i) {
        const std::string state = "L" + std::to_string(i);
        b.behavior.transitions[{state, "tap:0"}] =
            TransitionEffect{"L" + std::to_string((i + 1) % cycle_length), 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:1"}] = TransitionEffect{"EXIT", 0.0, false, false, {}};
        b.behavior.transitions[{state, "back"}] = TransitionEffect{state, 0.0, false, false, {}};
    }
    b.behavior.transitions[{"EXIT", "back"}] = TransitionEffect{"L0", 0.0, false, false, {}};
    b.behavior.ad_triggers.push_back(AdTriggerInstance{"exit_ad", "EXIT", {}, 0.0, "custom"});

    family.loop_action_key = "tap:0";
    family.exit_action_key = "tap:1";
    family.r_loop = r_loop;
    family.r_exit = r_exit;
    family.r_sem_table = {{"Next", r_loop},
                          {"Continue", r_exit},
                          {"Sponsored offer", 0.9},
                          {"[BACK] Return to previous screen", 0.0}};
    return family;
}

GateFamily make_gate_family(int cycle_length, uint64_t seed) {
    if (cycle_length < 2) throw std::invalid_argument("cycle length must be >= 2");
    GateFamily family;
    Rng rng(seed ^ 0x6a7e5ULL);
    AppBundle& b = family.bundle;
    b.app_id = "synthetic.gate" + std::to_string(cycle_length) + "." + std::to_string(seed);
    b.manifest.activities = {"LoopActivity", "HubActivity",  "RewardActivity",
                             "GateActivity", "AdActivity",   "HelpActivity",
                             "StatsActivity", "ThemeActivity", "ShareActivity"};
    family.loop_activity = "LoopActivity";

    // Cue texts deliberately avoid the baseline keyword vocabulary: escaping
    // must require either semantics or visit pressure, not substring luck.
    const std::vector<std::string> loop_buttons = {"Next",  "Bonus Zone", "Help",
                                                   "Stats", "Theme",      "Share"};
    for (int i = 0; i < cycle_length; ++i) {
        b.rendering["L" + std::to_string(i)] = make_screen("LoopActivity", loop_buttons);
    }

    // Side screens: dead ends that all fall back to the loop start. A
    // systematic explorer pays for every one of their buttons.
    const std::vector<std::pair<std::string, std::string>> side_screens = {
        {"HELP", "HelpActivity"}, {"STATS", "StatsActivity"},
        {"THEME", "ThemeActivity"}, {"SHARE", "ShareActivity"}};
    for (const auto& [state, activity] : side_screens) {
        b.rendering[state] =
            make_screen(activity, {"Section A", "Section B", "Section C", "Section D"});
        for (int i = 0; i < 4; ++i) {
            b.behavior.transitions[{state, "tap:" + std::to_string(i)}] =
                TransitionEffect{"L0", 0.0, false, false, {}};
        }
        b.behavior.transitions[{state, "back"}] = TransitionEffect{"L0", 0.0, false, false, {}};
    }

    auto shuffled_with_cue = [&](std::vector<std::string> fillers, const std::string& cue,
                                 size_t& cue_index) {
        fillers.push_back(cue);
        // Fisher-Yates over positions; the cue lands anywhere.
        for (size_t i = fillers.size(); i > 1; --i) std::swap(fillers[i - 1], fillers[rng.pick(i)]);
        for (size_t i = 0; i < fillers.size(); ++i) {
            if (fillers[i] == cue) cue_index = i;
        }
        return fillers;
    };

    size_t hub_cue = 0;
    const auto hub_buttons = shuffled_with_cue({"Profile", "Archive", "History", "Labels", "Backup",
                                                "Storage", "Language", "Account", "Network", "Sync"},
                                               "Treasure Room", hub_cue);
    size_t reward_cue = 0;
    const auto reward_buttons = shuffled_with_cue(
        {"Daily Quest", "Leaderboard", "Badges", "Streaks", "Friends", "Quests", "Events",
         "Calendar", "Mailbox", "Trophies"},
        "Open Chest", reward_cue);
    size_t gate_cue = 0;
    const auto gate_buttons = shuffled_with_cue(
        {"Maybe Later", "No Thanks", "Dismiss", "Remind Me", "Skip"}, "Take Gift", gate_cue);

    b.rendering["HUB"] = make_screen("HubActivity", hub_buttons);
    b.rendering["REWARD"] = make_screen("RewardActivity", reward_buttons);
    b.rendering["GATE"] = make_screen("GateActivity", gate_buttons);
    b.rendering["AD"] = make_screen("AdActivity", {"Download"});

    b.behavior.initial_state = "L0";
    for (int i = 0; i < cycle_length; ++i) {
        const std::string state = "L" + std::to_string(i);
        b.behavior.transitions[{state, "tap:0"}] =
            TransitionEffect{"L" + std::to_string((i + 1) % cycle_length), 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:1"}] = TransitionEffect{"HUB", 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:2"}] = TransitionEffect{"HELP", 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:3"}] = TransitionEffect{"STATS", 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:4"}] = TransitionEffect{"THEME", 0.0, false, false, {}};
        b.behavior.transitions[{state, "tap:5"}] = TransitionEffect{"SHARE", 0.0, false, false, {}};
        b.behavior.transitions[{state, "back"}] = TransitionEffect{state, 0.0, false, false, {}};
    }

    auto wire_choices = [&](const std::string& state, size_t option_count, size_t cue_index,
                            const std::string& cue_target) {
        for (size_t i = 0; i < option_count; ++i) {
            const std::string target = i == cue_index ? cue_target : "L0";
            b.behavior.transitions[{state, "tap:" + std::to_string(i)}] =
                TransitionEffect{target, 0.0, false, false, {}};
        }
        b.behavior.transitions[{state, "back"}] = TransitionEffect{"L0", 0.0, false, false, {}};
    };
    wire_choices("HUB", hub_buttons.size(), hub_cue, "REWARD");
    wire_choices("REWARD", reward_buttons.size(), reward_cue, "GATE");
    wire_choices("GATE", gate_buttons.size(), gate_cue, "AD");
    b.behavior.transitions[{"AD", "back"}] = TransitionEffect{"L0", 0.0, false, false, {}};

    b.behavior.ad_triggers.push_back(AdTriggerInstance{"deep_ad", "AD", {}, 0.0, "custom"});

    family.r_sem_table = {{"Next", 0.4},        {"Bonus Zone", 0.8}, {"Treasure Room", 0.8},
                          {"Open Chest", 0.8},  {"Take Gift", 0.8},  {"Download", 0.9},
                          {"[BACK] Return to previous screen", 0.0}};
    family.total_ads = 1;
    return family;
}

} // namespace adscout
