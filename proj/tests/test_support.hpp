#pragma once

#include "adscout/bundle.hpp"

#include <string>

namespace adscout::test {

inline std::string fixture_path(const std::string& rel) {
    return std::string(ADSCOUT_FIXTURE_DIR) + "/" + rel;
}

inline Widget widget(int index, const std::string& cls, const std::string& text, Rect bounds,
                     bool clickable = true) {
    Widget w;
    w.index = index;
    w.widget_class = cls;
    if (!text.empty()) w.text = text;
    w.bounds = bounds;
    w.clickable = clickable;
    return w;
}

inline UiState hierarchy_state(const std::string& activity, std::vector<Widget> widgets) {
    UiState s;
    s.activity = activity;
    s.mode = RenderingMode::Hierarchy;
    s.widgets = std::move(widgets);
    return s;
}

} // namespace adscout::test
