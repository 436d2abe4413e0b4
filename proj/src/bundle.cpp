#include "adscout/bundle.hpp"

#include "adscout/fingerprint.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace adscout {

using nlohmann::json;

bool operator==(const Rect& a, const Rect& b) {
    return a.left == b.left && a.top == b.top && a.right == b.right && a.bottom == b.bottom;
}

double iou(const Rect& a, const Rect& b) {
    const int il = std::max(a.left, b.left);
    const int it = std::max(a.top, b.top);
    const int ir = std::min(a.right, b.right);
    const int ib = std::min(a.bottom, b.bottom);
    if (il >= ir || it >= ib) return 0.0;
    const double inter = static_cast<double>(ir - il) * (ib - it);
    const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

const ScreenRendering& AppBundle::screen(const std::string& state_id) const {
    auto it = rendering.find(state_id);
    if (it == rendering.end()) {
        throw BundleError("unknown state id '" + state_id + "'");
    }
    return it->second;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& path, const std::string& msg) {
    throw BundleError(origin + ": " + path + ": " + msg);
}

const json& require(const json& obj, const char* key, const std::string& origin, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(origin, path, std::string("missing field '") + key + "'");
    }
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& origin, const std::string& path) {
    const json& v = require(obj, key, origin, path);
    if (!v.is_string()) fail(origin, path + "." + key, "expected string");
    return v.get<std::string>();
}

Rect parse_rect(const json& v, const std::string& origin, const std::string& path) {
    if (!v.is_array() || v.size() != 4) fail(origin, path, "expected [l,t,r,b]");
    Rect r{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
    if (!r.well_ordered()) fail(origin, path, "bounds not well-ordered");
    return r;
}

LayoutNode parse_layout_node(const json& v, const std::string& origin, const std::string& path) {
    LayoutNode node;
    node.widget_class = require_string(v, "class", origin, path);
    if (v.contains("id")) node.resource_id = v.at("id").get<std::string>();
    if (v.contains("children")) {
        int i = 0;
        for (const auto& child : v.at("children")) {
            node.children.push_back(
                parse_layout_node(child, origin, path + ".children[" + std::to_string(i++) + "]"));
        }
    }
    return node;
}

Widget parse_widget(const json& v, int index, const std::string& origin, const std::string& path) {
    Widget w;
    w.index = index;
    w.widget_class = require_string(v, "class", origin, path);
    if (v.contains("text")) w.text = v.at("text").get<std::string>();
    if (v.contains("desc")) w.content_desc = v.at("desc").get<std::string>();
    if (v.contains("id")) w.resource_id = v.at("id").get<std::string>();
    w.bounds = parse_rect(require(v, "bounds", origin, path), origin, path + ".bounds");
    w.clickable = v.value("clickable", false);
    if (v.contains("label")) w.oracle_label = v.at("label").get<std::string>();
    w.oracle_tag = v.value("tag", "UI_ELEMENT");
    if (w.oracle_tag != "AD" && w.oracle_tag != "POTENTIAL_AD" && w.oracle_tag != "UI_ELEMENT") {
        fail(origin, path, "unknown tag '" + w.oracle_tag + "'");
    }
    return w;
}

bool is_framework_class(const std::string& name) {
    return name.rfind("android.", 0) == 0 || name.rfind("androidx.", 0) == 0 ||
           name.rfind("java.", 0) == 0;
}

void walk_layout_ids(const LayoutNode& node, const std::map<std::string, std::string>& resource_map,
                     const std::string& origin, const std::string& path) {
    if (node.resource_id && !resource_map.count(*node.resource_id)) {
        fail(origin, path, "resource id '" + *node.resource_id + "' not in resource_map");
    }
    for (size_t i = 0; i < node.children.size(); ++i) {
        walk_layout_ids(node.children[i], resource_map, origin,
                        path + ".children[" + std::to_string(i) + "]");
    }
}

void validate(const AppBundle& b, const std::string& origin) {
    std::set<std::string> activities;
    for (const auto& a : b.manifest.activities) {
        if (!activities.insert(a).second) fail(origin, "manifest.activities", "duplicate activity '" + a + "'");
    }
    for (const auto& a : b.manifest.registered_success_activities) {
        if (!activities.count(a)) fail(origin, "manifest.success_activities", "unknown activity '" + a + "'");
    }

    for (const auto& [state, screen] : b.rendering) {
        const std::string path = "rendering." + state;
        if (!activities.count(screen.activity)) {
            fail(origin, path, "unknown activity '" + screen.activity + "'");
        }
        if (screen.mode == RenderingMode::Canvas && !screen.widgets.empty()) {
            fail(origin, path, "canvas screen must not declare widgets");
        }
        if (screen.mode == RenderingMode::Hierarchy && !screen.regions.empty()) {
            fail(origin, path, "hierarchy screen must not declare regions");
        }
    }

    if (!b.rendering.count(b.behavior.initial_state)) {
        fail(origin, "behavior.initial_state", "unknown state '" + b.behavior.initial_state + "'");
    }
    for (const auto& [key, effect] : b.behavior.transitions) {
        const std::string path = "behavior.transitions." + key.first + "." + key.second;
        if (key.second == "restart") fail(origin, path, "'restart' is a reserved action key");
        if (!b.rendering.count(key.first)) fail(origin, path, "unknown source state '" + key.first + "'");
        if (!b.rendering.count(effect.next_state)) {
            fail(origin, path, "unknown target state '" + effect.next_state + "'");
        }
        if (effect.delay_seconds < 0) fail(origin, path, "negative delay");
    }

    std::set<std::string> ad_ids;
    for (const auto& trig : b.behavior.ad_triggers) {
        const std::string path = "behavior.ad_triggers." + trig.ad_id;
        if (!ad_ids.insert(trig.ad_id).second) fail(origin, path, "duplicate ad id");
        if (!b.rendering.count(trig.host_state)) {
            fail(origin, path, "unknown host state '" + trig.host_state + "'");
        }
        if (trig.min_dwell_seconds < 0) fail(origin, path, "negative min_dwell");
        if (trig.ad_type != "embedded" && trig.ad_type != "popup" && trig.ad_type != "custom") {
            fail(origin, path, "unknown ad type '" + trig.ad_type + "'");
        }
    }
    for (const auto& [key, effect] : b.behavior.transitions) {
        if (effect.ad_exposure) {
            const std::string path = "behavior.transitions." + key.first + "." + key.second;
            auto it = std::find_if(b.behavior.ad_triggers.begin(), b.behavior.ad_triggers.end(),
                                   [&](const AdTriggerInstance& t) { return t.ad_id == *effect.ad_exposure; });
            if (it == b.behavior.ad_triggers.end()) {
                fail(origin, path, "ad_exposure names undeclared ad '" + *effect.ad_exposure + "'");
            }
            if (it->host_state != effect.next_state) {
                fail(origin, path, "ad_exposure target does not host ad '" + *effect.ad_exposure + "'");
            }
        }
    }

    for (const auto& [activity, root] : b.layouts) {
        if (!activities.count(activity)) {
            fail(origin, "layouts." + activity, "unknown activity");
        }
        walk_layout_ids(root, b.resource_map, origin, "layouts." + activity);
    }

    // Superclass chains must resolve and terminate.
    std::map<std::string, const ClassSummary*> by_name;
    for (const auto& cls : b.code_summary) by_name[cls.class_name] = &cls;
    for (const auto& cls : b.code_summary) {
        std::set<std::string> seen{cls.class_name};
        const ClassSummary* cur = &cls;
        while (true) {
            const std::string& super = cur->superclass;
            if (is_framework_class(super)) break;
            auto it = by_name.find(super);
            if (it == by_name.end()) {
                fail(origin, "code_summary." + cur->class_name,
                     "superclass '" + super + "' is neither summarized nor a framework class");
            }
            if (!seen.insert(super).second) {
                fail(origin, "code_summary." + cls.class_name, "superclass cycle through '" + super + "'");
            }
            cur = it->second;
        }
    }
}

} // namespace

AppBundle parse_bundle_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw BundleError(origin + ": " + e.what());
    }

    AppBundle b;
    b.app_id = require_string(doc, "app_id", origin, "$");

    const json& man = require(doc, "manifest", origin, "$");
    for (const auto& a : require(man, "activities", origin, "manifest")) {
        b.manifest.activities.push_back(a.get<std::string>());
    }
    if (man.contains("permissions")) {
        for (const auto& p : man.at("permissions")) b.manifest.permissions.push_back(p.get<std::string>());
    }
    if (man.contains("metadata")) {
        int i = 0;
        for (const auto& m : man.at("metadata")) {
            const std::string path = "manifest.metadata[" + std::to_string(i++) + "]";
            b.manifest.metadata.emplace_back(require_string(m, "key", origin, path),
                                             require_string(m, "value", origin, path));
        }
    }
    if (man.contains("success_activities")) {
        for (const auto& a : man.at("success_activities")) {
            b.manifest.registered_success_activities.push_back(a.get<std::string>());
        }
    }

    if (doc.contains("layouts")) {
        for (const auto& [activity, node] : doc.at("layouts").items()) {
            b.layouts[activity] = parse_layout_node(node, origin, "layouts." + activity);
        }
    }
    if (doc.contains("resource_map")) {
        for (const auto& [sid, hex] : doc.at("resource_map").items()) {
            b.resource_map[sid] = hex.get<std::string>();
        }
    }
    if (doc.contains("code_summary")) {
        int ci = 0;
        for (const auto& c : doc.at("code_summary")) {
            const std::string cpath = "code_summary[" + std::to_string(ci++) + "]";
            ClassSummary cls;
            cls.class_name = require_string(c, "class", origin, cpath);
            cls.superclass = require_string(c, "superclass", origin, cpath);
            if (c.contains("methods")) {
                for (const auto& m : c.at("methods")) {
                    MethodSummary ms;
                    ms.signature = require_string(m, "signature", origin, cpath + ".methods");
                    if (m.contains("ad_apis")) {
                        for (const auto& api : m.at("ad_apis")) ms.invoked_ad_apis.push_back(api.get<std::string>());
                    }
                    if (m.contains("listeners")) {
                        for (const auto& l : m.at("listeners")) ms.implemented_listeners.push_back(l.get<std::string>());
                    }
                    cls.methods.push_back(std::move(ms));
                }
            }
            b.code_summary.push_back(std::move(cls));
        }
    }

    const json& rend = require(doc, "rendering", origin, "$");
    for (const auto& [state, scr] : rend.items()) {
        const std::string path = "rendering." + state;
        ScreenRendering screen;
        const std::string mode = require_string(scr, "mode", origin, path);
        screen.activity = require_string(scr, "activity", origin, path);
        screen.scrollable = scr.value("scrollable", false);
        if (mode == "hierarchy") {
            screen.mode = RenderingMode::Hierarchy;
            if (scr.contains("widgets")) {
                int wi = 0;
                for (const auto& w : scr.at("widgets")) {
                    screen.widgets.push_back(
                        parse_widget(w, wi, origin, path + ".widgets[" + std::to_string(wi) + "]"));
                    ++wi;
                }
            }
        } else if (mode == "canvas") {
            screen.mode = RenderingMode::Canvas;
            screen.canvas_bounds = parse_rect(require(scr, "canvas_bounds", origin, path), origin, path + ".canvas_bounds");
            if (scr.contains("regions")) {
                int ri = 0;
                for (const auto& r : scr.at("regions")) {
                    const std::string rpath = path + ".regions[" + std::to_string(ri++) + "]";
                    GroundTruthRegion region;
                    region.bounds = parse_rect(require(r, "bounds", origin, rpath), origin, rpath);
                    region.label = require_string(r, "label", origin, rpath);
                    region.tag = r.value("tag", "UI_ELEMENT");
                    if (region.tag != "AD" && region.tag != "POTENTIAL_AD" && region.tag != "UI_ELEMENT") {
                        fail(origin, rpath, "unknown tag '" + region.tag + "'");
                    }
                    screen.regions.push_back(std::move(region));
                }
            }
            if (scr.contains("contours")) {
                int ci2 = 0;
                for (const auto& c : scr.at("contours")) {
                    screen.coarse_contours.push_back(
                        parse_rect(c, origin, path + ".contours[" + std::to_string(ci2++) + "]"));
                }
            }
        } else {
            fail(origin, path, "mode must be 'hierarchy' or 'canvas'");
        }
        b.rendering[state] = std::move(screen);
    }

    const json& beh = require(doc, "behavior", origin, "$");
    b.behavior.initial_state = require_string(beh, "initial_state", origin, "behavior");
    if (beh.contains("transitions")) {
        for (const auto& [state, actions] : beh.at("transitions").items()) {
            for (const auto& [action, eff] : actions.items()) {
                const std::string path = "behavior.transitions." + state + "." + action;
                TransitionEffect effect;
                effect.next_state = require_string(eff, "next", origin, path);
                effect.delay_seconds = eff.value("delay", 0.0);
                effect.crash = eff.value("crash", false);
                effect.background = eff.value("background", false);
                if (eff.contains("ad") && !eff.at("ad").is_null()) {
                    effect.ad_exposure = eff.at("ad").get<std::string>();
                }
                b.behavior.transitions[{state, action}] = std::move(effect);
            }
        }
    }
    if (beh.contains("ad_triggers")) {
        for (const auto& t : beh.at("ad_triggers")) {
            const std::string path = "behavior.ad_triggers";
            AdTriggerInstance trig;
            trig.ad_id = require_string(t, "id", origin, path);
            trig.host_state = require_string(t, "host_state", origin, path + "." + trig.ad_id);
            if (t.contains("context")) {
                for (const auto& a : t.at("context")) trig.required_context.push_back(a.get<std::string>());
            }
            trig.min_dwell_seconds = t.value("min_dwell", 0.0);
            trig.ad_type = t.value("type", "custom");
            b.behavior.ad_triggers.push_back(std::move(trig));
        }
    }
    if (beh.contains("emissions")) {
        for (const auto& [state, actions] : beh.at("emissions").items()) {
            for (const auto& [action, list] : actions.items()) {
                const std::string path = "behavior.emissions." + state + "." + action;
                std::vector<Emission> ems;
                for (const auto& e : list) {
                    Emission em;
                    em.tag = require_string(e, "tag", origin, path);
                    em.message = require_string(e, "message", origin, path);
                    em.offset_seconds = e.value("offset", 0.0);
                    ems.push_back(std::move(em));
                }
                b.behavior.emissions[{state, action}] = std::move(ems);
            }
        }
    }

    validate(b, origin);
    return b;
}

AppBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BundleError("cannot read bundle file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_bundle_text(ss.str(), path);
}

std::string canonical_state_serialization(const UiState& state) {
    std::string out = "activity|" + state.activity;
    if (state.mode == RenderingMode::Canvas) {
        out += "\n> canvas|" + std::to_string(state.canvas_bounds.left) + "," +
               std::to_string(state.canvas_bounds.top) + "," +
               std::to_string(state.canvas_bounds.right) + "," +
               std::to_string(state.canvas_bounds.bottom) + "|";
        return out;
    }
    for (const auto& w : state.widgets) {
        out += "\n> " + w.widget_class + "|" + w.resource_id.value_or("") + "|" +
               w.text.value_or(w.content_desc.value_or(""));
    }
    return out;
}

std::string structural_digest(const UiState& state) {
    std::string out = "activity|" + state.activity;
    if (state.mode == RenderingMode::Canvas) {
        out += "\n> canvas";
        return out;
    }
    for (const auto& w : state.widgets) {
        out += "\n> " + w.widget_class + "|" + w.resource_id.value_or("");
    }
    return short_hash(out);
}

} // namespace adscout
