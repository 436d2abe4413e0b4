#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adscout {

struct Rect {
    int left = 0;
    int top = 0;
    int right = 0;
    int bottom = 0;

    bool well_ordered() const { return left < right && top < bottom; }
    long long area() const {
        return static_cast<long long>(right - left) * (bottom - top);
    }
};

bool operator==(const Rect& a, const Rect& b);
double iou(const Rect& a, const Rect& b);

struct Widget {
    int index = 0;
    std::string widget_class;
    std::optional<std::string> text;
    std::optional<std::string> content_desc;
    std::optional<std::string> resource_id;
    Rect bounds;
    bool clickable = false;
    // What a captioner would say about this widget's pixels. Consumed only
    // by the scripted vision oracle, never by the policy directly.
    std::optional<std::string> oracle_label;
    std::string oracle_tag = "UI_ELEMENT";
};

// Ground-truth paint region of a canvas screen. Carries the oracle caption
// used by the scripted vision backends; the decision policy never sees it.
struct GroundTruthRegion {
    Rect bounds;
    std::string label;
    std::string tag; // AD | POTENTIAL_AD | UI_ELEMENT
};

enum class RenderingMode { Hierarchy, Canvas };

struct ScreenRendering {
    RenderingMode mode = RenderingMode::Hierarchy;
    std::string activity;
    std::vector<Widget> widgets;              // hierarchy mode
    Rect canvas_bounds;                       // canvas mode
    std::vector<GroundTruthRegion> regions;   // canvas mode, detector-only
    std::vector<Rect> coarse_contours;        // canvas mode, heuristic-analyzer input
    bool scrollable = false;
};

struct Manifest {
    std::vector<std::string> activities;
    std::vector<std::string> permissions;
    std::vector<std::pair<std::string, std::string>> metadata;
    // Activities known to host ads once reached. Ground truth for the
    // success check; never surfaced to the decision policy.
    std::vector<std::string> registered_success_activities;
};

struct MethodSummary {
    std::string signature;
    std::vector<std::string> invoked_ad_apis;
    std::vector<std::string> implemented_listeners;
};

struct ClassSummary {
    std::string class_name;
    std::string superclass;
    std::vector<MethodSummary> methods;
};

struct LayoutNode {
    std::string widget_class;
    std::optional<std::string> resource_id;
    std::vector<LayoutNode> children;
};

struct TransitionEffect {
    std::string next_state;
    double delay_seconds = 0.0;
    bool crash = false;
    bool background = false;
    std::optional<std::string> ad_exposure;
};

struct AdTriggerInstance {
    std::string ad_id;
    std::string host_state;
    std::vector<std::string> required_context; // action-key suffix that must precede exposure
    double min_dwell_seconds = 0.0;
    std::string ad_type; // embedded | popup | custom
};

struct Emission {
    std::string tag;
    std::string message;
    double offset_seconds = 0.0;
};

struct BehaviorScript {
    std::string initial_state;
    std::map<std::pair<std::string, std::string>, TransitionEffect> transitions;
    std::vector<AdTriggerInstance> ad_triggers;
    std::map<std::pair<std::string, std::string>, std::vector<Emission>> emissions;
};

struct AppBundle {
    std::string app_id;
    Manifest manifest;
    std::map<std::string, LayoutNode> layouts; // activity name -> layout root
    std::map<std::string, std::string> resource_map;
    std::vector<ClassSummary> code_summary;
    BehaviorScript behavior;
    std::map<std::string, ScreenRendering> rendering; // state id -> screen

    const ScreenRendering& screen(const std::string& state_id) const;
};

class BundleError : public std::runtime_error {
public:
    explicit BundleError(const std::string& what) : std::runtime_error(what) {}
};

// Parses and validates a bundle document. Throws BundleError naming the
// offending field or reference.
AppBundle load_bundle(const std::string& path);
AppBundle parse_bundle_text(const std::string& text, const std::string& origin);

// Observation handed to perception and the policy. Canvas regions and
// contours ride along for the detector interface only.
struct UiState {
    std::string state_fingerprint;
    std::string activity;
    RenderingMode mode = RenderingMode::Hierarchy;
    std::vector<Widget> widgets;
    Rect canvas_bounds;
    std::vector<GroundTruthRegion> canvas_regions;
    std::vector<Rect> coarse_contours;
    double clock_seconds = 0.0;
};

// Canonical observable serialization: activity plus one "class|resource|text"
// line per widget in document order. Bounds, indices and the clock are
// deliberately excluded so renumbering and relayouts do not change identity.
std::string canonical_state_serialization(const UiState& state);

// Digest of classes and resource ids only (no text). Two screens with equal
// structural digests belong to the same structural equivalence class.
std::string structural_digest(const UiState& state);

} // namespace adscout
