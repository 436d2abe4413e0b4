#pragma once

#include "adscout/bundle.hpp"
#include "adscout/config.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace adscout {

enum class ElementSource { Hierarchy, Region };

struct ActionableElement {
    int index = 0;
    ElementSource source = ElementSource::Hierarchy;
    std::string class_or_kind;
    std::optional<std::string> text;             // widget text or content description
    std::optional<std::string> semantic_caption; // "[TAG] description" once captioned
    std::optional<std::string> resource_id;
    Rect bounds;
    std::string action_key;
    bool global_action = false;
};

struct CaptionTag {
    std::string tag; // AD | POTENTIAL_AD | UI_ELEMENT
    std::string description;
};

enum class ProposalOrigin { DeepDetector, HeuristicAnalyzer };

struct RegionProposal {
    Rect bounds;
    double confidence = 0.0;
    ProposalOrigin origin = ProposalOrigin::DeepDetector;
};

struct DetectionResult {
    std::vector<RegionProposal> proposals;
    bool degraded = false; // deep detector failed; heuristic-only output
};

// ---------------------------------------------------------------------------
// Ports

class RegionDetector {
public:
    virtual ~RegionDetector() = default;
    virtual std::vector<RegionProposal> detect(const UiState& state) = 0;
};

// Stand-in for the trained detector: replays the screen's ground-truth
// regions through a configurable recall/noise model.
class SimulatedDeepDetector : public RegionDetector {
public:
    explicit SimulatedDeepDetector(DetectorConfig config) : config_(config) {}
    std::vector<RegionProposal> detect(const UiState& state) override;

private:
    DetectorConfig config_;
};

struct CaptionTarget {
    int id = 0;
    Rect crop;
    std::string kind;
};

class VisionCaptioner {
public:
    virtual ~VisionCaptioner() = default;
    // Receives crop references plus instruction text; replies with one
    // structured {id, description} record per target.
    virtual std::string annotate(const std::string& instruction,
                                 const std::vector<CaptionTarget>& targets) = 0;
    // Lets scripted backends resolve crops against the current screen.
    virtual void set_context(const UiState&) {}
};

// Oracle captioner that echoes the bundle's labels for the crop bounds.
class ScriptedCaptioner : public VisionCaptioner {
public:
    std::string annotate(const std::string& instruction,
                         const std::vector<CaptionTarget>& targets) override;
    void set_context(const UiState& state) override { screen_ = state; }

private:
    UiState screen_;
};

// ---------------------------------------------------------------------------
// Operations

// Clickable widgets in document order followed by the global back action.
std::vector<ActionableElement> normalize_hierarchy(const UiState& state);

// Grid-snapped boxes derived from the screen's declared coarse contours,
// overlapping boxes merged to a fixpoint.
std::vector<RegionProposal> heuristic_regions(const UiState& state);

DetectionResult detect_regions(const UiState& state, RegionDetector& detector);

// Greedy by confidence: a proposal survives iff its IoU with every survivor
// is below the threshold; survivors keep the higher-confidence bounds.
std::vector<RegionProposal> consolidate_regions(const std::vector<RegionProposal>& a,
                                                const std::vector<RegionProposal>& b,
                                                double iou_threshold);

bool should_invoke_vlm(const ActionableElement& element, RenderingMode mode,
                       const std::vector<std::string>& media_container_classes);

// One tag per target, order preserved. A malformed captioner reply is
// retried once, then the raw text is preserved under a UI_ELEMENT tag.
std::vector<CaptionTag> caption(const std::vector<CaptionTarget>& targets,
                                VisionCaptioner& captioner);

std::string caption_instruction();

struct PerceptionResult {
    std::vector<ActionableElement> elements;
    bool degraded = false;
    int captioner_calls = 0;
};

// Full cross-rendering pipeline: the policy sees the same element shape for
// hierarchy and canvas screens. `caption_everything` disables the selective
// rule (cost baseline for comparison runs).
PerceptionResult perceive(const UiState& state, const EngineConfig& config,
                          RegionDetector* detector, VisionCaptioner* captioner,
                          bool caption_everything = false);

} // namespace adscout
