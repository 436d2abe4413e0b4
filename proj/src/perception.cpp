#include "adscout/perception.hpp"

#include "adscout/fingerprint.hpp"
#include "adscout/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace adscout {

using nlohmann::json;

namespace {

std::string simple_class_name(const std::string& cls) {
    const size_t dot = cls.rfind('.');
    return dot == std::string::npos ? cls : cls.substr(dot + 1);
}

bool proposal_before(const RegionProposal& a, const RegionProposal& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.origin != b.origin) return a.origin == ProposalOrigin::DeepDetector;
    return std::tie(a.bounds.top, a.bounds.left, a.bounds.bottom, a.bounds.right) <
           std::tie(b.bounds.top, b.bounds.left, b.bounds.bottom, b.bounds.right);
}

} // namespace

std::vector<ActionableElement> normalize_hierarchy(const UiState& state) {
    if (state.mode != RenderingMode::Hierarchy) {
        throw std::invalid_argument("normalize_hierarchy requires a hierarchy-mode state");
    }
    std::vector<ActionableElement> elements;
    for (const auto& w : state.widgets) {
        if (!w.clickable) continue;
        ActionableElement el;
        el.index = static_cast<int>(elements.size());
        el.source = ElementSource::Hierarchy;
        el.class_or_kind = simple_class_name(w.widget_class);
        if (w.text && !w.text->empty()) {
            el.text = w.text;
        } else if (w.content_desc && !w.content_desc->empty()) {
            el.text = w.content_desc;
        }
        el.resource_id = w.resource_id;
        el.bounds = w.bounds;
        el.action_key = "tap:" + std::to_string(w.index);
        elements.push_back(std::move(el));
    }

    ActionableElement back;
    back.index = static_cast<int>(elements.size());
    back.source = ElementSource::Hierarchy;
    back.class_or_kind = "BackButton";
    back.text = "[BACK] Return to previous screen";
    back.bounds = Rect{0, 0, 1, 1};
    back.action_key = "back";
    back.global_action = true;
    elements.push_back(std::move(back));
    return elements;
}

std::vector<RegionProposal> heuristic_regions(const UiState& state) {
    const Rect& canvas = state.canvas_bounds;
    const int width = std::max(1, canvas.right - canvas.left);
    const int height = std::max(1, canvas.bottom - canvas.top);
    const int cell_w = std::max(1, width / 12);
    const int cell_h = std::max(1, height / 24);

    auto snap = [&](const Rect& r) {
        Rect s;
        s.left = canvas.left + ((r.left - canvas.left) / cell_w) * cell_w;
        s.top = canvas.top + ((r.top - canvas.top) / cell_h) * cell_h;
        s.right = canvas.left + ((r.right - canvas.left + cell_w - 1) / cell_w) * cell_w;
        s.bottom = canvas.top + ((r.bottom - canvas.top + cell_h - 1) / cell_h) * cell_h;
        s.right = std::min(s.right, canvas.right);
        s.bottom = std::min(s.bottom, canvas.bottom);
        if (s.right <= s.left) s.right = s.left + 1;
        if (s.bottom <= s.top) s.bottom = s.top + 1;
        return s;
    };

    std::vector<Rect> boxes;
    for (const auto& contour : state.coarse_contours) boxes.push_back(snap(contour));

    // Merge intersecting boxes until stable.
    bool merged = true;
    while (merged) {
        merged = false;
        for (size_t i = 0; i < boxes.size() && !merged; ++i) {
            for (size_t j = i + 1; j < boxes.size(); ++j) {
                const Rect& a = boxes[i];
                const Rect& b = boxes[j];
                const bool overlap = a.left < b.right && b.left < a.right &&
                                     a.top < b.bottom && b.top < a.bottom;
                if (!overlap) continue;
                boxes[i] = Rect{std::min(a.left, b.left), std::min(a.top, b.top),
                                std::max(a.right, b.right), std::max(a.bottom, b.bottom)};
                boxes.erase(boxes.begin() + static_cast<long>(j));
                merged = true;
                break;
            }
        }
    }

    std::sort(boxes.begin(), boxes.end(), [](const Rect& a, const Rect& b) {
        return std::tie(a.top, a.left, a.bottom, a.right) < std::tie(b.top, b.left, b.bottom, b.right);
    });

    std::vector<RegionProposal> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes) {
        out.push_back(RegionProposal{b, 0.5, ProposalOrigin::HeuristicAnalyzer});
    }
    return out;
}

namespace {

// Per-screen mix so recall sampling differs between screens but stays
// reproducible for a fixed detector seed.
uint64_t screen_mix(const UiState& state) {
    return fnv1a64(state.state_fingerprint);
}

} // namespace

std::vector<RegionProposal> SimulatedDeepDetector::detect(const UiState& state) {
    const size_t total = state.canvas_regions.size();
    const size_t keep = static_cast<size_t>(config_.recall * static_cast<double>(total) + 0.5);

    std::vector<size_t> order(total);
    for (size_t i = 0; i < total; ++i) order[i] = i;
    Rng rng(config_.seed ^ screen_mix(state));
    rng.shuffle(order);
    order.resize(std::min(keep, total));
    std::sort(order.begin(), order.end());

    std::vector<RegionProposal> out;
    for (size_t idx : order) {
        out.push_back(RegionProposal{state.canvas_regions[idx].bounds, 0.9, ProposalOrigin::DeepDetector});
    }
    for (int i = 0; i < config_.noise_regions; ++i) {
        const Rect& c = state.canvas_bounds;
        const int w = std::max(2, c.right - c.left);
        const int h = std::max(2, c.bottom - c.top);
        const int x = c.left + static_cast<int>(rng.pick(static_cast<size_t>(w - 1)));
        const int y = c.top + static_cast<int>(rng.pick(static_cast<size_t>(h - 1)));
        const int bw = 1 + static_cast<int>(rng.pick(static_cast<size_t>(std::max(1, w / 4))));
        const int bh = 1 + static_cast<int>(rng.pick(static_cast<size_t>(std::max(1, h / 4))));
        out.push_back(RegionProposal{Rect{x, y, std::min(x + bw, c.right), std::min(y + bh, c.bottom)},
                                     0.3, ProposalOrigin::DeepDetector});
    }
    return out;
}

DetectionResult detect_regions(const UiState& state, RegionDetector& detector) {
    if (state.mode != RenderingMode::Canvas) {
        throw std::invalid_argument("detect_regions requires a canvas-mode state");
    }
    DetectionResult result;
    std::vector<RegionProposal> deep;
    try {
        deep = detector.detect(state);
    } catch (const std::exception&) {
        result.degraded = true;
    }
    result.proposals = deep;
    for (const auto& h : heuristic_regions(state)) result.proposals.push_back(h);
    return result;
}

std::vector<RegionProposal> consolidate_regions(const std::vector<RegionProposal>& a,
                                                const std::vector<RegionProposal>& b,
                                                double iou_threshold) {
    if (iou_threshold <= 0.0 || iou_threshold > 1.0) {
        throw std::invalid_argument("iou_threshold must be in (0,1]");
    }
    std::vector<RegionProposal> all = a;
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end(), proposal_before);

    std::vector<RegionProposal> kept;
    for (const auto& p : all) {
        bool dominated = false;
        for (const auto& k : kept) {
            if (iou(p.bounds, k.bounds) >= iou_threshold) {
                dominated = true;
                break;
            }
        }
        if (!dominated) kept.push_back(p);
    }
    return kept;
}

bool should_invoke_vlm(const ActionableElement& element, RenderingMode mode,
                       const std::vector<std::string>& media_container_classes) {
    if (element.global_action) return false;
    if (mode == RenderingMode::Canvas || element.source == ElementSource::Region) return true;
    if (element.text && !element.text->empty()) return false;
    return std::find(media_container_classes.begin(), media_container_classes.end(),
                     element.class_or_kind) != media_container_classes.end();
}

std::string caption_instruction() {
    return "You are an expert mobile ad detector. Analyze the referenced UI crops and label "
           "each element with one of the following categories: [AD]: a component that directly "
           "shows or triggers an advertisement, [POTENTIAL_AD]: a component that may lead to "
           "promotional content, [UI_ELEMENT]: an ordinary interface component. Your output "
           "MUST be a valid JSON array, where each object contains the 'id' (the number of the "
           "box) and 'description' (your analysis, prefixed with the category tag).";
}

namespace {

std::optional<CaptionTag> split_tagged(const std::string& text) {
    for (const char* tag : {"AD", "POTENTIAL_AD", "UI_ELEMENT"}) {
        const std::string prefix = std::string("[") + tag + "]";
        if (text.rfind(prefix, 0) == 0) {
            std::string desc = text.substr(prefix.size());
            while (!desc.empty() && desc.front() == ' ') desc.erase(desc.begin());
            return CaptionTag{tag, desc};
        }
    }
    return std::nullopt;
}

std::optional<std::vector<CaptionTag>> try_parse_reply(const std::string& reply,
                                                       const std::vector<CaptionTarget>& targets) {
    const size_t start = reply.find('[');
    const size_t end = reply.rfind(']');
    if (start == std::string::npos || end == std::string::npos || end <= start) return std::nullopt;
    json doc;
    try {
        doc = json::parse(reply.substr(start, end - start + 1));
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
    if (!doc.is_array()) return std::nullopt;

    std::map<int, std::string> by_id;
    for (const auto& item : doc) {
        if (!item.contains("id") || !item.contains("description")) return std::nullopt;
        by_id[item.at("id").get<int>()] = item.at("description").get<std::string>();
    }
    std::vector<CaptionTag> tags;
    for (const auto& t : targets) {
        auto it = by_id.find(t.id);
        if (it == by_id.end()) return std::nullopt;
        if (auto tagged = split_tagged(it->second)) {
            tags.push_back(*tagged);
        } else {
            tags.push_back(CaptionTag{"UI_ELEMENT", it->second});
        }
    }
    return tags;
}

} // namespace

std::vector<CaptionTag> caption(const std::vector<CaptionTarget>& targets, VisionCaptioner& captioner) {
    if (targets.empty()) throw std::invalid_argument("caption requires at least one target");
    const std::string instruction = caption_instruction();
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = captioner.annotate(instruction, targets);
        } catch (const std::exception&) {
            continue;
        }
        if (auto tags = try_parse_reply(reply, targets)) return *tags;
    }
    // Both attempts malformed: tag everything UI_ELEMENT, keep whatever the
    // backend last said as the description.
    std::vector<CaptionTag> tags;
    std::string last;
    try {
        last = captioner.annotate(instruction, targets);
    } catch (const std::exception&) {
        last = "unavailable";
    }
    for (size_t i = 0; i < targets.size(); ++i) tags.push_back(CaptionTag{"UI_ELEMENT", last});
    return tags;
}

std::string ScriptedCaptioner::annotate(const std::string&, const std::vector<CaptionTarget>& targets) {
    json out = json::array();
    for (const auto& t : targets) {
        std::string label = "unrecognized element";
        std::string tag = "UI_ELEMENT";
        for (const auto& region : screen_.canvas_regions) {
            if (region.bounds == t.crop) {
                label = region.label;
                tag = region.tag;
                break;
            }
        }
        if (screen_.mode == RenderingMode::Hierarchy) {
            for (const auto& w : screen_.widgets) {
                if (w.bounds == t.crop) {
                    if (w.oracle_label) {
                        label = *w.oracle_label;
                        tag = w.oracle_tag;
                    } else if (w.text || w.content_desc) {
                        label = w.text.value_or(*w.content_desc);
                    }
                    break;
                }
            }
        }
        out.push_back(json{{"id", t.id}, {"description", "[" + tag + "] " + label}});
    }
    return out.dump();
}

PerceptionResult perceive(const UiState& state, const EngineConfig& config, RegionDetector* detector,
                          VisionCaptioner* captioner, bool caption_everything) {
    PerceptionResult result;
    if (captioner) captioner->set_context(state);

    if (state.mode == RenderingMode::Hierarchy) {
        result.elements = normalize_hierarchy(state);
        if (!captioner) return result;

        std::vector<CaptionTarget> targets;
        std::vector<size_t> target_elements;
        for (size_t i = 0; i < result.elements.size(); ++i) {
            const auto& el = result.elements[i];
            const bool wanted =
                caption_everything
                    ? !el.global_action
                    : should_invoke_vlm(el, state.mode, config.media_container_classes);
            if (!wanted) continue;
            targets.push_back(CaptionTarget{static_cast<int>(targets.size()), el.bounds, el.class_or_kind});
            target_elements.push_back(i);
        }
        if (!targets.empty()) {
            const auto tags = caption(targets, *captioner);
            result.captioner_calls = static_cast<int>(targets.size());
            for (size_t i = 0; i < target_elements.size(); ++i) {
                result.elements[target_elements[i]].semantic_caption =
                    "[" + tags[i].tag + "] " + tags[i].description;
            }
        }
        return result;
    }

    DetectionResult detection;
    if (detector) {
        detection = detect_regions(state, *detector);
    } else {
        detection.proposals = heuristic_regions(state);
        detection.degraded = true;
    }
    result.degraded = detection.degraded;

    std::vector<RegionProposal> consolidated =
        consolidate_regions(detection.proposals, {}, config.iou_threshold);
    std::sort(consolidated.begin(), consolidated.end(), [](const RegionProposal& a, const RegionProposal& b) {
        return std::tie(a.bounds.top, a.bounds.left, a.bounds.bottom, a.bounds.right) <
               std::tie(b.bounds.top, b.bounds.left, b.bounds.bottom, b.bounds.right);
    });

    std::vector<CaptionTarget> targets;
    for (size_t i = 0; i < consolidated.size(); ++i) {
        ActionableElement el;
        el.index = static_cast<int>(i);
        el.source = ElementSource::Region;
        el.class_or_kind = "Region";
        el.bounds = consolidated[i].bounds;
        const int cx = (el.bounds.left + el.bounds.right) / 2;
        const int cy = (el.bounds.top + el.bounds.bottom) / 2;
        el.action_key = "tap_xy:" + std::to_string(cx) + "," + std::to_string(cy);
        result.elements.push_back(std::move(el));
        targets.push_back(CaptionTarget{static_cast<int>(i), consolidated[i].bounds, "Region"});
    }
    if (captioner && !targets.empty()) {
        const auto tags = caption(targets, *captioner);
        result.captioner_calls = static_cast<int>(targets.size());
        for (size_t i = 0; i < tags.size(); ++i) {
            result.elements[i].semantic_caption = "[" + tags[i].tag + "] " + tags[i].description;
        }
    }

    ActionableElement back;
    back.index = static_cast<int>(result.elements.size());
    back.source = ElementSource::Region;
    back.class_or_kind = "BackButton";
    back.text = "[BACK] Return to previous screen";
    back.bounds = Rect{0, 0, 1, 1};
    back.action_key = "back";
    back.global_action = true;
    result.elements.push_back(std::move(back));
    return result;
}

} // namespace adscout
