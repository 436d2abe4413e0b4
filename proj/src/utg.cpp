#include "adscout/utg.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace adscout {

using nlohmann::json;

UtgNode& Utg::ensure_node(const std::string& id, const std::string& activity) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        UtgNode node;
        node.id = id;
        node.activity = activity;
        node.score = initial_score_;
        it = nodes_.emplace(id, std::move(node)).first;
    } else if (it->second.activity.empty() && !activity.empty()) {
        it->second.activity = activity;
    }
    return it->second;
}

void Utg::record_transition(const std::string& from, const std::string& activity_from,
                            const std::string& event, const std::string& to,
                            const std::string& activity_to) {
    ensure_node(from, activity_from);
    UtgNode& target = ensure_node(to, activity_to);
    target.visits += 1;
    edges_.insert(UtgEdge{from, event, to});
}

double Utg::update_score(const std::string& node_id, double s_hat, double alpha) {
    if (s_hat < 0.0 || s_hat > 1.0) throw std::invalid_argument("s_hat outside [0,1]");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) throw std::invalid_argument("unknown node '" + node_id + "'");
    it->second.score = (1.0 - alpha) * it->second.score + alpha * s_hat;
    return it->second.score;
}

const UtgNode& Utg::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::invalid_argument("unknown node '" + id + "'");
    return it->second;
}

UtgNode* Utg::find_node(const std::string& id) {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<NeighborhoodEntry> Utg::neighborhood(const std::string& node_id, int hops) const {
    if (!nodes_.count(node_id)) throw std::invalid_argument("unknown node '" + node_id + "'");
    if (hops < 0) throw std::invalid_argument("hops must be >= 0");

    std::map<std::string, NeighborhoodEntry> found;
    found[node_id] = NeighborhoodEntry{0, &node(node_id), "", ""};
    std::deque<std::string> frontier{node_id};
    int depth = 0;
    while (depth < hops && !frontier.empty()) {
        std::deque<std::string> next;
        for (const auto& cur : frontier) {
            for (const UtgEdge* e : edges_from(cur)) {
                auto it = found.find(e->to);
                if (it == found.end()) {
                    found[e->to] = NeighborhoodEntry{depth + 1, &node(e->to), e->event, e->from};
                    next.push_back(e->to);
                } else if (it->second.hops == depth + 1 && e->event < it->second.via_event) {
                    it->second.via_event = e->event;
                    it->second.via_from = e->from;
                }
            }
        }
        frontier = std::move(next);
        ++depth;
    }

    std::vector<NeighborhoodEntry> out;
    out.reserve(found.size());
    for (auto& [id, entry] : found) out.push_back(entry);
    std::sort(out.begin(), out.end(), [](const NeighborhoodEntry& a, const NeighborhoodEntry& b) {
        if (a.hops != b.hops) return a.hops < b.hops;
        return a.node->id < b.node->id;
    });
    return out;
}

std::optional<std::string> Utg::successor(const std::string& from, const std::string& event) const {
    auto it = edges_.lower_bound(UtgEdge{from, event, ""});
    if (it != edges_.end() && it->from == from && it->event == event) return it->to;
    return std::nullopt;
}

std::vector<const UtgEdge*> Utg::edges_from(const std::string& from) const {
    std::vector<const UtgEdge*> out;
    for (auto it = edges_.lower_bound(UtgEdge{from, "", ""});
         it != edges_.end() && it->from == from; ++it) {
        out.push_back(&*it);
    }
    return out;
}

void Utg::merge(const Utg& other, MergeMode mode) {
    for (const auto& [id, node] : other.nodes_) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) {
            UtgNode copy = node;
            if (mode == MergeMode::StructureOnly) {
                copy.visits = 0;
                copy.score = initial_score_;
            }
            nodes_.emplace(id, std::move(copy));
        } else if (mode == MergeMode::SumVisits) {
            it->second.visits += node.visits;
        }
    }
    for (const auto& edge : other.edges_) edges_.insert(edge);
}

void Utg::set_metadata(const std::string& node_id, const std::string& activity,
                       const std::string& structural) {
    UtgNode& n = ensure_node(node_id, activity);
    n.structural_metadata = structural;
}

json Utg::to_json() const {
    json nodes = json::array();
    for (const auto& [id, node] : nodes_) {
        json n;
        n["id"] = node.id;
        n["activity"] = node.activity;
        n["visits"] = node.visits;
        n["score"] = node.score;
        if (node.semantic_summary) n["summary"] = *node.semantic_summary;
        if (!node.structural_metadata.empty()) n["structural"] = node.structural_metadata;
        nodes.push_back(std::move(n));
    }
    json edges = json::array();
    for (const auto& e : edges_) {
        edges.push_back(json{{"from", e.from}, {"event", e.event}, {"to", e.to}});
    }
    return json{{"format", "adscout-utg"}, {"version", 1}, {"nodes", nodes}, {"edges", edges}};
}

Utg Utg::from_json(const json& doc) {
    if (doc.value("format", "") != "adscout-utg") {
        throw std::invalid_argument("not a utg document");
    }
    Utg g;
    for (const auto& n : doc.at("nodes")) {
        UtgNode node;
        node.id = n.at("id").get<std::string>();
        node.activity = n.value("activity", "");
        node.visits = n.value("visits", 0L);
        node.score = n.value("score", 0.10);
        if (n.contains("summary")) node.semantic_summary = n.at("summary").get<std::string>();
        node.structural_metadata = n.value("structural", "");
        g.nodes_.emplace(node.id, std::move(node));
    }
    for (const auto& e : doc.at("edges")) {
        g.edges_.insert(UtgEdge{e.at("from").get<std::string>(), e.at("event").get<std::string>(),
                                e.at("to").get<std::string>()});
    }
    return g;
}

std::string Utg::to_dot() const {
    std::string out = "digraph utg {\n";
    for (const auto& [id, node] : nodes_) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "visits=%ld score=%.2f", node.visits, node.score);
        out += "  \"" + id + "\" [label=\"" + id + "\\n" + node.activity + "\\n" + buf + "\"];\n";
    }
    for (const auto& e : edges_) {
        std::string label = e.event;
        if (label.size() > 40) label = label.substr(0, 37) + "...";
        for (auto& c : label) {
            if (c == '"') c = '\'';
        }
        out += "  \"" + e.from + "\" -> \"" + e.to + "\" [label=\"" + label + "\"];\n";
    }
    out += "}\n";
    return out;
}

} // namespace adscout
