#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adscout {

struct UtgNode {
    std::string id; // state fingerprint
    std::string activity;
    long visits = 0;
    double score = 0.10; // ad-relevance belief S(v)
    std::optional<std::string> semantic_summary;
    std::string structural_metadata; // compact widget digest
};

struct UtgEdge {
    std::string from;
    std::string event; // canonical action descriptor
    std::string to;

    bool operator<(const UtgEdge& other) const {
        return std::tie(from, event, to) < std::tie(other.from, other.event, other.to);
    }
    bool operator==(const UtgEdge& other) const {
        return from == other.from && event == other.event && to == other.to;
    }
};

struct NeighborhoodEntry {
    int hops = 0;
    const UtgNode* node = nullptr;
    std::string via_event; // representative inbound edge (lexicographically first)
    std::string via_from;
};

enum class MergeMode { SumVisits, StructureOnly };

class Utg {
public:
    // Nodes are created on first sight; arrival bumps the target's visit
    // counter every time, edges are set-union.
    void record_transition(const std::string& from, const std::string& activity_from,
                           const std::string& event, const std::string& to,
                           const std::string& activity_to);

    // score_{t+1} = (1-alpha)*score_t + alpha*s_hat. Inputs outside [0,1] are rejected.
    double update_score(const std::string& node_id, double s_hat, double alpha);

    // Directed BFS out to `hops`; deterministic order (hop distance, then node id).
    std::vector<NeighborhoodEntry> neighborhood(const std::string& node_id, int hops) const;

    void merge(const Utg& other, MergeMode mode);

    bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
    const UtgNode& node(const std::string& id) const;
    UtgNode* find_node(const std::string& id);
    const std::map<std::string, UtgNode>& nodes() const { return nodes_; }
    const std::set<UtgEdge>& edges() const { return edges_; }

    std::optional<std::string> successor(const std::string& from, const std::string& event) const;
    std::vector<const UtgEdge*> edges_from(const std::string& from) const;

    void set_initial_score(double score) { initial_score_ = score; }
    double initial_score() const { return initial_score_; }
    void set_metadata(const std::string& node_id, const std::string& activity,
                      const std::string& structural);

    nlohmann::json to_json() const;
    static Utg from_json(const nlohmann::json& doc);
    std::string to_dot() const; // write-only rendering format

private:
    UtgNode& ensure_node(const std::string& id, const std::string& activity);

    std::map<std::string, UtgNode> nodes_;
    std::set<UtgEdge> edges_;
    double initial_score_ = 0.10;
};

} // namespace adscout
