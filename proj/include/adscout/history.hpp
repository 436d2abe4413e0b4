#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace adscout {

// K_t = ceil(1.5*k_base) when the last k_base interactions saw at most two
// distinct states (stagnation), otherwise k_base.
inline int adaptive_window(const std::vector<std::string>& recent_states, int k_base) {
    if (k_base < 1) throw std::invalid_argument("k_base must be >= 1");
    std::vector<std::string> unique;
    for (const auto& s : recent_states) {
        bool seen = false;
        for (const auto& u : unique) {
            if (u == s) {
                seen = true;
                break;
            }
        }
        if (!seen) unique.push_back(s);
    }
    if (unique.size() <= 2) {
        return static_cast<int>(std::ceil(1.5 * static_cast<double>(k_base)));
    }
    return k_base;
}

struct HistoryRecord {
    int step_index = 0;
    std::string obs_digest;
    std::string action_desc;
    std::string next_digest;
    bool ad_flag = false;
    double timestamp = 0.0;
};

class HistoryBuffer {
public:
    explicit HistoryBuffer(int k_base = 5) : k_base_(k_base) {
        if (k_base < 1) throw std::invalid_argument("k_base must be >= 1");
    }

    void push(HistoryRecord record) { entries_.push_back(std::move(record)); }
    void clear() { entries_.clear(); }

    int k_base() const { return k_base_; }
    size_t size() const { return entries_.size(); }
    const std::vector<HistoryRecord>& entries() const { return entries_; }

    int current_window() const {
        std::vector<std::string> recent;
        const size_t start = entries_.size() > static_cast<size_t>(k_base_)
                                 ? entries_.size() - static_cast<size_t>(k_base_)
                                 : 0;
        for (size_t i = start; i < entries_.size(); ++i) recent.push_back(entries_[i].next_digest);
        return adaptive_window(recent, k_base_);
    }

    // The last K_t entries, oldest first.
    std::vector<HistoryRecord> window() const {
        const size_t k = static_cast<size_t>(current_window());
        const size_t start = entries_.size() > k ? entries_.size() - k : 0;
        return std::vector<HistoryRecord>(entries_.begin() + static_cast<long>(start), entries_.end());
    }

private:
    int k_base_;
    std::vector<HistoryRecord> entries_;
};

} // namespace adscout
