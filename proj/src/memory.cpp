#include "adscout/memory.hpp"

#include "adscout/fingerprint.hpp"
#include "adscout/rng.hpp"
#include "adscout/vecops.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>

namespace adscout {

using nlohmann::json;

namespace {

constexpr size_t kLshTables = 16;
constexpr size_t kLshBits = 10;
constexpr uint64_t kLshSeed = 0x5eed5eed5eedULL;
constexpr double kUnitNormTolerance = 1e-6;

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    // Light plural folding keeps "apps" and "app" in the same bucket.
    for (auto& t : tokens) {
        if (t.size() > 3 && t.back() == 's') t.pop_back();
    }
    return tokens;
}

void l2_normalize(std::vector<float>& v) {
    double norm2 = 0.0;
    for (float x : v) norm2 += static_cast<double>(x) * x;
    if (norm2 <= 0.0) throw std::invalid_argument("vector embeds to zero");
    const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
    for (auto& x : v) x *= inv;
}

} // namespace

std::vector<float> HashedBagEmbedder::embed(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("cannot embed empty text");
    std::vector<float> v(dim_, 0.0f);
    for (const auto& token : tokenize(text)) {
        const uint64_t h = fnv1a64(token);
        const size_t idx = static_cast<size_t>(h % dim_);
        v[idx] += ((h >> 32) & 1) ? 1.0f : -1.0f;
    }
    l2_normalize(v);
    return v;
}

std::string state_fingerprint_text(const UiState& state) {
    return canonical_state_serialization(state);
}

double cosine(const std::vector<float>& u, const std::vector<float>& v) {
    if (u.size() != v.size() || u.empty()) throw std::invalid_argument("dimension mismatch");
    const double uu = vecops::dot(u.data(), u.data(), u.size());
    const double vv = vecops::dot(v.data(), v.data(), v.size());
    if (uu <= 0.0 || vv <= 0.0) throw std::invalid_argument("cosine of zero vector");
    const double uv = vecops::dot(u.data(), v.data(), u.size());
    return uv / std::sqrt(uu * vv);
}

std::string TemplateSummarizer::summarize(const std::vector<TrajectoryStep>& trajectory,
                                          const std::string& ad_type) {
    std::string joined;
    for (const auto& step : trajectory) {
        if (step.widget_text.empty()) continue;
        if (!joined.empty()) joined += ", ";
        joined += "'" + step.widget_text + "'";
    }
    if (joined.empty()) joined = "unlabeled elements";
    const std::string kind = ad_type.empty() ? "advertisement" : ad_type + " advertisement";
    std::string sentence = "Interacting with " + joined + " often triggers " + kind + " displays.";
    if (sentence.size() > 240) sentence = sentence.substr(0, 237) + "...";
    return sentence;
}

std::string summarize_trajectory(const std::vector<TrajectoryStep>& trajectory,
                                 TrajectorySummarizer& summarizer, const std::string& ad_type) {
    if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
    try {
        std::string out = summarizer.summarize(trajectory, ad_type);
        if (!out.empty()) return out;
    } catch (const std::exception&) {
        // fall through to the template
    }
    TemplateSummarizer fallback;
    return fallback.summarize(trajectory, ad_type);
}

// ---------------------------------------------------------------------------
// ExperienceStore

ExperienceStore::ExperienceStore(const ExperienceStore& other) {
    std::shared_lock lock(other.mutex_);
    dim_ = other.dim_;
    entries_ = other.entries_;
    matrix_ = other.matrix_;
    ann_enabled_ = other.ann_enabled_;
    lsh_ = other.lsh_;
}

ExperienceStore& ExperienceStore::operator=(const ExperienceStore& other) {
    if (this == &other) return *this;
    ExperienceStore copy(other);
    std::unique_lock lock(mutex_);
    dim_ = copy.dim_;
    entries_ = std::move(copy.entries_);
    matrix_ = std::move(copy.matrix_);
    ann_enabled_ = copy.ann_enabled_;
    lsh_ = std::move(copy.lsh_);
    return *this;
}

void ExperienceStore::store(const Experience& experience) {
    if (experience.embedding.size() != dim_) {
        throw std::invalid_argument("embedding dimension mismatch");
    }
    double norm2 = 0.0;
    for (float x : experience.embedding) norm2 += static_cast<double>(x) * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > kUnitNormTolerance) {
        throw std::invalid_argument("embedding is not unit-norm");
    }
    if (experience.summary.empty()) throw std::invalid_argument("summary must be non-empty");

    std::unique_lock lock(mutex_);
    entries_.push_back(experience);
    matrix_.insert(matrix_.end(), experience.embedding.begin(), experience.embedding.end());
    if (ann_enabled_) insert_ann_locked(entries_.size() - 1);
}

std::vector<RetrievalHit> ExperienceStore::retrieve(const std::vector<float>& query, size_t k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (query.size() != dim_) throw std::invalid_argument("query dimension mismatch");

    std::shared_lock lock(mutex_);
    if (entries_.empty()) return {};

    std::vector<size_t> candidates;
    bool exhaustive = true;
    if (ann_enabled_ && entries_.size() > k) {
        candidates.clear();
        std::vector<char> seen(entries_.size(), 0);
        for (size_t t = 0; t < lsh_.tables; ++t) {
            const uint64_t sig = signature_locked(query.data(), t);
            auto it = lsh_.buckets[t].find(sig);
            if (it == lsh_.buckets[t].end()) continue;
            for (size_t idx : it->second) {
                if (!seen[idx]) {
                    seen[idx] = 1;
                    candidates.push_back(idx);
                }
            }
        }
        exhaustive = candidates.size() < k; // too few collisions: rescan everything
    }
    if (exhaustive) {
        candidates.resize(entries_.size());
        for (size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    }

    std::vector<float> scores(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        scores[i] = vecops::dot(query.data(), matrix_.data() + candidates[i] * dim_, dim_);
    }

    std::vector<size_t> order(candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a] < candidates[b];
    });

    std::vector<RetrievalHit> hits;
    const size_t n = std::min(k, order.size());
    hits.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        hits.push_back(RetrievalHit{entries_[candidates[order[i]]], scores[order[i]]});
    }
    return hits;
}

std::vector<RetrievalHit> ExperienceStore::retrieve_state(const UiState& state, TextEmbedder& embedder,
                                                          size_t k) const {
    return retrieve(embedder.embed(state_fingerprint_text(state)), k);
}

void ExperienceStore::prune(double tau) {
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in (0,1]");
    std::unique_lock lock(mutex_);

    std::vector<size_t> order(entries_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return entries_[a].created_at < entries_[b].created_at;
    });

    std::vector<Experience> kept;
    std::vector<float> kept_matrix;
    std::vector<float> scores;
    for (size_t idx : order) {
        const float* emb = matrix_.data() + idx * dim_;
        bool redundant = false;
        const size_t kept_count = kept.size();
        if (kept_count > 0) {
            scores.resize(kept_count);
            vecops::batch_dot(emb, kept_matrix.data(), kept_count, dim_, scores.data());
            for (size_t j = 0; j < kept_count; ++j) {
                if (scores[j] >= static_cast<float>(tau)) {
                    redundant = true;
                    break;
                }
            }
        }
        if (!redundant) {
            kept.push_back(entries_[idx]);
            kept_matrix.insert(kept_matrix.end(), emb, emb + dim_);
        }
    }

    entries_ = std::move(kept);
    matrix_ = std::move(kept_matrix);
    if (ann_enabled_) rebuild_ann_locked();
}

void ExperienceStore::enable_ann(bool on) {
    std::unique_lock lock(mutex_);
    if (on == ann_enabled_) return;
    ann_enabled_ = on;
    if (on) rebuild_ann_locked();
}

size_t ExperienceStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<Experience> ExperienceStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

void ExperienceStore::rebuild_matrix_locked() {
    matrix_.clear();
    matrix_.reserve(entries_.size() * dim_);
    for (const auto& e : entries_) {
        matrix_.insert(matrix_.end(), e.embedding.begin(), e.embedding.end());
    }
}

void ExperienceStore::rebuild_ann_locked() {
    lsh_.tables = kLshTables;
    lsh_.bits = kLshBits;
    lsh_.hyperplanes.assign(lsh_.tables * lsh_.bits * dim_, 0.0f);
    Rng rng(kLshSeed);
    for (auto& x : lsh_.hyperplanes) {
        // Sum of uniforms, symmetric around zero; direction is all that matters.
        x = static_cast<float>(rng.unit() + rng.unit() + rng.unit() - 1.5);
    }
    lsh_.buckets.assign(lsh_.tables, {});
    for (size_t i = 0; i < entries_.size(); ++i) insert_ann_locked(i);
}

void ExperienceStore::insert_ann_locked(size_t index) {
    if (lsh_.buckets.size() != lsh_.tables || lsh_.hyperplanes.empty()) rebuild_ann_locked();
    const float* emb = matrix_.data() + index * dim_;
    for (size_t t = 0; t < lsh_.tables; ++t) {
        lsh_.buckets[t][signature_locked(emb, t)].push_back(index);
    }
}

uint64_t ExperienceStore::signature_locked(const float* vec, size_t table) const {
    uint64_t sig = 0;
    const float* planes = lsh_.hyperplanes.data() + table * lsh_.bits * dim_;
    for (size_t b = 0; b < lsh_.bits; ++b) {
        const float d = vecops::dot(vec, planes + b * dim_, dim_);
        sig = (sig << 1) | (d >= 0.0f ? 1u : 0u);
    }
    return sig;
}

// ---------------------------------------------------------------------------
// Persistence: line-delimited log, one experience per line after the header.

void ExperienceStore::save(const std::string& path) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write experience log '" + path + "'");
    out << json{{"format", "adscout-experience-log"}, {"version", 1}, {"dim", dim_}}.dump() << "\n";
    for (const auto& e : entries_) {
        json steps = json::array();
        for (const auto& s : e.trajectory) {
            steps.push_back(json{{"action", s.action}, {"class", s.widget_class}, {"text", s.widget_text}});
        }
        out << json{{"fingerprint", e.fingerprint}, {"embedding", e.embedding},
                    {"summary", e.summary},         {"source_app", e.source_app},
                    {"trajectory", steps},          {"created_at", e.created_at}}
                   .dump()
            << "\n";
    }
}

void ExperienceStore::append_to_log(const std::string& path, const Experience& e) const {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot append to experience log '" + path + "'");
    json steps = json::array();
    for (const auto& s : e.trajectory) {
        steps.push_back(json{{"action", s.action}, {"class", s.widget_class}, {"text", s.widget_text}});
    }
    out << json{{"fingerprint", e.fingerprint}, {"embedding", e.embedding},
                {"summary", e.summary},         {"source_app", e.source_app},
                {"trajectory", steps},          {"created_at", e.created_at}}
               .dump()
        << "\n";
}

ExperienceStore ExperienceStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read experience log '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty experience log");
    json header = json::parse(line);
    if (header.value("format", "") != "adscout-experience-log") {
        throw std::runtime_error(path + ": not an experience log");
    }
    ExperienceStore store(header.value("dim", 256));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json doc = json::parse(line);
        Experience e;
        e.fingerprint = doc.at("fingerprint").get<std::string>();
        e.embedding = doc.at("embedding").get<std::vector<float>>();
        e.summary = doc.at("summary").get<std::string>();
        e.source_app = doc.value("source_app", "");
        for (const auto& s : doc.value("trajectory", json::array())) {
            e.trajectory.push_back(TrajectoryStep{s.at("action").get<std::string>(),
                                                  s.at("class").get<std::string>(),
                                                  s.at("text").get<std::string>()});
        }
        e.created_at = doc.value("created_at", 0L);
        store.store(e);
    }
    return store;
}

} // namespace adscout
