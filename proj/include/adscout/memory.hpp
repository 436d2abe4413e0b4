#pragma once

#include "adscout/bundle.hpp"

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace adscout {

// ---------------------------------------------------------------------------
// Ports

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual size_t dimension() const = 0;
    // Returns an L2-normalized vector. Throws on backend failure (retriable)
    // or on text that embeds to the zero vector.
    virtual std::vector<float> embed(const std::string& text) = 0;
};

// Deterministic local embedder: hashed bag of tokens with sign hashing.
// Exists so the whole pipeline runs offline while preserving the property
// that texts sharing vocabulary score higher cosine than unrelated texts.
class HashedBagEmbedder : public TextEmbedder {
public:
    explicit HashedBagEmbedder(size_t dim = 256) : dim_(dim) {}
    size_t dimension() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override;

private:
    size_t dim_;
};

struct TrajectoryStep {
    std::string action;       // canonical action descriptor
    std::string widget_class; // class or region kind acted on
    std::string widget_text;  // text / content description / caption
};

class TrajectorySummarizer {
public:
    virtual ~TrajectorySummarizer() = default;
    virtual std::string summarize(const std::vector<TrajectoryStep>& trajectory,
                                  const std::string& ad_type) = 0;
};

// Fallback and CI summarizer: fills the fixed sentence template from the
// trajectory's widget texts.
class TemplateSummarizer : public TrajectorySummarizer {
public:
    std::string summarize(const std::vector<TrajectoryStep>& trajectory,
                          const std::string& ad_type) override;
};

// ---------------------------------------------------------------------------
// Experiences

struct Experience {
    std::string fingerprint; // canonical serialization of the triggering state
    std::vector<float> embedding;
    std::string summary;
    std::string source_app;
    std::vector<TrajectoryStep> trajectory;
    int64_t created_at = 0;
};

struct RetrievalHit {
    Experience experience;
    double similarity = 0.0;
};

// Full canonical fingerprint text of a state (the embedded representation).
std::string state_fingerprint_text(const UiState& state);

double cosine(const std::vector<float>& u, const std::vector<float>& v);

std::string summarize_trajectory(const std::vector<TrajectoryStep>& trajectory,
                                 TrajectorySummarizer& summarizer,
                                 const std::string& ad_type = "");

// Cross-app experience repository. Many readers, serialized writers; a
// retrieval concurrent with prune sees the pre- or post-prune snapshot.
class ExperienceStore {
public:
    explicit ExperienceStore(size_t dimension = 256) : dim_(dimension) {}
    ExperienceStore(const ExperienceStore& other);
    ExperienceStore& operator=(const ExperienceStore& other);

    void store(const Experience& experience);

    // Exact mode scores every entry; ANN mode collects LSH candidates and
    // rescores them exactly, falling back to a full scan when the candidate
    // set is smaller than k.
    std::vector<RetrievalHit> retrieve(const std::vector<float>& query_embedding, size_t k) const;
    std::vector<RetrievalHit> retrieve_state(const UiState& state, TextEmbedder& embedder,
                                             size_t k) const;

    // Greedy dedup in created_at order: an entry survives iff its cosine to
    // every earlier survivor is < tau.
    void prune(double tau);

    void enable_ann(bool on);
    bool ann_enabled() const { return ann_enabled_; }

    size_t size() const;
    std::vector<Experience> snapshot() const;
    size_t dimension() const { return dim_; }

    void save(const std::string& path) const;       // compacted rewrite
    void append_to_log(const std::string& path, const Experience& experience) const;
    static ExperienceStore load(const std::string& path);

private:
    struct LshIndex {
        size_t tables = 0;
        size_t bits = 0;
        std::vector<float> hyperplanes; // (tables*bits) x dim
        std::vector<std::unordered_map<uint64_t, std::vector<size_t>>> buckets;
    };

    void rebuild_matrix_locked();
    void rebuild_ann_locked();
    void insert_ann_locked(size_t index);
    uint64_t signature_locked(const float* vec, size_t table) const;

    size_t dim_;
    std::vector<Experience> entries_;
    std::vector<float> matrix_; // row-major entry embeddings
    bool ann_enabled_ = false;
    LshIndex lsh_;
    mutable std::shared_mutex mutex_;
};

} // namespace adscout
