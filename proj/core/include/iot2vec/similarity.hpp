#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iot2vec/embedding.hpp"
#include "iot2vec/matrix.hpp"

namespace iot2vec {

enum class Metric { Cosine, Euclidean };

/// u.v / (|u||v|). Throws DimensionMismatch on unequal sizes, ZeroVector when
/// either norm is zero. Accumulates in double.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

double euclidean_distance(std::span<const float> u, std::span<const float> v);

struct Neighbor {
    std::string token;
    double score;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Query token plus its nearest vocabulary tokens. For Cosine, scores are
/// descending cosines in [-1, 1]; for Euclidean, ascending distances.
/// Ties break lexicographically. The query itself is excluded.
struct NeighborList {
    std::string query;
    Metric metric = Metric::Cosine;
    std::vector<Neighbor> neighbors;
};

/// k is capped at V-1. Throws UnknownToken when the token is absent.
NeighborList top_k_neighbors(const EmbeddingModel& model, std::string_view token,
                             int k, Metric metric = Metric::Cosine);

/// V x V cosine matrix over input vectors: symmetric, unit diagonal.
MatD similarity_matrix(const EmbeddingModel& model);

/// Stored reference embeddings keyed by device-type label. Labels are unique;
/// all vectors share one dimension and must be finite and non-zero.
class DeviceTypeRegistry {
public:
    void add(std::string label, std::vector<float> embedding);

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const float> embedding_of(const std::string& label) const;
    const std::map<std::string, std::vector<float>>& entries() const noexcept {
        return entries_;
    }

    /// One entry per distinct label: the centroid of the member tokens'
    /// input vectors. token_to_label may label a subset of the vocabulary.
    static DeviceTypeRegistry from_centroids(
        const EmbeddingModel& model,
        const std::map<std::string, std::string>& token_to_label);

    /// Same binary container family as the model file, with a type-label block.
    void save(std::ostream& sink) const;
    static DeviceTypeRegistry load(std::istream& source);
    void save_file(const std::string& path) const;
    static DeviceTypeRegistry load_file(const std::string& path);

private:
    std::map<std::string, std::vector<float>> entries_;  // sorted by label
    std::size_t dim_ = 0;
};

struct ClassificationResult {
    bool identified = false;
    std::string best_type;  // argmax candidate (lexicographic on score ties)
    double best_score = 0.0;
    double threshold = 0.0;
    std::vector<Neighbor> candidate_scores;  // every registry entry, best first
};

/// Scores the new embedding against every stored reference; Identified when
/// the best cosine clears the threshold, otherwise Unknown with the best
/// candidate reported. Throws EmptyRegistry / DimensionMismatch.
ClassificationResult identify_device_type(const DeviceTypeRegistry& registry,
                                          std::span<const float> new_embedding,
                                          double threshold);

/// Trains from scratch on a corpus containing the new device's sessions and
/// returns the new token's vector. Throws UnknownToken when the device never
/// fires in the corpus.
std::vector<float> embed_new_device(const Corpus& corpus_with_new_device,
                                    const TrainingConfig& config,
                                    std::string_view new_token);

/// "('M017', 0.49945521354675293)" -- one neighbor per line.
std::string format_neighbor_list(const NeighborList& list);
std::string neighbor_list_json(const NeighborList& list);
std::string classification_json(const ClassificationResult& result);

}  // namespace iot2vec
