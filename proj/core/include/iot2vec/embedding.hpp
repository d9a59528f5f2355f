#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "iot2vec/matrix.hpp"
#include "iot2vec/vocab.hpp"

namespace iot2vec {

struct Corpus;

struct TrainingConfig {
    int dim = 100;
    int window = 5;      // max context distance in tokens
    int negatives = 5;   // negative samples per positive pair
    int epochs = 15;
    double initial_lr = 0.025;
    double final_lr = 1e-4;  // linear decay target
    std::uint32_t min_count = 1;
    double subsample_threshold = 0.0;  // 0 disables frequent-token downsampling
    std::uint64_t seed = 1;
    double unigram_power = 0.75;  // exponent of the negative-sampling distribution
    bool dynamic_window = true;   // uniform 1..window per center token
    bool deterministic = false;   // single worker, fixed draw order, full window
    int threads = 1;              // >1 is asynchronous lock-free SGD

    void validate() const;  // throws ConfigInvalid

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Trained skip-gram model. input_vectors holds the published embeddings;
/// output_vectors are the context weights, kept so training can resume and
/// the model file round-trips exactly.
struct EmbeddingModel {
    Vocabulary vocab;
    MatF input_vectors;   // V x dim
    MatF output_vectors;  // V x dim
    TrainingConfig config;
    std::vector<double> loss_trace;  // mean pair loss per epoch

    std::span<const float> vector_of(std::string_view token) const;  // throws UnknownToken
};

/// Skip-gram with negative sampling over the session corpus. With
/// config.deterministic the result is bit-reproducible for a fixed seed.
/// Throws EmptyVocabulary when no token survives min_count.
EmbeddingModel train_skipgram(const Corpus& corpus, const TrainingConfig& config);

/// Loss and exact analytic gradients for one positive pair against its
/// negative samples:
///   loss = -log sigmoid(context . center) - sum_k log sigmoid(-negative_k . center)
struct SgnsGradients {
    double loss = 0.0;
    std::vector<double> center;
    std::vector<double> context;
    std::vector<std::vector<double>> negatives;
};

SgnsGradients sgns_pair_loss_and_grad(
    std::span<const double> center_vec, std::span<const double> context_vec,
    std::span<const std::vector<double>> negative_vecs);  // throws DimensionMismatch

/// Versioned binary container: magic, format version, config block,
/// vocabulary block, two little-endian float32 matrices, loss trace.
void save_model(const EmbeddingModel& model, std::ostream& sink);
EmbeddingModel load_model(std::istream& source);  // CorruptModelFile / VersionMismatch

void save_model_file(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model_file(const std::string& path);

/// Interop export: "token v1 v2 ... vD", one row per line.
void export_embeddings_text(const EmbeddingModel& model, std::ostream& sink);

}  // namespace iot2vec
