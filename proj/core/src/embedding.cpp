#include "iot2vec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "binary_io.hpp"
#include "iot2vec/errors.hpp"
#include "iot2vec/sessionizer.hpp"

namespace iot2vec {
namespace {

constexpr std::string_view kModelMagic = "IOT2VECM";
constexpr std::uint32_t kModelVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^power table; one uniform draw per sample.
class NegativeSampler {
public:
    NegativeSampler(const Vocabulary& vocab, double power) {
        cumulative_.reserve(vocab.size());
        double total = 0.0;
        for (std::uint32_t i = 0; i < vocab.size(); ++i) {
            total += std::pow(static_cast<double>(vocab.count(i)), power);
            cumulative_.push_back(total);
        }
    }

    // Draws from unigram^power; resamples a collision with `exclude` up to
    // 8 times and reports failure (caller skips the sample) after that.
    template <typename Rng>
    std::int64_t draw(Rng& rng, std::uint32_t exclude) const {
        for (int attempt = 0; attempt < 8; ++attempt) {
            const double u = std::uniform_real_distribution<double>(
                0.0, cumulative_.back())(rng);
            const auto it =
                std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            const auto idx = static_cast<std::uint32_t>(
                std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                         static_cast<std::ptrdiff_t>(
                                             cumulative_.size() - 1)));
            if (idx != exclude) return idx;
        }
        return -1;
    }

private:
    std::vector<double> cumulative_;
};

struct IndexedCorpus {
    std::vector<std::vector<std::uint32_t>> sessions;  // vocab indices, OOV dropped
    std::uint64_t token_count = 0;
};

IndexedCorpus index_corpus(const Corpus& corpus, const Vocabulary& vocab) {
    IndexedCorpus indexed;
    indexed.sessions.reserve(corpus.sessions.size());
    for (const auto& session : corpus.sessions) {
        std::vector<std::uint32_t> ids;
        ids.reserve(session.tokens.size());
        for (const auto& token : session.tokens)
            if (auto id = vocab.find(token)) ids.push_back(*id);
        indexed.token_count += ids.size();
        indexed.sessions.push_back(std::move(ids));
    }
    return indexed;
}

struct EpochStats {
    double loss_sum = 0.0;
    std::uint64_t pair_count = 0;
};

// One SGD pass over a slice of sessions. Matrices are shared; workers > 1
// update them without locks (asynchronous SGD).
class Trainer {
public:
    Trainer(const TrainingConfig& config, const Vocabulary& vocab,
            MatF& input, MatF& output, const NegativeSampler& sampler,
            std::uint64_t total_token_visits)
        : cfg_(config), vocab_(vocab), input_(input), output_(output),
          sampler_(sampler), total_token_visits_(total_token_visits) {}

    EpochStats run(std::span<const std::vector<std::uint32_t>> sessions,
                   int epoch, int worker, std::uint64_t visits_before_epoch,
                   std::uint64_t visits_offset_in_epoch) {
        std::mt19937_64 rng(cfg_.seed + 0x9E3779B97F4A7C15ULL * (epoch + 1) +
                            static_cast<std::uint64_t>(worker) * 0x100000001B3ULL);
        const int dim = cfg_.dim;
        const bool dynamic = cfg_.dynamic_window && !cfg_.deterministic;
        std::vector<double> grad_center(dim);
        EpochStats stats;
        std::uint64_t visited = 0;

        for (const auto& session : sessions) {
            std::vector<std::uint32_t> tokens;
            if (cfg_.subsample_threshold > 0.0) {
                tokens.reserve(session.size());
                for (const auto id : session) {
                    const double freq = static_cast<double>(vocab_.count(id)) /
                                        static_cast<double>(vocab_.total_count());
                    const double keep =
                        (std::sqrt(freq / cfg_.subsample_threshold) + 1.0) *
                        cfg_.subsample_threshold / freq;
                    if (keep >= 1.0 ||
                        std::uniform_real_distribution<double>(0, 1)(rng) < keep)
                        tokens.push_back(id);
                }
            } else {
                tokens.assign(session.begin(), session.end());
            }

            const auto len = static_cast<std::ptrdiff_t>(tokens.size());
            for (std::ptrdiff_t pos = 0; pos < len; ++pos) {
                const double progress =
                    static_cast<double>(visits_before_epoch +
                                        visits_offset_in_epoch + visited) /
                    static_cast<double>(total_token_visits_);
                const double lr = std::max(
                    cfg_.final_lr,
                    cfg_.initial_lr -
                        (cfg_.initial_lr - cfg_.final_lr) * progress);
                ++visited;

                int window = cfg_.window;
                if (dynamic)
                    window = std::uniform_int_distribution<int>(1, cfg_.window)(rng);

                const std::uint32_t center = tokens[pos];
                float* center_row = input_.row(center).data();

                for (std::ptrdiff_t off = -window; off <= window; ++off) {
                    if (off == 0) continue;
                    const std::ptrdiff_t ctx_pos = pos + off;
                    if (ctx_pos < 0 || ctx_pos >= len) continue;
                    const std::uint32_t context = tokens[ctx_pos];

                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    double pair_loss = 0.0;

                    for (int k = 0; k <= cfg_.negatives; ++k) {
                        std::uint32_t target;
                        double label;
                        if (k == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            const std::int64_t drawn = sampler_.draw(rng, context);
                            if (drawn < 0) continue;  // collision storm, skip
                            target = static_cast<std::uint32_t>(drawn);
                            label = 0.0;
                        }
                        float* target_row = output_.row(target).data();

                        double dot = 0.0;
                        for (int j = 0; j < dim; ++j)
                            dot += static_cast<double>(center_row[j]) * target_row[j];
                        const double sig = sigmoid(dot);
                        pair_loss -= label > 0.5 ? std::log(std::max(sig, 1e-12))
                                                 : std::log(std::max(1.0 - sig, 1e-12));
                        const double g = (label - sig) * lr;

                        for (int j = 0; j < dim; ++j) {
                            grad_center[j] += g * target_row[j];
                            target_row[j] += static_cast<float>(g * center_row[j]);
                        }
                    }
                    for (int j = 0; j < dim; ++j)
                        center_row[j] += static_cast<float>(grad_center[j]);

                    stats.loss_sum += pair_loss;
                    stats.pair_count += 1;
                }
            }
        }
        return stats;
    }

private:
    const TrainingConfig& cfg_;
    const Vocabulary& vocab_;
    MatF& input_;
    MatF& output_;
    const NegativeSampler& sampler_;
    std::uint64_t total_token_visits_;
};

void init_matrices(MatF& input, MatF& output, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uniform(-0.5f / static_cast<float>(dim),
                                                  0.5f / static_cast<float>(dim));
    for (float& v : input.data()) v = uniform(rng);
    for (float& v : output.data()) v = 0.0f;
}

}  // namespace

void TrainingConfig::validate() const {
    if (dim < 1) throw ConfigInvalid("dim must be >= 1");
    if (window < 1) throw ConfigInvalid("window must be >= 1");
    if (negatives < 1) throw ConfigInvalid("negatives must be >= 1");
    if (epochs < 1) throw ConfigInvalid("epochs must be >= 1");
    if (!(final_lr > 0.0) || final_lr > initial_lr)
        throw ConfigInvalid("need 0 < final_lr <= initial_lr");
    if (unigram_power < 0.0) throw ConfigInvalid("unigram_power must be >= 0");
    if (subsample_threshold < 0.0)
        throw ConfigInvalid("subsample_threshold must be >= 0");
    if (threads < 1) throw ConfigInvalid("threads must be >= 1");
}

std::span<const float> EmbeddingModel::vector_of(std::string_view token) const {
    const auto index = vocab.find(token);
    if (!index) throw UnknownToken(std::string(token));
    return input_vectors.row(*index);
}

EmbeddingModel train_skipgram(const Corpus& corpus, const TrainingConfig& config) {
    config.validate();
    EmbeddingModel model;
    model.config = config;
    model.vocab = build_vocab(corpus, config.min_count);

    const std::size_t v = model.vocab.size();
    const auto dim = static_cast<std::size_t>(config.dim);
    model.input_vectors = MatF(v, dim);
    model.output_vectors = MatF(v, dim);
    init_matrices(model.input_vectors, model.output_vectors, config.dim,
                  config.seed);

    const IndexedCorpus indexed = index_corpus(corpus, model.vocab);
    const std::uint64_t total_visits = std::max<std::uint64_t>(
        1, indexed.token_count * static_cast<std::uint64_t>(config.epochs));

    const NegativeSampler sampler(model.vocab, config.unigram_power);
    Trainer trainer(config, model.vocab, model.input_vectors,
                    model.output_vectors, sampler, total_visits);

    const int workers = config.deterministic ? 1 : config.threads;
    std::uint64_t visits_done = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        EpochStats stats;
        if (workers <= 1) {
            stats = trainer.run(indexed.sessions, epoch, 0, visits_done, 0);
        } else {
            // Contiguous session slices per worker; lock-free shared updates.
            std::vector<EpochStats> partial(workers);
            std::vector<std::thread> pool;
            const std::size_t n = indexed.sessions.size();
            std::size_t begin = 0;
            std::uint64_t offset = 0;
            for (int w = 0; w < workers; ++w) {
                const std::size_t end = n * (w + 1) / workers;
                std::span<const std::vector<std::uint32_t>> slice(
                    indexed.sessions.data() + begin, end - begin);
                std::uint64_t slice_tokens = 0;
                for (const auto& s : slice) slice_tokens += s.size();
                pool.emplace_back([&, w, slice, offset] {
                    partial[w] = trainer.run(slice, epoch, w, visits_done, offset);
                });
                offset += slice_tokens;
                begin = end;
            }
            for (auto& t : pool) t.join();
            for (const auto& p : partial) {
                stats.loss_sum += p.loss_sum;
                stats.pair_count += p.pair_count;
            }
        }
        visits_done += indexed.token_count;
        model.loss_trace.push_back(
            stats.pair_count == 0 ? 0.0
                                  : stats.loss_sum /
                                        static_cast<double>(stats.pair_count));
    }
    return model;
}

SgnsGradients sgns_pair_loss_and_grad(
    std::span<const double> center_vec, std::span<const double> context_vec,
    std::span<const std::vector<double>> negative_vecs) {
    const std::size_t dim = center_vec.size();
    if (context_vec.size() != dim)
        throw DimensionMismatch(dim, context_vec.size());
    for (const auto& neg : negative_vecs)
        if (neg.size() != dim) throw DimensionMismatch(dim, neg.size());

    SgnsGradients out;
    out.center.assign(dim, 0.0);
    out.context.assign(dim, 0.0);
    out.negatives.assign(negative_vecs.size(), std::vector<double>(dim, 0.0));

    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) dot += center_vec[j] * context_vec[j];
    const double sig = sigmoid(dot);
    out.loss = -std::log(std::max(sig, 1e-300));
    for (std::size_t j = 0; j < dim; ++j) {
        out.center[j] += (sig - 1.0) * context_vec[j];
        out.context[j] = (sig - 1.0) * center_vec[j];
    }

    for (std::size_t k = 0; k < negative_vecs.size(); ++k) {
        double ndot = 0.0;
        for (std::size_t j = 0; j < dim; ++j)
            ndot += center_vec[j] * negative_vecs[k][j];
        const double nsig = sigmoid(ndot);  // sigma(u'.v); loss term -log(1-nsig)
        out.loss -= std::log(std::max(1.0 - nsig, 1e-300));
        for (std::size_t j = 0; j < dim; ++j) {
            out.center[j] += nsig * negative_vecs[k][j];
            out.negatives[k][j] = nsig * center_vec[j];
        }
    }
    return out;
}

void save_model(const EmbeddingModel& model, std::ostream& sink) {
    using namespace detail;
    sink.write(kModelMagic.data(), kModelMagic.size());
    write_le<std::uint32_t>(sink, kModelVersion);

    const auto& c = model.config;
    write_le<std::int32_t>(sink, c.dim);
    write_le<std::int32_t>(sink, c.window);
    write_le<std::int32_t>(sink, c.negatives);
    write_le<std::int32_t>(sink, c.epochs);
    write_le<double>(sink, c.initial_lr);
    write_le<double>(sink, c.final_lr);
    write_le<std::uint32_t>(sink, c.min_count);
    write_le<double>(sink, c.subsample_threshold);
    write_le<std::uint64_t>(sink, c.seed);
    write_le<double>(sink, c.unigram_power);
    write_le<std::uint8_t>(sink, c.dynamic_window ? 1 : 0);
    write_le<std::uint8_t>(sink, c.deterministic ? 1 : 0);
    write_le<std::int32_t>(sink, c.threads);

    write_le<std::uint32_t>(sink, static_cast<std::uint32_t>(model.vocab.size()));
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
        write_string(sink, model.vocab.token(i));
        write_le<std::uint64_t>(sink, model.vocab.count(i));
    }

    write_f32_array(sink, model.input_vectors.data());
    write_f32_array(sink, model.output_vectors.data());

    write_le<std::uint32_t>(sink,
                            static_cast<std::uint32_t>(model.loss_trace.size()));
    for (const double l : model.loss_trace) write_le<double>(sink, l);
    if (!sink) throw IoError("write failure while saving model");
}

EmbeddingModel load_model(std::istream& source) {
    using namespace detail;
    expect_magic(source, kModelMagic);
    const auto version = read_le<std::uint32_t>(source);
    if (version != kModelVersion) throw VersionMismatch(version, kModelVersion);

    EmbeddingModel model;
    auto& c = model.config;
    c.dim = read_le<std::int32_t>(source);
    c.window = read_le<std::int32_t>(source);
    c.negatives = read_le<std::int32_t>(source);
    c.epochs = read_le<std::int32_t>(source);
    c.initial_lr = read_le<double>(source);
    c.final_lr = read_le<double>(source);
    c.min_count = read_le<std::uint32_t>(source);
    c.subsample_threshold = read_le<double>(source);
    c.seed = read_le<std::uint64_t>(source);
    c.unigram_power = read_le<double>(source);
    c.dynamic_window = read_le<std::uint8_t>(source) != 0;
    c.deterministic = read_le<std::uint8_t>(source) != 0;
    c.threads = read_le<std::int32_t>(source);
    if (c.dim < 1) throw CorruptModelFile("non-positive dimension");

    const auto v = read_le<std::uint32_t>(source);
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    counts.reserve(v);
    for (std::uint32_t i = 0; i < v; ++i) {
        std::string token = read_string(source);
        const auto count = read_le<std::uint64_t>(source);
        counts.emplace_back(std::move(token), count);
    }
    model.vocab = Vocabulary::from_counts(std::move(counts), c.min_count);
    if (model.vocab.size() != v)
        throw CorruptModelFile("vocabulary entries below their own min_count");

    model.input_vectors = MatF(v, static_cast<std::size_t>(c.dim));
    model.output_vectors = MatF(v, static_cast<std::size_t>(c.dim));
    read_f32_array(source, model.input_vectors.data());
    read_f32_array(source, model.output_vectors.data());

    const auto traces = read_le<std::uint32_t>(source);
    if (traces > (1u << 24)) throw CorruptModelFile("implausible loss trace length");
    model.loss_trace.resize(traces);
    for (double& l : model.loss_trace) l = read_le<double>(source);
    return model;
}

void save_model_file(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_model(model, out);
}

EmbeddingModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_model(in);
}

void export_embeddings_text(const EmbeddingModel& model, std::ostream& sink) {
    char buf[48];
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
        sink << model.vocab.token(i);
        for (const float value : model.input_vectors.row(i)) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(value));
            sink << ' ' << buf;
        }
        sink << '\n';
    }
    if (!sink) throw IoError("write failure while exporting embeddings");
}

}  // namespace iot2vec
