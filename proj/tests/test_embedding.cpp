#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "iot2vec/embedding.hpp"
#include "iot2vec/errors.hpp"
#include "iot2vec/similarity.hpp"
#include "support/test_util.hpp"

using namespace iot2vec;

TEST_CASE("build_vocab: counts and deterministic indexing") {
    const auto corpus = testutil::corpus_from({{"a", "b", "a"}});
    const auto vocab = build_vocab(corpus, 1);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.token(0) == "a");  // count 2
    CHECK(vocab.token(1) == "b");  // count 1
    CHECK(vocab.count(0) == 2);
    CHECK(vocab.count(1) == 1);
    CHECK(vocab.find("a") == 0u);
    CHECK(vocab.find("missing") == std::nullopt);
}

TEST_CASE("build_vocab: min_count filters") {
    const auto corpus = testutil::corpus_from({{"a", "b", "a"}});
    const auto vocab = build_vocab(corpus, 2);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.token(0) == "a");
}

TEST_CASE("build_vocab: nothing survives") {
    const auto corpus = testutil::corpus_from({{"a"}, {"b"}});
    CHECK_THROWS_AS(build_vocab(corpus, 3), EmptyVocabulary);
}

TEST_CASE("build_vocab: count ties break lexicographically") {
    const auto corpus = testutil::corpus_from({{"z", "m", "a"}});
    const auto vocab = build_vocab(corpus, 1);
    CHECK(vocab.token(0) == "a");
    CHECK(vocab.token(1) == "m");
    CHECK(vocab.token(2) == "z");
}

TEST_CASE("sgns_pair_loss: zero vectors give 2 ln 2") {
    const std::vector<double> zero(8, 0.0);
    const std::vector<std::vector<double>> negatives = {zero};
    const auto grads = sgns_pair_loss_and_grad(zero, zero, negatives);
    CHECK(grads.loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("sgns_pair_loss: aligned pair with large dot is near-zero loss") {
    std::vector<double> v(8, 2.0);  // dot = 32, sigmoid ~ 1
    const std::vector<std::vector<double>> negatives = {
        std::vector<double>(8, -2.0)};
    const auto grads = sgns_pair_loss_and_grad(v, v, negatives);
    // Positive term only: -log sigmoid(32) ~ 1e-14; the negative sample has
    // dot -32, contributing ~0 as well.
    CHECK(grads.loss < 1e-10);
}

TEST_CASE("sgns_pair_loss: dimension mismatch") {
    const std::vector<double> a(4, 0.1), b(5, 0.1);
    CHECK_THROWS_AS(
        sgns_pair_loss_and_grad(a, b, std::span<const std::vector<double>>{}),
        DimensionMismatch);
    const std::vector<std::vector<double>> negatives = {std::vector<double>(3)};
    CHECK_THROWS_AS(sgns_pair_loss_and_grad(a, a, negatives),
                    DimensionMismatch);
}

namespace {

// Central finite differences of the SGNS loss, the independent oracle for
// the analytic gradients.
double loss_only(const std::vector<double>& center,
                 const std::vector<double>& context,
                 const std::vector<std::vector<double>>& negatives) {
    return sgns_pair_loss_and_grad(center, context, negatives).loss;
}

void check_grad_against_fd(std::uint64_t seed, int dim, int negative_count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> center(dim), context(dim);
    for (auto& x : center) x = dist(rng);
    for (auto& x : context) x = dist(rng);
    std::vector<std::vector<double>> negatives(negative_count,
                                               std::vector<double>(dim));
    for (auto& n : negatives)
        for (auto& x : n) x = dist(rng);

    const auto grads = sgns_pair_loss_and_grad(center, context, negatives);
    const double h = 1e-4;
    auto check_component = [&](std::vector<double>& vec, std::size_t j,
                               double analytic) {
        const double saved = vec[j];
        vec[j] = saved + h;
        const double up = loss_only(center, context, negatives);
        vec[j] = saved - h;
        const double down = loss_only(center, context, negatives);
        vec[j] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        CHECK(std::abs(numeric - analytic) / scale < 1e-4);
    };
    for (int j = 0; j < dim; ++j) {
        check_component(center, static_cast<std::size_t>(j), grads.center[j]);
        check_component(context, static_cast<std::size_t>(j), grads.context[j]);
        for (int k = 0; k < negative_count; ++k)
            check_component(negatives[k], static_cast<std::size_t>(j),
                            grads.negatives[k][j]);
    }
}

}  // namespace

TEST_CASE("sgns_pair_loss: analytic gradients match finite differences") {
    for (std::uint64_t seed = 0; seed < 25; ++seed)
        check_grad_against_fd(seed, 10, 1 + static_cast<int>(seed % 5));
}

TEST_CASE("train_skipgram: clusters that co-occur end up closer") {
    // Tokens {a*} always co-occur, {b*} always co-occur, never across; the
    // PMI oracle is positive within groups and minimal across, so cosine must
    // rank within-group pairs above cross-group ones.
    const auto corpus = testutil::two_cluster_corpus(2, 600, 7);
    TrainingConfig config;
    config.dim = 16;
    config.epochs = 10;
    config.seed = 3;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    const double same = cosine(model.vector_of("a0"), model.vector_of("a1"));
    const double cross = cosine(model.vector_of("a0"), model.vector_of("b0"));
    CHECK(same > cross);
}

TEST_CASE("train_skipgram: single-token vocabulary trains with zero pairs") {
    const auto corpus = testutil::corpus_from({{"lonely"}});
    TrainingConfig config;
    config.dim = 8;
    config.epochs = 3;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    REQUIRE(model.vocab.size() == 1);
    for (const float x : model.input_vectors.data()) CHECK(std::isfinite(x));
    REQUIRE(model.loss_trace.size() == 3);
    for (const double l : model.loss_trace) CHECK(l == 0.0);
}

TEST_CASE("train_skipgram: deterministic mode reproduces bytes") {
    const auto corpus = testutil::two_cluster_corpus(3, 200, 21);
    TrainingConfig config;
    config.dim = 12;
    config.epochs = 4;
    config.seed = 99;
    config.deterministic = true;

    std::stringstream first, second;
    save_model(train_skipgram(corpus, config), first);
    save_model(train_skipgram(corpus, config), second);
    CHECK(first.str() == second.str());
}

TEST_CASE("train_skipgram: loss trend non-increasing after epoch 2 (5% band)") {
    const auto corpus = testutil::two_cluster_corpus(5, 800, 13);
    TrainingConfig config;
    config.dim = 16;
    config.epochs = 12;
    config.seed = 5;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    REQUIRE(model.loss_trace.size() == 12);
    for (std::size_t e = 2; e < model.loss_trace.size(); ++e)
        CHECK(model.loss_trace[e] <= model.loss_trace[e - 1] * 1.05);
}

TEST_CASE("train_skipgram: vectors finite with bounded norms") {
    const auto corpus = testutil::two_cluster_corpus(5, 500, 31);
    TrainingConfig config;
    config.dim = 24;
    config.epochs = 15;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
        double norm = 0.0;
        for (const float x : model.input_vectors.row(i)) {
            CHECK(std::isfinite(x));
            norm += static_cast<double>(x) * x;
        }
        CHECK(std::sqrt(norm) <= 1e3);
    }
}

TEST_CASE("train_skipgram: parallel mode keeps statistical structure") {
    const auto corpus = testutil::two_cluster_corpus(3, 600, 17);
    TrainingConfig config;
    config.dim = 16;
    config.epochs = 10;
    config.threads = 2;
    const auto model = train_skipgram(corpus, config);
    const double same = cosine(model.vector_of("a0"), model.vector_of("a1"));
    const double cross = cosine(model.vector_of("a0"), model.vector_of("b1"));
    CHECK(same > cross);
    for (const float x : model.input_vectors.data()) CHECK(std::isfinite(x));
}

TEST_CASE("train_skipgram: subsampling drops work but keeps the vocabulary") {
    // One token dominates; with subsampling on, training still converges and
    // every token keeps a finite vector.
    std::vector<std::vector<std::string>> sessions;
    for (int s = 0; s < 300; ++s)
        sessions.push_back({"hub", "a", "hub", "b", "hub"});
    const auto corpus = testutil::corpus_from(std::move(sessions));
    TrainingConfig config;
    config.dim = 8;
    config.epochs = 3;
    config.subsample_threshold = 1e-3;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    CHECK(model.vocab.size() == 3);
    CHECK(model.vocab.find("hub").has_value());
    for (const float x : model.input_vectors.data()) CHECK(std::isfinite(x));
}

TEST_CASE("train_skipgram: config validation") {
    const auto corpus = testutil::corpus_from({{"a", "b"}});
    TrainingConfig config;
    config.dim = 0;
    CHECK_THROWS_AS(train_skipgram(corpus, config), ConfigInvalid);
    config = TrainingConfig{};
    config.final_lr = 0.5;  // above initial_lr
    CHECK_THROWS_AS(train_skipgram(corpus, config), ConfigInvalid);
}

TEST_CASE("model io: byte-exact round trip") {
    const auto corpus = testutil::two_cluster_corpus(3, 150, 23);
    TrainingConfig config;
    config.dim = 10;
    config.epochs = 3;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);

    std::stringstream buffer;
    save_model(model, buffer);
    const auto reread = load_model(buffer);
    CHECK(reread.vocab == model.vocab);
    CHECK(reread.input_vectors == model.input_vectors);
    CHECK(reread.output_vectors == model.output_vectors);
    CHECK(reread.config == model.config);
    CHECK(reread.loss_trace == model.loss_trace);

    std::stringstream again;
    save_model(reread, again);
    CHECK(again.str() == buffer.str());
}

TEST_CASE("model io: truncation and version checks") {
    const auto corpus = testutil::corpus_from({{"a", "b", "a", "b"}});
    TrainingConfig config;
    config.dim = 4;
    config.epochs = 1;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);

    std::stringstream buffer;
    save_model(model, buffer);
    const std::string bytes = buffer.str();

    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_model(truncated), CorruptModelFile);

    std::string wrong_version = bytes;
    wrong_version[8] = 9;  // format version lives after the 8-byte magic
    std::istringstream versioned(wrong_version);
    CHECK_THROWS_AS(load_model(versioned), VersionMismatch);

    std::istringstream garbage("NOTAMODELFILE_____");
    CHECK_THROWS_AS(load_model(garbage), CorruptModelFile);
}

TEST_CASE("export_embeddings_text: one row per token") {
    const auto corpus = testutil::corpus_from({{"a", "b", "a", "b"}});
    TrainingConfig config;
    config.dim = 3;
    config.epochs = 1;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    std::stringstream out;
    export_embeddings_text(model, out);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(out, line)) {
        std::istringstream fields(line);
        std::string token;
        double value;
        fields >> token;
        int components = 0;
        while (fields >> value) ++components;
        CHECK(components == 3);
        ++rows;
    }
    CHECK(rows == 2);
}
