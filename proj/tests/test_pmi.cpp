#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iot2vec/embedding.hpp"
#include "iot2vec/pmi.hpp"
#include "iot2vec/similarity.hpp"
#include "support/test_util.hpp"

using namespace iot2vec;

TEST_CASE("pmi_oracle: single pair session") {
    const auto corpus = testutil::corpus_from({{"a", "b"}});
    const auto pmi = pmi_oracle(corpus, 1);
    REQUIRE(pmi.vocab.size() == 2);
    const auto a = *pmi.vocab.find("a");
    const auto b = *pmi.vocab.find("b");
    // Two directed pairs total: (a,b) and (b,a).
    CHECK(pmi.values(a, b) == doctest::Approx(std::log(2.0)));
    CHECK(pmi.values(a, b) == doctest::Approx(pmi.values(b, a)));
}

TEST_CASE("pmi_oracle: never co-occurring tokens get the matrix minimum") {
    const auto corpus =
        testutil::corpus_from({{"a", "b"}, {"c", "d"}, {"a", "b"}});
    const auto pmi = pmi_oracle(corpus, 2);
    const auto a = *pmi.vocab.find("a");
    const auto c = *pmi.vocab.find("c");
    double minimum = pmi.values(0, 0);
    for (std::size_t i = 0; i < pmi.vocab.size(); ++i)
        for (std::size_t j = 0; j < pmi.vocab.size(); ++j)
            minimum = std::min(minimum, pmi.values(i, j));
    CHECK(pmi.values(a, c) == minimum);
    // The rarer c-d pair has the larger PMI; a-c never co-occurs at all.
    CHECK(pmi.values(a, c) <= pmi.values(a, *pmi.vocab.find("b")));
    CHECK(pmi.values(*pmi.vocab.find("c"), *pmi.vocab.find("d")) >
          pmi.values(a, *pmi.vocab.find("b")));
}

TEST_CASE("pmi_oracle: uniform independent tokens give PMI near zero") {
    // 5000 sessions x 20 tokens = 100k tokens drawn iid uniform over 10 types.
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick(0, 9);
    std::vector<std::vector<std::string>> sessions;
    for (int s = 0; s < 5000; ++s) {
        std::vector<std::string> tokens;
        for (int t = 0; t < 20; ++t)
            tokens.push_back("t" + std::to_string(pick(rng)));
        sessions.push_back(std::move(tokens));
    }
    const auto corpus = testutil::corpus_from(std::move(sessions));
    const auto pmi = pmi_oracle(corpus, 2);
    for (std::size_t i = 0; i < pmi.vocab.size(); ++i)
        for (std::size_t j = 0; j < pmi.vocab.size(); ++j)
            CHECK(std::abs(pmi.values(i, j)) < 0.1);
}

TEST_CASE("pmi_oracle: window rule matches training windowing (edge truncation)") {
    // Session [a b c] with window 1: directed pairs (a,b),(b,a),(b,c),(c,b).
    const auto corpus = testutil::corpus_from({{"a", "b", "c"}});
    const auto pmi = pmi_oracle(corpus, 1);
    const auto a = *pmi.vocab.find("a");
    const auto c = *pmi.vocab.find("c");
    double minimum = pmi.values(0, 0);
    for (std::size_t i = 0; i < pmi.vocab.size(); ++i)
        for (std::size_t j = 0; j < pmi.vocab.size(); ++j)
            minimum = std::min(minimum, pmi.values(i, j));
    CHECK(pmi.values(a, c) == minimum);  // distance 2 > window
}

TEST_CASE("embedding cosine tracks oracle PMI on the two-cluster corpus") {
    const auto corpus = testutil::two_cluster_corpus(5, 1500, 42);
    TrainingConfig config;
    config.dim = 16;
    config.epochs = 10;
    config.seed = 42;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    const auto pmi = pmi_oracle(corpus, config.window);

    std::vector<double> cosines, pmis;
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
        for (std::uint32_t j = i + 1; j < model.vocab.size(); ++j) {
            cosines.push_back(cosine(model.input_vectors.row(i),
                                     model.input_vectors.row(j)));
            const auto pi = *pmi.vocab.find(model.vocab.token(i));
            const auto pj = *pmi.vocab.find(model.vocab.token(j));
            pmis.push_back(pmi.values(pi, pj));
        }
    }
    CHECK(testutil::spearman(cosines, pmis) >= 0.5);
}
