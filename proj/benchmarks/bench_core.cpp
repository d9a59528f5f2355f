// Microbenchmarks for the hot paths: parsing, sessionization, training,
// neighbor scan and a t-SNE iteration step.

#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "iot2vec/embedding.hpp"
#include "iot2vec/event_log.hpp"
#include "iot2vec/projection.hpp"
#include "iot2vec/sessionizer.hpp"
#include "iot2vec/similarity.hpp"
#include "iot2vec/synth.hpp"

namespace {

using namespace iot2vec;

std::string make_log(int days) {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = days;
    std::ostringstream out;
    generate_synthetic_log(spec, out);
    return out.str();
}

Corpus make_corpus(int days) {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = days;
    const auto events = generate_synthetic_events(spec);
    SessionizerConfig config;
    config.gap = SessionizerConfig::gap_from_seconds(60);
    return sessionize(extract_transitions(events), config);
}

void BM_ParseLog(benchmark::State& state) {
    const std::string text = make_log(static_cast<int>(state.range(0)));
    std::size_t lines = 0;
    for (auto _ : state) {
        std::istringstream in(text);
        const auto log = parse_log(in);
        lines = log.report.parsed;
        benchmark::DoNotOptimize(log.events.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(lines) *
                            state.iterations());
}
BENCHMARK(BM_ParseLog)->Arg(7)->Arg(30);

void BM_Sessionize(benchmark::State& state) {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = static_cast<int>(state.range(0));
    const auto events = generate_synthetic_events(spec);
    SessionizerConfig config;
    config.gap = SessionizerConfig::gap_from_seconds(60);
    config.min_session_len = 1;
    for (auto _ : state) {
        auto corpus = sessionize(events, config);
        benchmark::DoNotOptimize(corpus.sessions.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events.size()) *
                            state.iterations());
}
BENCHMARK(BM_Sessionize)->Arg(7)->Arg(30);

void BM_TrainSkipgram(benchmark::State& state) {
    const Corpus corpus = make_corpus(7);
    TrainingConfig config;
    config.dim = static_cast<int>(state.range(0));
    config.epochs = 2;
    config.deterministic = true;
    for (auto _ : state) {
        auto model = train_skipgram(corpus, config);
        benchmark::DoNotOptimize(model.input_vectors.data().data());
    }
}
BENCHMARK(BM_TrainSkipgram)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TopKNeighbors(benchmark::State& state) {
    const Corpus corpus = make_corpus(7);
    TrainingConfig config;
    config.dim = 100;
    config.epochs = 2;
    config.deterministic = true;
    const auto model = train_skipgram(corpus, config);
    for (auto _ : state) {
        auto list = top_k_neighbors(model, "M015", 10);
        benchmark::DoNotOptimize(list.neighbors.data());
    }
}
BENCHMARK(BM_TopKNeighbors);

void BM_TsneIteration(benchmark::State& state) {
    const auto v = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);
    MatD points(v, 30);
    for (auto& x : points.data()) x = dist(rng);
    const MatD p = tsne_joint_probs(points, 5.0);
    MatD y(v, 2);
    for (auto& x : y.data()) x = dist(rng) * 1e-4;
    for (auto _ : state) {
        auto [kl, grad] = tsne_kl_and_grad(p, y);
        benchmark::DoNotOptimize(kl);
        benchmark::DoNotOptimize(grad.data().data());
    }
}
BENCHMARK(BM_TsneIteration)->Arg(50)->Arg(200);

void BM_PcaReduce(benchmark::State& state) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist(0.0, 1.0);
    MatD data(static_cast<std::size_t>(state.range(0)), 100);
    for (auto& x : data.data()) x = dist(rng);
    for (auto _ : state) {
        auto result = pca_reduce(data, 30);
        benchmark::DoNotOptimize(result.projected.data().data());
    }
}
BENCHMARK(BM_PcaReduce)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
