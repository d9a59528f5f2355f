#include "iot2vec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "binary_io.hpp"
#include "iot2vec/errors.hpp"
#include "iot2vec/sessionizer.hpp"
#include <nlohmann/json.hpp>

namespace iot2vec {
namespace {

constexpr std::string_view kRegistryMagic = "IOT2VECR";
constexpr std::uint32_t kRegistryVersion = 1;

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) throw DimensionMismatch(u.size(), v.size());
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * static_cast<double>(v[i]);
        nu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
        nv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    }
    if (nu == 0.0 || nv == 0.0)
        throw ZeroVector("cosine undefined for a zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

// %.17g round-trips doubles exactly; matches the neighbor printout style.
std::string format_score(double score) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", score);
    return buf;
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
    return cosine_impl(u, v);
}

double cosine(std::span<const double> u, std::span<const double> v) {
    return cosine_impl(u, v);
}

double euclidean_distance(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw DimensionMismatch(u.size(), v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

NeighborList top_k_neighbors(const EmbeddingModel& model, std::string_view token,
                             int k, Metric metric) {
    if (k < 1) throw ConfigInvalid("k must be >= 1");
    const auto query = model.vocab.find(token);
    if (!query) throw UnknownToken(std::string(token));

    NeighborList list;
    list.query = std::string(token);
    list.metric = metric;

    const auto query_row = model.input_vectors.row(*query);
    std::vector<Neighbor> scored;
    scored.reserve(model.vocab.size());
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
        if (i == *query) continue;
        const auto row = model.input_vectors.row(i);
        const double score = metric == Metric::Cosine
                                 ? cosine(query_row, row)
                                 : euclidean_distance(query_row, row);
        scored.push_back({model.vocab.token(i), score});
    }
    const bool ascending = metric == Metric::Euclidean;
    std::sort(scored.begin(), scored.end(),
              [ascending](const Neighbor& a, const Neighbor& b) {
                  if (a.score != b.score)
                      return ascending ? a.score < b.score : a.score > b.score;
                  return a.token < b.token;
              });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                            scored.size());
    list.neighbors.assign(scored.begin(),
                          scored.begin() + static_cast<std::ptrdiff_t>(take));
    return list;
}

MatD similarity_matrix(const EmbeddingModel& model) {
    const auto v = model.vocab.size();
    MatD sim(v, v, 0.0);
    for (std::size_t i = 0; i < v; ++i) {
        sim(i, i) = 1.0;
        for (std::size_t j = i + 1; j < v; ++j) {
            const double score =
                cosine(model.input_vectors.row(i), model.input_vectors.row(j));
            sim(i, j) = score;
            sim(j, i) = score;
        }
    }
    return sim;
}

void DeviceTypeRegistry::add(std::string label, std::vector<float> embedding) {
    if (label.empty()) throw ConfigInvalid("registry label must be non-empty");
    if (entries_.contains(label))
        throw ConfigInvalid("duplicate registry label: " + label);
    if (embedding.empty()) throw ConfigInvalid("registry vector must be non-empty");
    if (dim_ != 0 && embedding.size() != dim_)
        throw DimensionMismatch(dim_, embedding.size());
    double norm = 0.0;
    for (const float x : embedding) {
        if (!std::isfinite(x))
            throw ConfigInvalid("registry vector has non-finite component");
        norm += static_cast<double>(x) * x;
    }
    if (norm == 0.0) throw ZeroVector("registry vector is all zero");
    dim_ = embedding.size();
    entries_.emplace(std::move(label), std::move(embedding));
}

std::span<const float> DeviceTypeRegistry::embedding_of(
    const std::string& label) const {
    auto it = entries_.find(label);
    if (it == entries_.end()) throw UnknownToken(label);
    return it->second;
}

DeviceTypeRegistry DeviceTypeRegistry::from_centroids(
    const EmbeddingModel& model,
    const std::map<std::string, std::string>& token_to_label) {
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
    const auto dim = model.input_vectors.cols();
    for (const auto& [token, label] : token_to_label) {
        const auto index = model.vocab.find(token);
        if (!index) continue;  // labels may cover devices absent from this model
        auto& [sum, n] = sums[label];
        sum.resize(dim, 0.0);
        const auto row = model.input_vectors.row(*index);
        for (std::size_t j = 0; j < dim; ++j) sum[j] += row[j];
        n += 1;
    }
    DeviceTypeRegistry registry;
    for (const auto& [label, entry] : sums) {
        std::vector<float> centroid(dim);
        for (std::size_t j = 0; j < dim; ++j)
            centroid[j] = static_cast<float>(entry.first[j] /
                                             static_cast<double>(entry.second));
        registry.add(label, std::move(centroid));
    }
    return registry;
}

void DeviceTypeRegistry::save(std::ostream& sink) const {
    using namespace detail;
    sink.write(kRegistryMagic.data(), kRegistryMagic.size());
    write_le<std::uint32_t>(sink, kRegistryVersion);
    write_le<std::uint32_t>(sink, static_cast<std::uint32_t>(dim_));
    write_le<std::uint32_t>(sink, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [label, vec] : entries_) {
        write_string(sink, label);
        write_f32_array(sink, vec);
    }
    if (!sink) throw IoError("write failure while saving registry");
}

DeviceTypeRegistry DeviceTypeRegistry::load(std::istream& source) {
    using namespace detail;
    expect_magic(source, kRegistryMagic);
    const auto version = read_le<std::uint32_t>(source);
    if (version != kRegistryVersion)
        throw VersionMismatch(version, kRegistryVersion);
    const auto dim = read_le<std::uint32_t>(source);
    const auto n = read_le<std::uint32_t>(source);
    DeviceTypeRegistry registry;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string label = read_string(source);
        std::vector<float> vec(dim);
        read_f32_array(source, vec);
        registry.add(std::move(label), std::move(vec));
    }
    return registry;
}

void DeviceTypeRegistry::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save(out);
}

DeviceTypeRegistry DeviceTypeRegistry::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open registry file: " + path);
    return load(in);
}

ClassificationResult identify_device_type(const DeviceTypeRegistry& registry,
                                          std::span<const float> new_embedding,
                                          double threshold) {
    if (registry.size() == 0) throw EmptyRegistry();
    if (new_embedding.size() != registry.dim())
        throw DimensionMismatch(registry.dim(), new_embedding.size());

    ClassificationResult result;
    result.threshold = threshold;
    for (const auto& [label, vec] : registry.entries()) {
        const double score = cosine(new_embedding, std::span<const float>(vec));
        result.candidate_scores.push_back({label, score});
    }
    // Best first; exact score ties keep lexicographic label order (the map
    // iterates sorted, stable_sort preserves it).
    std::stable_sort(result.candidate_scores.begin(),
                     result.candidate_scores.end(),
                     [](const Neighbor& a, const Neighbor& b) {
                         return a.score > b.score;
                     });
    result.best_type = result.candidate_scores.front().token;
    result.best_score = result.candidate_scores.front().score;
    result.identified = result.best_score >= threshold;
    return result;
}

std::vector<float> embed_new_device(const Corpus& corpus_with_new_device,
                                    const TrainingConfig& config,
                                    std::string_view new_token) {
    const EmbeddingModel model = train_skipgram(corpus_with_new_device, config);
    const auto row = model.vector_of(new_token);  // throws UnknownToken
    return {row.begin(), row.end()};
}

std::string format_neighbor_list(const NeighborList& list) {
    std::string out;
    for (const auto& n : list.neighbors) {
        out += "('" + n.token + "', " + format_score(n.score) + ")\n";
    }
    return out;
}

std::string neighbor_list_json(const NeighborList& list) {
    nlohmann::json doc;
    doc["query"] = list.query;
    doc["metric"] = list.metric == Metric::Cosine ? "cosine" : "euclidean";
    doc["neighbors"] = nlohmann::json::array();
    for (const auto& n : list.neighbors)
        doc["neighbors"].push_back({{"token", n.token}, {"score", n.score}});
    return doc.dump();
}

std::string classification_json(const ClassificationResult& result) {
    nlohmann::json doc;
    doc["verdict"] = result.identified ? "Identified" : "Unknown";
    doc["best_type"] = result.best_type;
    doc["best_score"] = result.best_score;
    doc["threshold"] = result.threshold;
    doc["candidates"] = nlohmann::json::array();
    for (const auto& c : result.candidate_scores)
        doc["candidates"].push_back({{"type", c.token}, {"score", c.score}});
    return doc.dump();
}

}  // namespace iot2vec
