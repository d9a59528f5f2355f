#include "iot2vec/vocab.hpp"

#include <algorithm>
#include <map>

#include "iot2vec/errors.hpp"
#include "iot2vec/sessionizer.hpp"

namespace iot2vec {

Vocabulary Vocabulary::from_counts(
    std::vector<std::pair<std::string, std::uint64_t>> counts,
    std::uint32_t min_count) {
    std::erase_if(counts, [&](const auto& e) { return e.second < min_count; });
    // Descending count, ties lexicographic: deterministic index layout.
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.min_count_ = min_count;
    vocab.tokens_.reserve(counts.size());
    vocab.counts_.reserve(counts.size());
    for (auto& [token, count] : counts) {
        vocab.index_.emplace(token, static_cast<std::uint32_t>(vocab.tokens_.size()));
        vocab.tokens_.push_back(std::move(token));
        vocab.counts_.push_back(count);
        vocab.total_count_ += count;
    }
    return vocab;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocab(const Corpus& corpus, std::uint32_t min_count) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& session : corpus.sessions)
        for (const auto& token : session.tokens) counts[token] += 1;

    std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(),
                                                               counts.end());
    Vocabulary vocab = Vocabulary::from_counts(std::move(entries), min_count);
    if (vocab.size() == 0)
        throw EmptyVocabulary("no token reaches min_count " +
                              std::to_string(min_count));
    return vocab;
}

}  // namespace iot2vec
