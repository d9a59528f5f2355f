#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iot2vec {

struct Corpus;

/// Token <-> index bijection over the tokens that survive the min_count
/// threshold. Indices are assigned by descending count, ties broken
/// lexicographically, so the layout is deterministic.
class Vocabulary {
public:
    Vocabulary() = default;

    /// counts must already be filtered; used by build_vocab and load_model.
    static Vocabulary from_counts(
        std::vector<std::pair<std::string, std::uint64_t>> counts,
        std::uint32_t min_count);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(std::uint32_t index) const { return tokens_[index]; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    std::optional<std::uint32_t> find(std::string_view token) const;

    std::uint64_t count(std::uint32_t index) const { return counts_[index]; }
    std::uint64_t total_count() const noexcept { return total_count_; }
    std::uint32_t min_count() const noexcept { return min_count_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_ && a.counts_ == b.counts_ &&
               a.min_count_ == b.min_count_;
    }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::uint64_t total_count_ = 0;
    std::uint32_t min_count_ = 1;
};

/// Counts tokens over all sessions and drops those below min_count.
/// Throws EmptyVocabulary when nothing survives.
Vocabulary build_vocab(const Corpus& corpus, std::uint32_t min_count);

}  // namespace iot2vec
