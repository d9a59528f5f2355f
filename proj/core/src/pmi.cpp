#include "iot2vec/pmi.hpp"

#include <cmath>
#include <limits>

#include "iot2vec/errors.hpp"
#include "iot2vec/sessionizer.hpp"

namespace iot2vec {

PmiMatrix pmi_oracle(const Corpus& corpus, int window) {
    if (window < 1) throw ConfigInvalid("window must be >= 1");
    PmiMatrix result;
    result.vocab = build_vocab(corpus, 1);
    const auto v = result.vocab.size();

    // Directed co-occurrence counts with the full (un-shrunk) window.
    Mat<std::uint64_t> counts(v, v, 0);
    std::uint64_t total_pairs = 0;
    for (const auto& session : corpus.sessions) {
        std::vector<std::uint32_t> ids;
        ids.reserve(session.tokens.size());
        for (const auto& token : session.tokens)
            ids.push_back(*result.vocab.find(token));
        const auto len = static_cast<std::ptrdiff_t>(ids.size());
        for (std::ptrdiff_t pos = 0; pos < len; ++pos) {
            for (std::ptrdiff_t off = -window; off <= window; ++off) {
                if (off == 0) continue;
                const std::ptrdiff_t ctx = pos + off;
                if (ctx < 0 || ctx >= len) continue;
                counts(ids[pos], ids[ctx]) += 1;
                ++total_pairs;
            }
        }
    }

    std::vector<std::uint64_t> marginals(v, 0);
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < v; ++j) marginals[i] += counts(i, j);

    result.values = MatD(v, v, 0.0);
    double minimum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
            if (counts(i, j) == 0 || marginals[i] == 0 || marginals[j] == 0)
                continue;
            const double pmi =
                std::log(static_cast<double>(counts(i, j)) *
                         static_cast<double>(total_pairs) /
                         (static_cast<double>(marginals[i]) *
                          static_cast<double>(marginals[j])));
            result.values(i, j) = pmi;
            minimum = std::min(minimum, pmi);
        }
    }
    if (!std::isfinite(minimum)) minimum = 0.0;  // no co-occurrences at all
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < v; ++j)
            if (counts(i, j) == 0) result.values(i, j) = minimum;
    return result;
}

}  // namespace iot2vec
