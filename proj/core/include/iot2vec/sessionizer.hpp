#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "iot2vec/event_log.hpp"

namespace iot2vec {

enum class TokenScheme { IdOnly, IdAndState };

std::string_view to_string(TokenScheme scheme);

struct SessionizerConfig {
    std::chrono::microseconds gap{std::chrono::seconds(60)};
    int min_session_len = 2;      // 1-token sentences contribute no pairs
    bool collapse_repeats = false;
    TokenScheme scheme = TokenScheme::IdOnly;

    void validate() const;  // throws ConfigInvalid

    double gap_seconds() const {
        return std::chrono::duration<double>(gap).count();
    }
    static std::chrono::microseconds gap_from_seconds(double seconds);

    friend bool operator==(const SessionizerConfig&,
                           const SessionizerConfig&) = default;
};

/// One "sentence": the ordered device tokens fired within a gap-bounded
/// interval. Timing inside a session is discarded beyond order.
struct Session {
    std::vector<std::string> tokens;
    Timestamp start_time;
    Timestamp end_time;

    friend bool operator==(const Session&, const Session&) = default;
};

struct Corpus {
    std::vector<Session> sessions;
    SessionizerConfig config;
    std::uint64_t source_digest = 0;  // FNV-1a 64 over the input event lines

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Segments a time-ordered event stream: a new session starts at the first
/// event and whenever the gap since the previous event (of any sensor)
/// exceeds config.gap (strictly; == gap stays in the session). Sessions
/// shorter than min_session_len are dropped after optional repeat collapsing.
/// Empty input yields an empty corpus.
Corpus sessionize(std::span<const SensorEvent> events,
                  const SessionizerConfig& config);

struct CorpusStats {
    std::size_t session_count = 0;
    std::size_t token_count = 0;
    std::size_t vocab_size = 0;
    std::map<std::size_t, std::size_t> length_histogram;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats corpus_stats(const Corpus& corpus);

/// Plain-text corpus container: '#'-prefixed header lines (gap, scheme,
/// min_len, collapse, digest, session spans) followed by one session per
/// line as space-separated tokens. write -> read -> write is bit-exact.
void write_corpus(const Corpus& corpus, std::ostream& sink);
Corpus read_corpus(std::istream& source);  // throws CorruptCorpusFile

void write_corpus_file(const Corpus& corpus, const std::string& path);
Corpus read_corpus_file(const std::string& path);

}  // namespace iot2vec
