#include "iot2vec/sessionizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "iot2vec/errors.hpp"

namespace iot2vec {
namespace {

std::uint64_t fnv1a64(std::uint64_t hash, std::string_view bytes) {
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

std::uint64_t digest_events(std::span<const SensorEvent> events) {
    std::uint64_t hash = kFnvOffset;
    for (const auto& event : events) {
        hash = fnv1a64(hash, format_event(event));
        hash = fnv1a64(hash, "\n");
    }
    return hash;
}

std::string make_token(const SensorEvent& event, TokenScheme scheme) {
    if (scheme == TokenScheme::IdAndState)
        return event.sensor_id + "_" + event.state;
    return event.sensor_id;
}

// Seconds with up to 6 decimals, trailing zeros trimmed ("60", "0.5").
std::string format_gap_seconds(std::chrono::microseconds gap) {
    const std::int64_t micros = gap.count();
    char buf[48];
    if (micros % 1'000'000 == 0) {
        std::snprintf(buf, sizeof(buf), "%lld",
                      static_cast<long long>(micros / 1'000'000));
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%lld.%06lld",
                  static_cast<long long>(micros / 1'000'000),
                  static_cast<long long>(micros % 1'000'000));
    std::string out = buf;
    while (out.back() == '0') out.pop_back();
    return out;
}

}  // namespace

std::string_view to_string(TokenScheme scheme) {
    return scheme == TokenScheme::IdOnly ? "IdOnly" : "IdAndState";
}

void SessionizerConfig::validate() const {
    if (gap.count() <= 0) throw ConfigInvalid("session gap must be > 0");
    if (min_session_len < 1) throw ConfigInvalid("min_session_len must be >= 1");
}

std::chrono::microseconds SessionizerConfig::gap_from_seconds(double seconds) {
    return std::chrono::microseconds(
        static_cast<std::int64_t>(std::llround(seconds * 1e6)));
}

Corpus sessionize(std::span<const SensorEvent> events,
                  const SessionizerConfig& config) {
    config.validate();
    Corpus corpus;
    corpus.config = config;
    corpus.source_digest = digest_events(events);
    if (events.empty()) return corpus;

    auto flush = [&](Session&& session) {
        if (config.collapse_repeats) {
            auto last = std::unique(session.tokens.begin(), session.tokens.end());
            session.tokens.erase(last, session.tokens.end());
        }
        if (session.tokens.size() >=
            static_cast<std::size_t>(config.min_session_len))
            corpus.sessions.push_back(std::move(session));
    };

    Session current;
    current.start_time = events.front().timestamp;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && events[i].timestamp - events[i - 1].timestamp > config.gap) {
            flush(std::move(current));
            current = Session{};
            current.start_time = events[i].timestamp;
        }
        current.tokens.push_back(make_token(events[i], config.scheme));
        current.end_time = events[i].timestamp;
    }
    flush(std::move(current));
    return corpus;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.session_count = corpus.sessions.size();
    std::set<std::string> vocab;
    for (const auto& session : corpus.sessions) {
        stats.token_count += session.tokens.size();
        stats.length_histogram[session.tokens.size()] += 1;
        vocab.insert(session.tokens.begin(), session.tokens.end());
    }
    stats.vocab_size = vocab.size();
    return stats;
}

void write_corpus(const Corpus& corpus, std::ostream& sink) {
    sink << "#gap=" << format_gap_seconds(corpus.config.gap) << '\n';
    sink << "#scheme=" << to_string(corpus.config.scheme) << '\n';
    sink << "#min_len=" << corpus.config.min_session_len << '\n';
    sink << "#collapse=" << (corpus.config.collapse_repeats ? 1 : 0) << '\n';
    {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(corpus.source_digest));
        sink << "#digest=" << buf << '\n';
    }
    sink << "#spans=";
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        if (i > 0) sink << ' ';
        const auto& s = corpus.sessions[i];
        sink << s.start_time.micros_since_epoch() << ':'
             << s.end_time.micros_since_epoch();
    }
    sink << '\n';
    for (const auto& session : corpus.sessions) {
        for (std::size_t i = 0; i < session.tokens.size(); ++i) {
            if (i > 0) sink << ' ';
            sink << session.tokens[i];
        }
        sink << '\n';
    }
    if (!sink) throw IoError("write failure while serializing corpus");
}

Corpus read_corpus(std::istream& source) {
    Corpus corpus;
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    bool saw_gap = false, saw_scheme = false, saw_digest = false,
         saw_spans = false;
    std::string line;
    std::size_t line_no = 0;
    bool in_header = true;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (in_header && !line.empty() && line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw CorruptCorpusFile(line_no, "header without '='");
            const std::string key = line.substr(1, eq - 1);
            const std::string value = line.substr(eq + 1);
            try {
                if (key == "gap") {
                    corpus.config.gap =
                        SessionizerConfig::gap_from_seconds(std::stod(value));
                    saw_gap = true;
                } else if (key == "scheme") {
                    if (value == "IdOnly")
                        corpus.config.scheme = TokenScheme::IdOnly;
                    else if (value == "IdAndState")
                        corpus.config.scheme = TokenScheme::IdAndState;
                    else
                        throw CorruptCorpusFile(line_no, "unknown scheme " + value);
                    saw_scheme = true;
                } else if (key == "min_len") {
                    corpus.config.min_session_len = std::stoi(value);
                } else if (key == "collapse") {
                    corpus.config.collapse_repeats = value == "1";
                } else if (key == "digest") {
                    corpus.source_digest = std::stoull(value, nullptr, 16);
                    saw_digest = true;
                } else if (key == "spans") {
                    saw_spans = true;
                    std::istringstream span_stream(value);
                    std::string item;
                    while (span_stream >> item) {
                        const auto colon = item.find(':');
                        if (colon == std::string::npos)
                            throw CorruptCorpusFile(line_no, "bad span " + item);
                        spans.emplace_back(std::stoll(item.substr(0, colon)),
                                           std::stoll(item.substr(colon + 1)));
                    }
                }
                // Unknown '#' keys are ignored for forward compatibility.
            } catch (const CorruptCorpusFile&) {
                throw;
            } catch (const std::exception&) {
                throw CorruptCorpusFile(line_no, "bad value for header " + key);
            }
            continue;
        }
        in_header = false;
        if (line.empty())
            throw CorruptCorpusFile(line_no, "empty session line");
        Session session;
        std::istringstream tokens(line);
        std::string token;
        while (tokens >> token) session.tokens.push_back(std::move(token));
        corpus.sessions.push_back(std::move(session));
    }
    if (source.bad()) throw IoError("read failure while parsing corpus");
    if (!saw_gap || !saw_scheme || !saw_digest)
        throw CorruptCorpusFile(line_no, "missing required header (gap/scheme/digest)");
    if (saw_spans && spans.size() != corpus.sessions.size())
        throw CorruptCorpusFile(
            line_no, "span count " + std::to_string(spans.size()) +
                         " does not match session count " +
                         std::to_string(corpus.sessions.size()));
    for (std::size_t i = 0; i < spans.size(); ++i) {
        corpus.sessions[i].start_time = Timestamp(spans[i].first);
        corpus.sessions[i].end_time = Timestamp(spans[i].second);
    }
    return corpus;
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_corpus(corpus, out);
}

Corpus read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    return read_corpus(in);
}

}  // namespace iot2vec
