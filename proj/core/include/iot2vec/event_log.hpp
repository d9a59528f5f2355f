#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iot2vec/time.hpp"

namespace iot2vec {

/// Sensor family, inferred from the id's leading alphabetic prefix.
/// Unrecognized prefixes land in Other with the prefix preserved, so ids like
/// "MA202" stay distinguishable from plain motion sensors.
struct SensorKind {
    enum class Tag {
        Motion,              // M...
        Door,                // D...
        Item,                // I...
        Shake,               // SH...
        Fan,                 // F...
        ExperimentalSwitch,  // E...
        Other,
    };

    Tag tag = Tag::Other;
    std::string other_prefix;  // set only when tag == Other

    friend bool operator==(const SensorKind&, const SensorKind&) = default;
    friend auto operator<=>(const SensorKind&, const SensorKind&) = default;

    /// "Motion", "Door", ... or "Other(MA)".
    std::string to_string() const;
};

std::string_view to_string(SensorKind::Tag tag);

/// Accepts the spellings used by CLI flags ("motion", "door", "item",
/// "shake", "fan", "switch", "other"), case-insensitive.
std::optional<SensorKind::Tag> kind_tag_from_string(std::string_view name);

/// Deterministic prefix-based classification: the longest leading run of
/// alphabetic characters selects the kind ("M016" -> Motion,
/// "SH2" -> Shake, "ZZ9" -> Other("ZZ")).
SensorKind infer_sensor_kind(std::string_view sensor_id);

/// One timestamped log record: "date time sensor state [annotation...]".
struct SensorEvent {
    Timestamp timestamp;
    std::string sensor_id;
    std::string state;
    std::string annotation;  // empty when the line had no trailing text

    friend bool operator==(const SensorEvent&, const SensorEvent&) = default;
};

/// Canonical single-space serialization. The first four fields reproduce the
/// parsed text byte-for-byte; the annotation is appended when present.
std::string format_event(const SensorEvent& event);

/// A sensor passes iff (id in allowed_ids) or
/// (kind in allowed_kinds and id not in blocked_ids).
struct FilterPolicy {
    std::set<SensorKind::Tag> allowed_kinds;
    std::set<std::string> allowed_ids;
    std::set<std::string> blocked_ids;

    bool passes(std::string_view sensor_id) const;

    static FilterPolicy allow_all();
    /// The six named sensor families; everything classified Other (light,
    /// gyro, temperature, ...) is dropped unless explicitly allowed by id.
    static FilterPolicy standard_sensors();
};

enum class ParseMode { Strict, Lenient };

struct ParseReport {
    std::size_t total_lines = 0;
    std::size_t parsed = 0;
    std::size_t skipped = 0;    // blank and comment lines
    std::size_t malformed = 0;  // counted (lenient) or fatal (strict)

    friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

struct ParsedLog {
    std::vector<SensorEvent> events;  // file order
    ParseReport report;
};

/// Parses one whitespace-separated record: date, time, sensor id, state,
/// optional annotation tail. Returns nullopt for blank lines and lines whose
/// first non-space character is '#'. Throws MalformedLine (tagged with
/// line_no) when fewer than four fields are present or the date/time does not
/// parse.
std::optional<SensorEvent> parse_line(std::string_view line,
                                      std::size_t line_no = 0);

/// Streaming pass over a log. Strict mode aborts on the first malformed line;
/// lenient mode counts it and continues.
ParsedLog parse_log(std::istream& source, ParseMode mode = ParseMode::Lenient);

/// Same, reading from a file. A missing/unreadable file is an IoError, which
/// is distinct from any parse failure.
ParsedLog parse_log_file(const std::string& path,
                         ParseMode mode = ParseMode::Lenient);

/// Order-preserving subsequence of events whose sensors pass the policy.
std::vector<SensorEvent> filter_events(std::span<const SensorEvent> events,
                                       const FilterPolicy& policy);

/// Keeps, per sensor, only events that change that sensor's state: the first
/// event of each sensor and every event whose state differs from the
/// previously kept one. Global order is preserved. Input must be
/// time-ordered (ties keep file order).
std::vector<SensorEvent> extract_transitions(std::span<const SensorEvent> events);

}  // namespace iot2vec
