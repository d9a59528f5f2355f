#include "iot2vec/event_log.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "iot2vec/errors.hpp"

namespace iot2vec {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r';
}

// Splits on whitespace runs; keeps at most `max_fields`, with the last field
// receiving the untouched remainder (the annotation tail).
std::vector<std::string_view> split_fields(std::string_view line,
                                           std::size_t max_fields) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size() && fields.size() < max_fields) {
        while (i < line.size() && is_space(line[i])) ++i;
        if (i >= line.size()) break;
        if (fields.size() == max_fields - 1) {
            std::size_t end = line.size();
            while (end > i && is_space(line[end - 1])) --end;
            fields.push_back(line.substr(i, end - i));
            return fields;
        }
        std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

}  // namespace

std::string_view to_string(SensorKind::Tag tag) {
    switch (tag) {
        case SensorKind::Tag::Motion: return "Motion";
        case SensorKind::Tag::Door: return "Door";
        case SensorKind::Tag::Item: return "Item";
        case SensorKind::Tag::Shake: return "Shake";
        case SensorKind::Tag::Fan: return "Fan";
        case SensorKind::Tag::ExperimentalSwitch: return "ExperimentalSwitch";
        case SensorKind::Tag::Other: return "Other";
    }
    return "Other";
}

std::string SensorKind::to_string() const {
    if (tag == Tag::Other) return "Other(" + other_prefix + ")";
    return std::string(iot2vec::to_string(tag));
}

std::optional<SensorKind::Tag> kind_tag_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "motion") return SensorKind::Tag::Motion;
    if (lower == "door") return SensorKind::Tag::Door;
    if (lower == "item") return SensorKind::Tag::Item;
    if (lower == "shake") return SensorKind::Tag::Shake;
    if (lower == "fan") return SensorKind::Tag::Fan;
    if (lower == "switch" || lower == "experimentalswitch")
        return SensorKind::Tag::ExperimentalSwitch;
    if (lower == "other") return SensorKind::Tag::Other;
    return std::nullopt;
}

SensorKind infer_sensor_kind(std::string_view sensor_id) {
    std::size_t n = 0;
    while (n < sensor_id.size() &&
           std::isalpha(static_cast<unsigned char>(sensor_id[n])))
        ++n;
    const std::string_view prefix = sensor_id.substr(0, n);
    if (prefix == "M") return {SensorKind::Tag::Motion, {}};
    if (prefix == "D") return {SensorKind::Tag::Door, {}};
    if (prefix == "I") return {SensorKind::Tag::Item, {}};
    if (prefix == "SH") return {SensorKind::Tag::Shake, {}};
    if (prefix == "F") return {SensorKind::Tag::Fan, {}};
    if (prefix == "E") return {SensorKind::Tag::ExperimentalSwitch, {}};
    return {SensorKind::Tag::Other, std::string(prefix)};
}

std::string format_event(const SensorEvent& event) {
    std::string out = event.timestamp.format();
    out += ' ';
    out += event.sensor_id;
    out += ' ';
    out += event.state;
    if (!event.annotation.empty()) {
        out += ' ';
        out += event.annotation;
    }
    return out;
}

bool FilterPolicy::passes(std::string_view sensor_id) const {
    const std::string id(sensor_id);
    if (allowed_ids.contains(id)) return true;
    if (blocked_ids.contains(id)) return false;
    return allowed_kinds.contains(infer_sensor_kind(sensor_id).tag);
}

FilterPolicy FilterPolicy::allow_all() {
    FilterPolicy policy;
    policy.allowed_kinds = {
        SensorKind::Tag::Motion,  SensorKind::Tag::Door,
        SensorKind::Tag::Item,    SensorKind::Tag::Shake,
        SensorKind::Tag::Fan,     SensorKind::Tag::ExperimentalSwitch,
        SensorKind::Tag::Other,
    };
    return policy;
}

FilterPolicy FilterPolicy::standard_sensors() {
    FilterPolicy policy = allow_all();
    policy.allowed_kinds.erase(SensorKind::Tag::Other);
    return policy;
}

std::optional<SensorEvent> parse_line(std::string_view line,
                                      std::size_t line_no) {
    // Strip a CRLF tail before looking at content.
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::size_t first = 0;
    while (first < line.size() && is_space(line[first])) ++first;
    if (first >= line.size()) return std::nullopt;       // blank
    if (line[first] == '#') return std::nullopt;         // comment

    const auto fields = split_fields(line, 5);
    if (fields.size() < 4)
        throw MalformedLine(line_no, "expected at least 4 fields, got " +
                                         std::to_string(fields.size()));

    SensorEvent event;
    try {
        event.timestamp = Timestamp::parse(fields[0], fields[1]);
    } catch (const Error& e) {
        throw MalformedLine(line_no, e.what());
    }
    event.sensor_id = std::string(fields[2]);
    event.state = std::string(fields[3]);
    if (fields.size() == 5) event.annotation = std::string(fields[4]);
    return event;
}

ParsedLog parse_log(std::istream& source, ParseMode mode) {
    ParsedLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        ++log.report.total_lines;
        try {
            auto event = parse_line(line, line_no);
            if (event) {
                log.events.push_back(std::move(*event));
                ++log.report.parsed;
            } else {
                ++log.report.skipped;
            }
        } catch (const MalformedLine&) {
            if (mode == ParseMode::Strict) throw;
            ++log.report.malformed;
        }
    }
    if (source.bad()) throw IoError("read failure while parsing log");
    return log;
}

ParsedLog parse_log_file(const std::string& path, ParseMode mode) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open log file: " + path);
    return parse_log(in, mode);
}

std::vector<SensorEvent> filter_events(std::span<const SensorEvent> events,
                                       const FilterPolicy& policy) {
    std::vector<SensorEvent> out;
    out.reserve(events.size());
    for (const auto& event : events)
        if (policy.passes(event.sensor_id)) out.push_back(event);
    return out;
}

std::vector<SensorEvent> extract_transitions(
    std::span<const SensorEvent> events) {
    std::vector<SensorEvent> out;
    out.reserve(events.size());
    std::unordered_map<std::string, std::string> last_state;
    for (const auto& event : events) {
        auto it = last_state.find(event.sensor_id);
        if (it == last_state.end()) {
            last_state.emplace(event.sensor_id, event.state);
            out.push_back(event);
        } else if (it->second != event.state) {
            it->second = event.state;
            out.push_back(event);
        }
    }
    return out;
}

}  // namespace iot2vec
