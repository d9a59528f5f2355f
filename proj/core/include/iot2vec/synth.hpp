#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "iot2vec/event_log.hpp"

namespace iot2vec {

/// Synthetic smart-home model: residents walk room routines; entering a room
/// fires its motion sensors and, probabilistically, its device sensors as
/// paired transitions (ON/OFF, OPEN/CLOSE). Used by tests and the `synth`
/// subcommand to produce logs whose room structure is known exactly.
struct DeviceSpec {
    std::string id;
    SensorKind kind;  // defaults from the id prefix when built via make()

    static DeviceSpec make(std::string id);
};

struct RoomSpec {
    std::string name;
    std::vector<DeviceSpec> devices;
};

struct RoutineSpec {
    std::vector<std::string> room_sequence;
    // Uniform dwell range (seconds) per room in the sequence.
    std::vector<std::pair<double, double>> dwell_range_s;
    double device_fire_prob = 0.8;  // per non-motion device, per room visit
    double visits_per_day = 4.0;    // exponential inter-visit times
};

struct SyntheticHomeSpec {
    std::vector<RoomSpec> rooms;
    std::vector<RoutineSpec> routines;
    int days = 30;
    int residents = 2;
    double noise_per_hour = 0.5;  // spurious paired firings, device drawn uniformly
    std::uint64_t seed = 1;
    Timestamp start = Timestamp::from_civil(2009, 2, 6, 0, 0, 0);

    void validate() const;  // throws SpecInvalid

    /// device id -> room name, from the room declarations.
    std::map<std::string, std::string> ground_truth() const;

    /// Three-room home (kitchen / bathroom / bedroom, five sensors each)
    /// with one single-room routine per room.
    static SyntheticHomeSpec three_room_home();
};

/// Simulates the spec and writes events in the activity-log text format,
/// globally time-ordered. Byte-identical output for a fixed seed.
void generate_synthetic_log(const SyntheticHomeSpec& spec, std::ostream& sink);

std::vector<SensorEvent> generate_synthetic_events(const SyntheticHomeSpec& spec);

/// JSON (de)serialization of home specs for the `synth --spec` flag.
SyntheticHomeSpec load_home_spec_json(std::istream& source);
void save_home_spec_json(const SyntheticHomeSpec& spec, std::ostream& sink);

/// device id -> room name as a JSON object, for `eval --ground-truth`.
void save_ground_truth_json(const std::map<std::string, std::string>& labels,
                            std::ostream& sink);
std::map<std::string, std::string> load_ground_truth_json(std::istream& source);

}  // namespace iot2vec
