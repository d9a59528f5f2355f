#include "iot2vec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "iot2vec/errors.hpp"

namespace iot2vec {
namespace {

constexpr double kSecondsPerDay = 86400.0;

std::pair<std::string, std::string> state_pair_for(const SensorKind& kind) {
    if (kind.tag == SensorKind::Tag::Door) return {"OPEN", "CLOSE"};
    return {"ON", "OFF"};
}

struct RawEvent {
    double t_seconds;  // offset from spec.start
    std::size_t seq;   // generation order, stable tie-break
    std::string sensor_id;
    std::string state;
};

}  // namespace

DeviceSpec DeviceSpec::make(std::string id) {
    DeviceSpec spec;
    spec.kind = infer_sensor_kind(id);
    spec.id = std::move(id);
    return spec;
}

void SyntheticHomeSpec::validate() const {
    if (rooms.empty()) throw SpecInvalid("at least one room required");
    if (days < 1) throw SpecInvalid("days must be >= 1");
    if (residents < 1) throw SpecInvalid("residents must be >= 1");
    if (noise_per_hour < 0.0) throw SpecInvalid("noise rate must be >= 0");

    std::set<std::string> room_names;
    std::set<std::string> device_ids;
    for (const auto& room : rooms) {
        if (room.name.empty()) throw SpecInvalid("room name must be non-empty");
        if (!room_names.insert(room.name).second)
            throw SpecInvalid("duplicate room name: " + room.name);
        for (const auto& device : room.devices) {
            if (device.id.empty()) throw SpecInvalid("device id must be non-empty");
            if (!device_ids.insert(device.id).second)
                throw SpecInvalid("duplicate device id: " + device.id);
        }
    }
    for (const auto& routine : routines) {
        if (routine.room_sequence.empty())
            throw SpecInvalid("routine must visit at least one room");
        if (routine.dwell_range_s.size() != routine.room_sequence.size())
            throw SpecInvalid("dwell ranges must match the room sequence");
        for (const auto& name : routine.room_sequence)
            if (!room_names.contains(name))
                throw SpecInvalid("routine references unknown room: " + name);
        for (const auto& [lo, hi] : routine.dwell_range_s)
            if (!(lo > 0.0) || hi < lo)
                throw SpecInvalid("dwell range must satisfy 0 < lo <= hi");
        if (routine.device_fire_prob < 0.0 || routine.device_fire_prob > 1.0)
            throw SpecInvalid("device_fire_prob must be in [0, 1]");
        if (!(routine.visits_per_day > 0.0))
            throw SpecInvalid("visits_per_day must be > 0");
    }
}

std::map<std::string, std::string> SyntheticHomeSpec::ground_truth() const {
    std::map<std::string, std::string> labels;
    for (const auto& room : rooms)
        for (const auto& device : room.devices) labels[device.id] = room.name;
    return labels;
}

SyntheticHomeSpec SyntheticHomeSpec::three_room_home() {
    SyntheticHomeSpec spec;
    auto room = [](std::string name, std::initializer_list<const char*> ids) {
        RoomSpec r;
        r.name = std::move(name);
        for (const char* id : ids) r.devices.push_back(DeviceSpec::make(id));
        return r;
    };
    spec.rooms = {
        room("kitchen", {"M015", "M016", "M017", "D008", "D009"}),
        room("bathroom", {"M038", "M039", "M040", "D005", "D006"}),
        room("bedroom", {"M007", "M008", "M009", "D010", "I003"}),
    };
    auto routine = [](const char* room_name, double dwell_lo, double dwell_hi,
                      double fire_prob, double visits) {
        RoutineSpec r;
        r.room_sequence = {room_name};
        r.dwell_range_s = {{dwell_lo, dwell_hi}};
        r.device_fire_prob = fire_prob;
        r.visits_per_day = visits;
        return r;
    };
    spec.routines = {
        routine("kitchen", 25, 45, 0.85, 6),
        routine("bathroom", 20, 40, 0.80, 5),
        routine("bedroom", 25, 50, 0.80, 4),
    };
    spec.days = 30;
    spec.residents = 2;
    spec.noise_per_hour = 0.5;
    spec.seed = 1;
    return spec;
}

std::vector<SensorEvent> generate_synthetic_events(const SyntheticHomeSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::map<std::string, const RoomSpec*> rooms_by_name;
    std::vector<const DeviceSpec*> all_devices;
    for (const auto& room : spec.rooms) {
        rooms_by_name[room.name] = &room;
        for (const auto& device : room.devices) all_devices.push_back(&device);
    }

    const double horizon = spec.days * kSecondsPerDay;
    std::vector<RawEvent> events;
    auto emit = [&](double t, const DeviceSpec& device, const std::string& state) {
        events.push_back({t, events.size(), device.id, state});
    };

    auto fire_pair = [&](const DeviceSpec& device, double t_on, double t_off) {
        const auto [on_state, off_state] = state_pair_for(device.kind);
        emit(t_on, device, on_state);
        emit(t_off, device, off_state);
    };

    // Residents execute each routine as an independent Poisson visit process.
    for (int resident = 0; resident < spec.residents; ++resident) {
        for (const auto& routine : spec.routines) {
            const double mean_gap = kSecondsPerDay / routine.visits_per_day;
            std::exponential_distribution<double> inter_visit(1.0 / mean_gap);
            double t = inter_visit(rng);
            while (t < horizon) {
                double room_entry = t;
                for (std::size_t r = 0; r < routine.room_sequence.size(); ++r) {
                    const RoomSpec& room =
                        *rooms_by_name[routine.room_sequence[r]];
                    const auto [dwell_lo, dwell_hi] = routine.dwell_range_s[r];
                    const double dwell =
                        dwell_lo +
                        (dwell_hi - dwell_lo) * unit(rng);
                    for (const auto& device : room.devices) {
                        if (device.kind.tag == SensorKind::Tag::Motion) {
                            const double on = room_entry + unit(rng);
                            const double off =
                                room_entry + dwell * (0.5 + 0.5 * unit(rng));
                            fire_pair(device, on, std::max(off, on + 0.1));
                        } else if (unit(rng) < routine.device_fire_prob) {
                            const double open =
                                room_entry + dwell * 0.6 * unit(rng);
                            const double close = open + 1.0 + 7.0 * unit(rng);
                            fire_pair(device, open, close);
                        }
                    }
                    // Transit to the next room in the sequence.
                    room_entry += dwell + 2.0 + 4.0 * unit(rng);
                }
                t += inter_visit(rng);
            }
        }
    }

    // Spurious paired firings, device drawn uniformly.
    if (spec.noise_per_hour > 0.0 && !all_devices.empty()) {
        std::exponential_distribution<double> inter_noise(spec.noise_per_hour /
                                                          3600.0);
        std::uniform_int_distribution<std::size_t> pick(0,
                                                        all_devices.size() - 1);
        double t = inter_noise(rng);
        while (t < horizon) {
            const DeviceSpec& device = *all_devices[pick(rng)];
            fire_pair(device, t, t + 0.5 + 2.5 * unit(rng));
            t += inter_noise(rng);
        }
    }

    std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.t_seconds != b.t_seconds) return a.t_seconds < b.t_seconds;
        return a.seq < b.seq;
    });

    std::vector<SensorEvent> out;
    out.reserve(events.size());
    for (const auto& raw : events) {
        SensorEvent event;
        const auto micros = static_cast<std::int64_t>(
            std::llround(raw.t_seconds * 1e6));
        event.timestamp =
            Timestamp(spec.start.micros_since_epoch() + micros, 6);
        event.sensor_id = raw.sensor_id;
        event.state = raw.state;
        out.push_back(std::move(event));
    }
    return out;
}

void generate_synthetic_log(const SyntheticHomeSpec& spec, std::ostream& sink) {
    for (const auto& event : generate_synthetic_events(spec))
        sink << format_event(event) << '\n';
    if (!sink) throw IoError("write failure while generating synthetic log");
}

SyntheticHomeSpec load_home_spec_json(std::istream& source) {
    nlohmann::json doc;
    try {
        source >> doc;
    } catch (const std::exception& e) {
        throw SpecInvalid(std::string("bad home spec JSON: ") + e.what());
    }
    SyntheticHomeSpec spec;
    try {
        for (const auto& room_doc : doc.at("rooms")) {
            RoomSpec room;
            room.name = room_doc.at("name").get<std::string>();
            for (const auto& device_doc : room_doc.at("devices")) {
                if (device_doc.is_string()) {
                    room.devices.push_back(
                        DeviceSpec::make(device_doc.get<std::string>()));
                } else {
                    DeviceSpec device;
                    device.id = device_doc.at("id").get<std::string>();
                    if (device_doc.contains("kind")) {
                        const auto tag = kind_tag_from_string(
                            device_doc.at("kind").get<std::string>());
                        if (!tag)
                            throw SpecInvalid("unknown device kind in spec");
                        device.kind.tag = *tag;
                        if (*tag == SensorKind::Tag::Other)
                            device.kind.other_prefix = "";
                    } else {
                        device.kind = infer_sensor_kind(device.id);
                    }
                    room.devices.push_back(std::move(device));
                }
            }
            spec.rooms.push_back(std::move(room));
        }
        for (const auto& routine_doc : doc.at("routines")) {
            RoutineSpec routine;
            for (const auto& name : routine_doc.at("rooms"))
                routine.room_sequence.push_back(name.get<std::string>());
            for (const auto& range : routine_doc.at("dwell_s"))
                routine.dwell_range_s.emplace_back(range.at(0).get<double>(),
                                                   range.at(1).get<double>());
            routine.device_fire_prob =
                routine_doc.value("device_fire_prob", 0.8);
            routine.visits_per_day = routine_doc.value("visits_per_day", 4.0);
            spec.routines.push_back(std::move(routine));
        }
        spec.days = doc.value("days", 30);
        spec.residents = doc.value("residents", 2);
        spec.noise_per_hour = doc.value("noise_per_hour", 0.5);
        spec.seed = doc.value("seed", std::uint64_t{1});
    } catch (const SpecInvalid&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecInvalid(std::string("bad home spec JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

void save_home_spec_json(const SyntheticHomeSpec& spec, std::ostream& sink) {
    nlohmann::json doc;
    doc["rooms"] = nlohmann::json::array();
    for (const auto& room : spec.rooms) {
        nlohmann::json room_doc;
        room_doc["name"] = room.name;
        room_doc["devices"] = nlohmann::json::array();
        for (const auto& device : room.devices)
            room_doc["devices"].push_back(device.id);
        doc["rooms"].push_back(std::move(room_doc));
    }
    doc["routines"] = nlohmann::json::array();
    for (const auto& routine : spec.routines) {
        nlohmann::json routine_doc;
        routine_doc["rooms"] = routine.room_sequence;
        routine_doc["dwell_s"] = nlohmann::json::array();
        for (const auto& [lo, hi] : routine.dwell_range_s)
            routine_doc["dwell_s"].push_back({lo, hi});
        routine_doc["device_fire_prob"] = routine.device_fire_prob;
        routine_doc["visits_per_day"] = routine.visits_per_day;
        doc["routines"].push_back(std::move(routine_doc));
    }
    doc["days"] = spec.days;
    doc["residents"] = spec.residents;
    doc["noise_per_hour"] = spec.noise_per_hour;
    doc["seed"] = spec.seed;
    sink << doc.dump(2) << '\n';
}

void save_ground_truth_json(const std::map<std::string, std::string>& labels,
                            std::ostream& sink) {
    const nlohmann::json doc(labels);
    sink << doc.dump(2) << '\n';
}

std::map<std::string, std::string> load_ground_truth_json(std::istream& source) {
    nlohmann::json doc;
    try {
        source >> doc;
        return doc.get<std::map<std::string, std::string>>();
    } catch (const std::exception& e) {
        throw SpecInvalid(std::string("bad ground-truth JSON: ") + e.what());
    }
}

}  // namespace iot2vec
