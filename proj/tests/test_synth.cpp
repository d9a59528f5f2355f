#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "iot2vec/errors.hpp"
#include "iot2vec/sessionizer.hpp"
#include "iot2vec/synth.hpp"
#include "support/test_util.hpp"

using namespace iot2vec;

TEST_CASE("generate: single room, no noise, all events from its devices") {
    SyntheticHomeSpec spec;
    RoomSpec room;
    room.name = "den";
    room.devices = {DeviceSpec::make("M001"), DeviceSpec::make("D001")};
    spec.rooms = {room};
    RoutineSpec routine;
    routine.room_sequence = {"den"};
    routine.dwell_range_s = {{20, 30}};
    routine.device_fire_prob = 1.0;
    routine.visits_per_day = 3;
    spec.routines = {routine};
    spec.days = 2;
    spec.residents = 1;
    spec.noise_per_hour = 0.0;
    spec.seed = 5;

    const auto events = generate_synthetic_events(spec);
    REQUIRE_FALSE(events.empty());
    for (const auto& event : events)
        CHECK((event.sensor_id == "M001" || event.sensor_id == "D001"));
    // Time-ordered output.
    for (std::size_t i = 1; i < events.size(); ++i)
        CHECK(events[i - 1].timestamp <= events[i].timestamp);
}

TEST_CASE("generate: fixed seed reproduces the log byte for byte") {
    const auto spec = SyntheticHomeSpec::three_room_home();
    std::stringstream first, second;
    generate_synthetic_log(spec, first);
    generate_synthetic_log(spec, second);
    CHECK(first.str() == second.str());
    CHECK_FALSE(first.str().empty());
}

TEST_CASE("generate: different seeds differ") {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = 2;
    std::stringstream first, second;
    generate_synthetic_log(spec, first);
    spec.seed = 2;
    generate_synthetic_log(spec, second);
    CHECK(first.str() != second.str());
}

TEST_CASE("generate: activations and deactivations balance per device") {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = 5;
    spec.noise_per_hour = 2.0;
    const auto events = generate_synthetic_events(spec);
    std::map<std::string, int> balance;
    for (const auto& event : events) {
        const bool activation = event.state == "ON" || event.state == "OPEN";
        balance[event.sensor_id] += activation ? 1 : -1;
    }
    for (const auto& [id, diff] : balance) {
        INFO("device ", id);
        CHECK(diff == 0);
    }
}

TEST_CASE("generate: intra-room co-occurrence dominates cross-room (>= 5x)") {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = 30;
    const auto events = generate_synthetic_events(spec);
    const auto truth = spec.ground_truth();

    SessionizerConfig config;
    config.gap = SessionizerConfig::gap_from_seconds(60);
    config.min_session_len = 1;
    const auto corpus = sessionize(extract_transitions(events), config);

    std::uint64_t intra = 0, inter = 0;
    for (const auto& session : corpus.sessions) {
        // Distinct device pairs within a session.
        std::set<std::string> devices(session.tokens.begin(),
                                      session.tokens.end());
        for (auto a = devices.begin(); a != devices.end(); ++a) {
            for (auto b = std::next(a); b != devices.end(); ++b) {
                if (truth.at(*a) == truth.at(*b))
                    ++intra;
                else
                    ++inter;
            }
        }
    }
    CHECK(intra >= 5 * std::max<std::uint64_t>(inter, 1));
}

TEST_CASE("spec validation") {
    SyntheticHomeSpec empty;
    CHECK_THROWS_AS(empty.validate(), SpecInvalid);

    auto bad_routine = SyntheticHomeSpec::three_room_home();
    bad_routine.routines[0].room_sequence = {"atlantis"};
    CHECK_THROWS_AS(bad_routine.validate(), SpecInvalid);

    auto bad_prob = SyntheticHomeSpec::three_room_home();
    bad_prob.routines[0].device_fire_prob = 1.5;
    CHECK_THROWS_AS(bad_prob.validate(), SpecInvalid);

    auto dup = SyntheticHomeSpec::three_room_home();
    dup.rooms[1].devices.push_back(DeviceSpec::make("M015"));  // already in kitchen
    CHECK_THROWS_AS(dup.validate(), SpecInvalid);
}

TEST_CASE("ground truth maps every declared device to its room") {
    const auto spec = SyntheticHomeSpec::three_room_home();
    const auto truth = spec.ground_truth();
    CHECK(truth.size() == 15);
    CHECK(truth.at("M015") == "kitchen");
    CHECK(truth.at("D005") == "bathroom");
    CHECK(truth.at("I003") == "bedroom");
}

TEST_CASE("home spec JSON round trip") {
    const auto spec = SyntheticHomeSpec::three_room_home();
    std::stringstream buffer;
    save_home_spec_json(spec, buffer);
    const auto reread = load_home_spec_json(buffer);
    CHECK(reread.rooms.size() == spec.rooms.size());
    CHECK(reread.routines.size() == spec.routines.size());
    CHECK(reread.days == spec.days);
    CHECK(reread.residents == spec.residents);
    CHECK(reread.seed == spec.seed);

    // Same spec bytes -> same generated log.
    std::stringstream a, b;
    generate_synthetic_log(spec, a);
    generate_synthetic_log(reread, b);
    CHECK(a.str() == b.str());

    std::istringstream garbage("{not json");
    CHECK_THROWS_AS(load_home_spec_json(garbage), SpecInvalid);
}

TEST_CASE("ground truth JSON round trip") {
    const std::map<std::string, std::string> labels = {
        {"M015", "kitchen"}, {"D005", "bathroom"}};
    std::stringstream buffer;
    save_ground_truth_json(labels, buffer);
    CHECK(load_ground_truth_json(buffer) == labels);
}

TEST_CASE("generated log parses through the event_log module") {
    auto spec = SyntheticHomeSpec::three_room_home();
    spec.days = 2;
    std::stringstream log;
    generate_synthetic_log(spec, log);
    const auto parsed = parse_log(log, ParseMode::Strict);
    CHECK(parsed.report.malformed == 0);
    CHECK(parsed.events.size() == parsed.report.parsed);
    CHECK(parsed.events.size() > 100);
}
