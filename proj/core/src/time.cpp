#include "iot2vec/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "iot2vec/errors.hpp"

namespace iot2vec {
namespace {

constexpr std::int64_t kMicrosPerSecond = 1'000'000;
constexpr std::int64_t kMicrosPerDay = 86'400 * kMicrosPerSecond;

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr std::array<unsigned, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                         31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : lengths[m - 1];
}

[[noreturn]] void bad(const std::string& reason) {
    throw Error("MalformedTimestamp", reason);
}

unsigned parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    unsigned value = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') bad("expected digit in timestamp");
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    return value;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view date, std::string_view time) {
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
        bad("date must be YYYY-MM-DD");
    const unsigned year = parse_fixed(date, 0, 4);
    const unsigned month = parse_fixed(date, 5, 2);
    const unsigned day = parse_fixed(date, 8, 2);
    if (month < 1 || month > 12) bad("month out of range");
    if (day < 1 || day > days_in_month(year, month)) bad("day out of range");

    if (time.size() < 8 || time[2] != ':' || time[5] != ':')
        bad("time must be HH:MM:SS[.ffffff]");
    const unsigned hour = parse_fixed(time, 0, 2);
    const unsigned minute = parse_fixed(time, 3, 2);
    const unsigned second = parse_fixed(time, 6, 2);
    if (hour > 23 || minute > 59 || second > 59) bad("time field out of range");

    std::int64_t frac_micros = 0;
    std::uint8_t frac_digits = 0;
    if (time.size() > 8) {
        if (time[8] != '.' || time.size() == 9) bad("bad fractional seconds");
        const std::string_view frac = time.substr(9);
        if (frac.size() > 6)
            bad("more than 6 fractional-second digits");
        std::int64_t scale = 100'000;
        for (const char c : frac) {
            if (c < '0' || c > '9') bad("expected digit in fractional seconds");
            frac_micros += static_cast<std::int64_t>(c - '0') * scale;
            scale /= 10;
        }
        frac_digits = static_cast<std::uint8_t>(frac.size());
    }

    const std::int64_t days = days_from_civil(year, month, day);
    const std::int64_t micros =
        days * kMicrosPerDay +
        (static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second) *
            kMicrosPerSecond +
        frac_micros;
    return Timestamp(micros, frac_digits);
}

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute, unsigned second,
                                std::int64_t micros, std::uint8_t frac_digits) {
    const std::int64_t days = days_from_civil(year, month, day);
    return Timestamp(days * kMicrosPerDay +
                         (static_cast<std::int64_t>(hour) * 3600 + minute * 60 +
                          second) *
                             kMicrosPerSecond +
                         micros,
                     frac_digits);
}

std::string Timestamp::format() const {
    std::int64_t days = micros_ / kMicrosPerDay;
    std::int64_t rem = micros_ % kMicrosPerDay;
    if (rem < 0) {
        rem += kMicrosPerDay;
        days -= 1;
    }
    std::int64_t y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    const unsigned h = static_cast<unsigned>(rem / (3600 * kMicrosPerSecond));
    rem %= 3600 * kMicrosPerSecond;
    const unsigned mi = static_cast<unsigned>(rem / (60 * kMicrosPerSecond));
    rem %= 60 * kMicrosPerSecond;
    const unsigned s = static_cast<unsigned>(rem / kMicrosPerSecond);
    std::int64_t frac = rem % kMicrosPerSecond;

    char buf[40];
    int n = std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u %02u:%02u:%02u",
                          static_cast<long long>(y), mo, d, h, mi, s);
    std::string out(buf, static_cast<std::size_t>(n));
    if (frac_digits_ > 0) {
        char fbuf[8];
        std::snprintf(fbuf, sizeof(fbuf), "%06lld", static_cast<long long>(frac));
        out.push_back('.');
        out.append(fbuf, frac_digits_);
    }
    return out;
}

}  // namespace iot2vec
