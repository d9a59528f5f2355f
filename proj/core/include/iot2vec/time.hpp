#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace iot2vec {

/// Naive wall-clock instant at microsecond resolution, no timezone.
///
/// The number of fractional-second digits seen in the source text is kept so
/// a parsed event can be re-serialized byte-for-byte (logs mix precisions,
/// e.g. "17:17:36.535295" next to "17:20:00.0" next to "17:20:00").
class Timestamp {
public:
    Timestamp() = default;
    explicit Timestamp(std::int64_t micros_since_epoch,
                       std::uint8_t frac_digits = 6)
        : micros_(micros_since_epoch), frac_digits_(frac_digits) {}

    /// Parses "YYYY-MM-DD" + "HH:MM:SS[.ffffff]". Throws Error("MalformedTimestamp")
    /// on bad syntax, invalid calendar dates, or more than 6 fractional digits.
    static Timestamp parse(std::string_view date, std::string_view time);

    /// Builds from civil fields (local, no timezone).
    static Timestamp from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute, unsigned second,
                                std::int64_t micros = 0,
                                std::uint8_t frac_digits = 6);

    std::int64_t micros_since_epoch() const noexcept { return micros_; }
    std::uint8_t frac_digits() const noexcept { return frac_digits_; }

    /// "YYYY-MM-DD HH:MM:SS" plus '.' and exactly frac_digits() digits when
    /// frac_digits() > 0.
    std::string format() const;

    // Ordering and equality look at the instant only, not the formatting width.
    friend bool operator==(const Timestamp& a, const Timestamp& b) noexcept {
        return a.micros_ == b.micros_;
    }
    friend std::strong_ordering operator<=>(const Timestamp& a,
                                            const Timestamp& b) noexcept {
        return a.micros_ <=> b.micros_;
    }

    Timestamp operator+(std::chrono::microseconds d) const noexcept {
        return Timestamp(micros_ + d.count(), frac_digits_);
    }
    friend std::chrono::microseconds operator-(const Timestamp& a,
                                               const Timestamp& b) noexcept {
        return std::chrono::microseconds(a.micros_ - b.micros_);
    }

private:
    std::int64_t micros_ = 0;
    std::uint8_t frac_digits_ = 6;
};

}  // namespace iot2vec
