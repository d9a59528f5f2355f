#pragma once

// Little-endian binary stream helpers shared by the model and registry
// containers. Read failures surface as CorruptModelFile so truncation is
// always diagnosed.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "iot2vec/errors.hpp"

namespace iot2vec::detail {

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(bytes), std::end(bytes));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw CorruptModelFile("unexpected end of file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(bytes), std::end(bytes));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > (1u << 20)) throw CorruptModelFile("implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw CorruptModelFile("unexpected end of file");
    return s;
}

inline void write_f32_array(std::ostream& out, std::span<const float> values) {
    for (const float v : values) write_le<float>(out, v);
}

inline void read_f32_array(std::istream& in, std::span<float> values) {
    for (float& v : values) v = read_le<float>(in);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
    std::string found(magic.size(), '\0');
    in.read(found.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || found != magic)
        throw CorruptModelFile("bad magic bytes (not an iot2vec container)");
}

}  // namespace iot2vec::detail
