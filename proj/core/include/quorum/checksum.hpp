#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace quorum {

// Incremental CRC-32 (IEEE 802.3 polynomial, reflected).
class Crc32 {
public:
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::uint32_t value() const { return state_ ^ 0xFFFFFFFFu; }

private:
    std::uint32_t state_ = 0xFFFFFFFFu;
};

inline std::uint32_t crc32(const void* data, std::size_t len) {
    Crc32 c;
    c.update(data, len);
    return c.value();
}

inline std::uint32_t crc32(std::string_view s) { return crc32(s.data(), s.size()); }

}  // namespace quorum
