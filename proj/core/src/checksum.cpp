#include "quorum/checksum.hpp"

#include <array>

namespace quorum {
namespace {

std::array<std::uint32_t, 256> make_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1u) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
        }
        table[i] = c;
    }
    return table;
}

const std::array<std::uint32_t, 256>& table() {
    static const auto t = make_table();
    return t;
}

}  // namespace

void Crc32::update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    const auto& t = table();
    for (std::size_t i = 0; i < len; ++i) {
        state_ = t[(state_ ^ p[i]) & 0xFFu] ^ (state_ >> 8);
    }
}

}  // namespace quorum
