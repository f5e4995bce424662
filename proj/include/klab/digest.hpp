#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace klab {

/// 256-bit SHA-256 digest.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    bool operator==(const Digest&) const = default;

    /// Lowercase hex, 64 characters.
    [[nodiscard]] std::string to_hex() const;
    static Digest from_hex(std::string_view hex);
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

}  // namespace klab
