#include "klab/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace klab {

std::string Digest::to_hex() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 15]);
    }
    return out;
}

Digest Digest::from_hex(std::string_view hex) {
    if (hex.size() != 64) throw std::invalid_argument("Digest::from_hex: expected 64 hex digits");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("Digest::from_hex: bad digit");
    };
    Digest d;
    for (std::size_t i = 0; i < 32; ++i) {
        d.bytes[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return d;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw std::runtime_error("sha256: EVP_Digest failed");
    }
    return d;
}

Digest sha256(std::string_view text) {
    return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace klab
