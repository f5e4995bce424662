#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace klab {

/// Finite binary string, stored MSB-first in 64-bit words.
///
/// Ordering is length-lexicographic: shorter strings come first, equal
/// lengths compare bitwise with 0 < 1. Unused trailing bits of the last
/// word are always zero, so defaulted equality is exact.
class BitString {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    BitString() = default;

    /// Parses a string of '0'/'1' characters. Throws std::invalid_argument.
    static BitString from_string(std::string_view text);

    /// The low `length` bits of `value`, most significant first.
    static BitString from_uint(std::uint64_t value, std::size_t length);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

    [[nodiscard]] bool operator[](std::size_t i) const noexcept {
        return (words_[i >> 6] >> (63 - (i & 63))) & 1U;
    }

    void push_back(bool bit);
    void append(const BitString& other);
    [[nodiscard]] BitString substr(std::size_t pos, std::size_t len = npos) const;

    /// Value of the bits read as an unsigned binary number. Requires size() <= 64.
    [[nodiscard]] std::uint64_t to_uint() const;

    /// '0'/'1' text; empty string for ε.
    [[nodiscard]] std::string to_string() const;

    /// Like to_string but renders the empty string as "ε".
    [[nodiscard]] std::string pretty() const;

    [[nodiscard]] bool starts_with(const BitString& prefix) const;

    bool operator==(const BitString& other) const = default;
    std::strong_ordering operator<=>(const BitString& other) const;

    [[nodiscard]] std::size_t hash() const noexcept;

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

inline BitString operator+(BitString lhs, const BitString& rhs) {
    lhs.append(rhs);
    return lhs;
}

/// All strings of exactly `length` bits in lexicographic order.
std::vector<BitString> all_strings_of_length(std::size_t length);

/// All strings of length <= max_length in length-lex order.
std::vector<BitString> all_strings_up_to(std::size_t max_length);

// Nat <-> BitString bijection: n maps to the binary expansion of n+1 with its
// leading 1 removed (0 -> ε, 1 -> "0", 2 -> "1", 3 -> "00", ...).
BitString nat_to_bits(std::uint64_t n);
std::uint64_t bits_to_nat(const BitString& bits);

}  // namespace klab

template <>
struct std::hash<klab::BitString> {
    std::size_t operator()(const klab::BitString& s) const noexcept { return s.hash(); }
};
