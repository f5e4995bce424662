#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "klab/bitstring.hpp"

namespace klab {

/// Version tag of the encodings below. Reports carry it because measured
/// constants depend on these choices.
inline constexpr unsigned kCodecVersion = 1;

struct MalformedCode : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Self-delimiting code: every bit doubled, then the terminator "01".
// |encode(x)| = 2|x| + 2.
BitString selfdelim_encode(const BitString& x);

struct SelfDelimDecoded {
    BitString value;
    BitString rest;
};
SelfDelimDecoded selfdelim_decode(const BitString& s);

/// Decodes one codeword starting at `pos`; returns the position just past it.
std::size_t selfdelim_decode_at(const BitString& s, std::size_t pos, BitString& value);

// <a,b> = selfdelim(a) . b
BitString pair_encode(const BitString& a, const BitString& b);
std::pair<BitString, BitString> pair_decode(const BitString& s);

/// Self-delimiting encoding of every item but the last, then the last raw.
/// Numbers are passed through nat_to_bits first. Requires a non-empty list.
BitString condition_encode(std::span<const BitString> items);
BitString condition_encode(std::initializer_list<BitString> items);

/// Inverse of condition_encode for a known item count.
std::vector<BitString> condition_decode(const BitString& s, std::size_t item_count);

}  // namespace klab
