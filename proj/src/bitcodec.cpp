#include "klab/bitcodec.hpp"

namespace klab {

BitString selfdelim_encode(const BitString& x) {
    BitString out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.push_back(x[i]);
        out.push_back(x[i]);
    }
    out.push_back(false);
    out.push_back(true);
    return out;
}

std::size_t selfdelim_decode_at(const BitString& s, std::size_t pos, BitString& value) {
    value = BitString{};
    for (;;) {
        if (pos + 2 > s.size()) throw MalformedCode("selfdelim: input ends before terminator");
        bool first = s[pos];
        bool second = s[pos + 1];
        pos += 2;
        if (first == second) {
            value.push_back(first);
        } else if (!first && second) {
            return pos;
        } else {
            throw MalformedCode("selfdelim: invalid pair \"10\"");
        }
    }
}

SelfDelimDecoded selfdelim_decode(const BitString& s) {
    SelfDelimDecoded out;
    std::size_t end = selfdelim_decode_at(s, 0, out.value);
    out.rest = s.substr(end);
    return out;
}

BitString pair_encode(const BitString& a, const BitString& b) { return selfdelim_encode(a) + b; }

std::pair<BitString, BitString> pair_decode(const BitString& s) {
    auto [a, rest] = selfdelim_decode(s);
    return {std::move(a), std::move(rest)};
}

BitString condition_encode(std::span<const BitString> items) {
    if (items.empty()) throw std::invalid_argument("condition_encode: empty item list");
    BitString out;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) out.append(selfdelim_encode(items[i]));
    out.append(items.back());
    return out;
}

BitString condition_encode(std::initializer_list<BitString> items) {
    return condition_encode(std::span<const BitString>(items.begin(), items.size()));
}

std::vector<BitString> condition_decode(const BitString& s, std::size_t item_count) {
    if (item_count == 0) throw std::invalid_argument("condition_decode: item_count must be positive");
    std::vector<BitString> items(item_count);
    std::size_t pos = 0;
    for (std::size_t i = 0; i + 1 < item_count; ++i) pos = selfdelim_decode_at(s, pos, items[i]);
    items.back() = s.substr(pos);
    return items;
}

}  // namespace klab
