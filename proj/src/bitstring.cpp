#include "klab/bitstring.hpp"

#include <stdexcept>

namespace klab {

BitString BitString::from_string(std::string_view text) {
    BitString out;
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("BitString: expected '0' or '1', got '" + std::string(1, c) + "'");
        }
        out.push_back(c == '1');
    }
    return out;
}

BitString BitString::from_uint(std::uint64_t value, std::size_t length) {
    if (length > 64) throw std::invalid_argument("BitString::from_uint: length > 64");
    BitString out;
    for (std::size_t i = 0; i < length; ++i) out.push_back((value >> (length - 1 - i)) & 1U);
    return out;
}

void BitString::push_back(bool bit) {
    if ((size_ & 63) == 0) words_.push_back(0);
    if (bit) words_.back() |= std::uint64_t{1} << (63 - (size_ & 63));
    ++size_;
}

void BitString::append(const BitString& other) {
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
}

BitString BitString::substr(std::size_t pos, std::size_t len) const {
    if (pos > size_) throw std::out_of_range("BitString::substr");
    std::size_t end = (len == npos || len > size_ - pos) ? size_ : pos + len;
    BitString out;
    for (std::size_t i = pos; i < end; ++i) out.push_back((*this)[i]);
    return out;
}

std::uint64_t BitString::to_uint() const {
    if (size_ > 64) throw std::out_of_range("BitString::to_uint: more than 64 bits");
    if (size_ == 0) return 0;
    return words_[0] >> (64 - size_);
}

std::string BitString::to_string() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
}

std::string BitString::pretty() const { return size_ == 0 ? std::string("ε") : to_string(); }

bool BitString::starts_with(const BitString& prefix) const {
    if (prefix.size_ > size_) return false;
    for (std::size_t i = 0; i < prefix.size_; ++i) {
        if ((*this)[i] != prefix[i]) return false;
    }
    return true;
}

std::strong_ordering BitString::operator<=>(const BitString& other) const {
    if (size_ != other.size_) return size_ <=> other.size_;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        if (words_[w] != other.words_[w]) return words_[w] <=> other.words_[w];
    }
    return std::strong_ordering::equal;
}

std::size_t BitString::hash() const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ size_;
    for (std::uint64_t w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

std::vector<BitString> all_strings_of_length(std::size_t length) {
    if (length >= 40) throw std::invalid_argument("all_strings_of_length: length too large");
    std::vector<BitString> out;
    out.reserve(std::size_t{1} << length);
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << length); ++v) out.push_back(BitString::from_uint(v, length));
    return out;
}

std::vector<BitString> all_strings_up_to(std::size_t max_length) {
    std::vector<BitString> out;
    for (std::size_t len = 0; len <= max_length; ++len) {
        auto layer = all_strings_of_length(len);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

BitString nat_to_bits(std::uint64_t n) {
    if (n == UINT64_MAX) throw std::out_of_range("nat_to_bits: value too large");
    std::uint64_t v = n + 1;
    int width = 63;
    while (!((v >> width) & 1U)) --width;
    return BitString::from_uint(v, static_cast<std::size_t>(width + 1)).substr(1);
}

std::uint64_t bits_to_nat(const BitString& bits) {
    if (bits.size() >= 64) throw std::out_of_range("bits_to_nat: string too long");
    return ((std::uint64_t{1} << bits.size()) | bits.to_uint()) - 1;
}

}  // namespace klab
