#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "klab/bitcodec.hpp"
#include "klab/bitstring.hpp"

using namespace klab;

namespace {

BitString bs(const char* s) { return BitString::from_string(s); }

BitString random_string(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::size_t n = len(rng);
    BitString s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(rng() & 1U);
    return s;
}

}  // namespace

TEST_CASE("bitstring basics") {
    CHECK(bs("").empty());
    CHECK(bs("0110").to_string() == "0110");
    CHECK(bs("").pretty() == "ε");
    CHECK(BitString::from_uint(5, 4) == bs("0101"));
    CHECK(bs("0101").to_uint() == 5);
    CHECK_THROWS_AS(bs("012"), std::invalid_argument);
    CHECK(bs("0110").substr(1, 2) == bs("11"));
    CHECK(bs("0110").starts_with(bs("01")));
    CHECK_FALSE(bs("0110").starts_with(bs("1")));
    // length-lex order
    CHECK(bs("1") < bs("00"));
    CHECK(bs("01") < bs("10"));
    CHECK(bs("") < bs("0"));
    auto all = all_strings_up_to(3);
    CHECK(all.size() == 15);
    CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("bitstring spans word boundaries") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        BitString a = random_string(rng, 0, 150);
        BitString b = random_string(rng, 0, 150);
        BitString c = a + b;
        REQUIRE(c.size() == a.size() + b.size());
        CHECK(c.substr(0, a.size()) == a);
        CHECK(c.substr(a.size()) == b);
        CHECK(BitString::from_string(c.to_string()) == c);
    }
}

TEST_CASE("nat bijection") {
    CHECK(nat_to_bits(0) == bs(""));
    CHECK(nat_to_bits(1) == bs("0"));
    CHECK(nat_to_bits(2) == bs("1"));
    CHECK(nat_to_bits(3) == bs("00"));
    CHECK(nat_to_bits(6) == bs("11"));
    for (std::uint64_t n = 0; n < 5000; ++n) CHECK(bits_to_nat(nat_to_bits(n)) == n);
    // onto: every string of length <= 10 is some number, in length-lex order
    std::uint64_t n = 0;
    for (const auto& s : all_strings_up_to(10)) CHECK(bits_to_nat(s) == n++);
}

TEST_CASE("selfdelim known vectors") {
    CHECK(selfdelim_encode(bs("")) == bs("01"));
    CHECK(selfdelim_encode(bs("1")) == bs("1101"));
    CHECK(selfdelim_encode(bs("10")) == bs("110001"));
    CHECK(pair_encode(bs("1"), bs("0")) == bs("11010"));
    CHECK(condition_encode({bs("1"), bs("0")}) == bs("11010"));
    CHECK(condition_encode({bs("0")}) == bs("0"));
    CHECK(condition_encode({bs("0"), bs("1"), bs("")}) == bs("00011101"));
}

TEST_CASE("selfdelim rejects malformed input") {
    CHECK_THROWS_AS(selfdelim_decode(bs("")), MalformedCode);
    CHECK_THROWS_AS(selfdelim_decode(bs("0")), MalformedCode);
    CHECK_THROWS_AS(selfdelim_decode(bs("10")), MalformedCode);
    CHECK_THROWS_AS(selfdelim_decode(bs("0011")), MalformedCode);
    CHECK_THROWS_AS(condition_encode(std::span<const BitString>{}), std::invalid_argument);
}

TEST_CASE("codec laws exhaustive to length 8") {
    auto all = all_strings_up_to(8);
    for (const auto& x : all) {
        auto enc = selfdelim_encode(x);
        REQUIRE(enc.size() == 2 * x.size() + 2);
        auto dec = selfdelim_decode(enc);
        CHECK(dec.value == x);
        CHECK(dec.rest.empty());
    }
    // Prefix-freeness: no codeword is a proper prefix of another.
    std::vector<BitString> codes;
    for (const auto& x : all_strings_up_to(6)) codes.push_back(selfdelim_encode(x));
    for (const auto& c : codes) {
        for (const auto& d : codes) {
            if (c != d) CHECK_FALSE(d.starts_with(c));
        }
    }
    for (const auto& a : all_strings_up_to(4)) {
        for (const auto& b : all_strings_up_to(4)) {
            auto [da, db] = pair_decode(pair_encode(a, b));
            CHECK(da == a);
            CHECK(db == b);
            auto items = condition_decode(condition_encode({a, b, a}), 3);
            REQUIRE(items.size() == 3);
            CHECK(items[0] == a);
            CHECK(items[1] == b);
            CHECK(items[2] == a);
        }
    }
}

TEST_CASE("pair encoding is injective on small strings") {
    std::set<BitString> seen;
    std::size_t count = 0;
    for (const auto& a : all_strings_up_to(5)) {
        for (const auto& b : all_strings_up_to(5)) {
            seen.insert(pair_encode(a, b));
            ++count;
        }
    }
    CHECK(seen.size() == count);
}

TEST_CASE("codec laws on random longer inputs") {
    std::mt19937_64 rng(20240611);
    for (int iter = 0; iter < 100000; ++iter) {
        BitString a = random_string(rng, 9, 80);
        BitString b = random_string(rng, 0, 80);
        auto dec = selfdelim_decode(selfdelim_encode(a) + b);
        REQUIRE(dec.value == a);
        REQUIRE(dec.rest == b);
        if (iter % 10 == 0) {
            BitString c = random_string(rng, 0, 40);
            auto items = condition_decode(condition_encode({a, b, c}), 3);
            REQUIRE(items[0] == a);
            REQUIRE(items[1] == b);
            REQUIRE(items[2] == c);
        }
        if (iter % 10 == 1) {
            // A codeword never prefixes a different codeword.
            BitString other = random_string(rng, 9, 80);
            if (other != a) REQUIRE_FALSE(selfdelim_encode(other).starts_with(selfdelim_encode(a)));
        }
    }
}
