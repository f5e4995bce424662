#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "klab/bitcodec.hpp"
#include "klab/enumerator.hpp"
#include "oracle.hpp"

using namespace klab;

namespace {

BitString bs(const char* s) { return BitString::from_string(s); }

const MachineDescriptor& machine(Mode mode) {
    static const MachineDescriptor p = reference_machine(Mode::plain);
    static const MachineDescriptor q = reference_machine(Mode::prefix);
    return mode == Mode::plain ? p : q;
}

std::vector<BitString> conditions() {
    return {bs(""), bs("0"), bs("1"), bs("01"), bs("0110"), condition_encode({bs("10"), nat_to_bits(5)})};
}

ComplexityTable build(Mode mode, const std::vector<BitString>& conds, const std::vector<BitString>& targets,
                      unsigned P, unsigned T, unsigned workers = 1) {
    BuildOptions o;
    o.max_program_bits = P;
    o.budget = T;
    o.workers = workers;
    return build_table(machine(mode), conds, targets, o);
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("klab-test-" + name)).string();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("table matches brute force over the straight-line oracle") {
    const unsigned P = 13;
    const unsigned T = 256;
    const auto targets = all_strings_up_to(5);
    for (Mode mode : {Mode::plain, Mode::prefix}) {
        auto table = build(mode, conditions(), targets, P, T);
        for (const auto& c : conditions()) {
            auto best = oracle::brute_force(machine(mode), c, P, T);
            for (const auto& t : targets) {
                auto it = best.find(t);
                Complexity got = table.value(t, c);
                if (it == best.end()) {
                    CHECK(got == Complexity::infinity());
                    CHECK_FALSE(table.witness(t, c).has_value());
                } else {
                    REQUIRE(got.is_finite());
                    CHECK(got.bits == it->second.length);
                    CHECK(*table.witness(t, c) == it->second.program);
                }
            }
        }
    }
}

TEST_CASE("sampled entries at P=24 have no shorter witness") {
    const auto targets = all_strings_up_to(7);
    auto table = build(Mode::plain, {bs(""), bs("0110")}, targets, 24, 1024);
    std::mt19937_64 rng(5);
    int sampled = 0;
    for (int tries = 0; sampled < 100 && tries < 100000; ++tries) {
        const auto& c = table.conditions()[rng() % 2];
        const auto& t = targets[rng() % targets.size()];
        Complexity v = table.value(t, c);
        if (!v.is_finite() || v.bits > 14) continue;
        ++sampled;
        auto w = *table.witness(t, c);
        auto r = oracle::execute(machine(Mode::plain), w, c, 1024);
        REQUIRE(r.halted);
        CHECK(r.output == t);
        for (const auto& p : all_strings_up_to(v.bits == 0 ? 0 : v.bits - 1)) {
            if (p.size() >= v.bits) break;
            auto o = oracle::execute(machine(Mode::plain), p, c, 1024);
            REQUIRE_FALSE((o.halted && o.output == t));
        }
    }
    CHECK(sampled == 100);
}

TEST_CASE("worker count does not change the table") {
    const auto targets = all_strings_up_to(6);
    for (Mode mode : {Mode::plain, Mode::prefix}) {
        auto one = build(mode, conditions(), targets, 20, 512, 1);
        auto three = build(mode, conditions(), targets, 20, 512, 3);
        CHECK(one == three);
        CHECK(serialize_table(one) == serialize_table(three));
    }
}

TEST_CASE("values never grow with P and T") {
    const auto targets = all_strings_up_to(6);
    for (Mode mode : {Mode::plain, Mode::prefix}) {
        auto small = build(mode, conditions(), targets, 16, 256);
        auto large = build(mode, conditions(), targets, 20, 512);
        for (const auto& c : conditions()) {
            for (const auto& t : targets) {
                Complexity s = small.value(t, c);
                Complexity l = large.value(t, c);
                if (s.is_finite()) {
                    REQUIRE(l.is_finite());
                    CHECK(l.bits <= s.bits);
                }
            }
        }
    }
}

TEST_CASE("Kraft sum of halting prefix programs") {
    for (const auto& c : conditions()) {
        auto counts = halting_program_counts(machine(Mode::prefix), c, 12, 256);
        Dyadic d = kraft_sum(counts);
        CHECK(d.exponent == 12);
        CHECK(dyadic_sum_at_most_one({d}));
        CHECK(d.numerator > 0);
    }
    // Plain programs are not prefix-free and overshoot.
    auto plain_counts = halting_program_counts(machine(Mode::plain), bs(""), 6, 256);
    CHECK_FALSE(dyadic_sum_at_most_one({kraft_sum(plain_counts)}));
    CHECK_THROWS_AS(halting_program_counts(machine(Mode::prefix), bs(""), 21, 10), CapacityExceeded);
}

TEST_CASE("exact dyadic sums") {
    CHECK(dyadic_sum_at_most_one({{1, 1}, {1, 1}}));
    CHECK_FALSE(dyadic_sum_at_most_one({{1, 1}, {1, 1}, {1, 100}}));
    CHECK(dyadic_sum_at_most_one({{1, 2}, {1, 2}, {1, 2}, {1, 3}, {1, 4}, {1, 4}}));
    CHECK_FALSE(dyadic_sum_at_most_one({{1, 2}, {1, 2}, {1, 2}, {1, 3}, {1, 4}, {1, 4}, {1, 60}}));
    CHECK(dyadic_sum_at_most_one({}));
    CHECK_FALSE(dyadic_sum_at_most_one({{~std::uint64_t{0}, 0}, {1, 119}}));
}

TEST_CASE("slices recount from the table") {
    std::vector<BitString> targets;
    for (const auto& a : all_strings_up_to(3)) {
        for (const auto& y : all_strings_up_to(5)) targets.push_back(pair_encode(a, y));
    }
    auto table = build(Mode::plain, {bs("")}, targets, 20, 512);
    for (unsigned n : {4U, 8U, 12U, 16U}) {
        auto slices = enumerate_slices(table, n);
        std::uint64_t total = 0;
        std::vector<Dyadic> terms;
        for (const auto& s : slices) {
            std::set<BitString> distinct(s.ys.begin(), s.ys.end());
            CHECK(distinct.size() == s.count());
            std::uint64_t recount = 0;
            for (const auto& y : all_strings_up_to(5)) {
                Complexity c = table.value(pair_encode(s.a, y), bs(""));
                if (c.is_finite() && c.bits <= n) ++recount;
            }
            CHECK(recount == s.count());
            for (std::uint64_t i = 0; i < s.ys.size(); ++i) CHECK(*s.ordinal_of(s.ys[i]) == i);
            CHECK_FALSE(s.ordinal_of(bs("111111111")).has_value());
            total += s.count();
            terms.push_back(semimeasure(s));
            CHECK(semimeasure(s) == Dyadic{s.count(), n + 1});
        }
        CHECK(total <= (std::uint64_t{1} << (n + 1)));
        CHECK(dyadic_sum_at_most_one(terms));
    }
    CHECK_THROWS_AS(enumerate_slices(build(Mode::prefix, {bs("")}, targets, 8, 64), 4), std::invalid_argument);
}

TEST_CASE("lookups and domain") {
    auto plain = build(Mode::plain, {bs("")}, all_strings_up_to(3), 12, 128);
    auto prefix = build(Mode::prefix, {bs("")}, all_strings_up_to(3), 12, 128);
    CHECK(lookup_c(plain, bs("01"), bs("")) == Complexity::finite(4));
    CHECK(lookup_k(prefix, bs("01"), bs("")) == Complexity::finite(7));
    CHECK_THROWS_AS(lookup_c(prefix, bs("01"), bs("")), std::invalid_argument);
    CHECK_THROWS_AS(lookup_k(plain, bs("01"), bs("")), std::invalid_argument);
    CHECK_THROWS_AS(lookup_c(plain, bs("0101"), bs("")), NotComputed);
    CHECK_THROWS_AS(lookup_c(plain, bs("01"), bs("1")), NotComputed);
    CHECK(plain.value(bs("0101"), bs("")) == Complexity::not_computed());
    CHECK(pair_complexity(plain, bs(""), bs("0")).bits == 6);
    CHECK(to_string(Complexity::infinity()) == "inf");
    CHECK(witness_bits(make_witness_key(3, 5)) == bs("101"));
}

TEST_CASE("capacity limits") {
    BuildOptions o;
    o.max_program_bits = 27;
    CHECK_THROWS_AS(build_table(machine(Mode::plain), {bs("")}, {bs("0")}, o), CapacityExceeded);
    o.max_program_bits = 20;
    o.work_ceiling = 1000;
    CHECK_THROWS_AS(build_table(machine(Mode::plain), {bs("")}, {bs("0")}, o), CapacityExceeded);
}

TEST_CASE("cache roundtrip and tamper detection") {
    auto table = build(Mode::plain, conditions(), all_strings_up_to(5), 16, 256);
    const std::string path = temp_path("roundtrip.klab");
    save_cache(table, path);
    auto bytes = read_bytes(path);
    CHECK(bytes == serialize_table(table));
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "KLAB1");

    auto loaded = load_cache(path, table.machine_fingerprint(), 16, 256);
    CHECK(loaded == table);
    CHECK(serialize_table(loaded) == bytes);
    CHECK(serialize_table(deserialize_table(bytes)) == bytes);

    auto expect_kind = [&](const std::vector<std::uint8_t>& data, CacheError::Kind kind, unsigned P = 16) {
        write_bytes(path, data);
        try {
            load_cache(path, table.machine_fingerprint(), P, 256);
            FAIL("load_cache accepted a bad file");
        } catch (const CacheError& e) {
            CHECK(e.kind == kind);
        }
    };
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    expect_kind(flipped, CacheError::Kind::corrupt);
    auto foreign = bytes;
    foreign[7] ^= 0xFF;  // first fingerprint byte
    expect_kind(foreign, CacheError::Kind::fingerprint_mismatch);
    auto digest = bytes;
    digest.back() ^= 1;
    expect_kind(digest, CacheError::Kind::corrupt);
    expect_kind(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 40), CacheError::Kind::corrupt);
    expect_kind(bytes, CacheError::Kind::config_mismatch, 17);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_cache(path, table.machine_fingerprint(), 16, 256), CacheError);
}
