#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "klab/bitstring.hpp"
#include "klab/digest.hpp"
#include "klab/machine.hpp"

namespace klab {

inline constexpr unsigned kMaxProgramBitsCap = 26;
inline constexpr std::uint64_t kDefaultWorkCeiling = std::uint64_t{1} << 40;

struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested (condition, target) pair lies outside a table's domain.
struct NotComputed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Time-bounded complexity value: finite bit count or Infinity (no program of
/// length <= P halts with the target within T). NotComputed marks values
/// outside every table's domain; it is never a table entry.
struct Complexity {
    enum class Kind : std::uint8_t { finite, infinity, not_computed };
    Kind kind = Kind::not_computed;
    unsigned bits = 0;

    static Complexity finite(unsigned b) { return {Kind::finite, b}; }
    static Complexity infinity() { return {Kind::infinity, 0}; }
    static Complexity not_computed() { return {Kind::not_computed, 0}; }

    [[nodiscard]] bool is_finite() const noexcept { return kind == Kind::finite; }
    bool operator==(const Complexity&) const = default;
};

std::string to_string(const Complexity& c);

/// A witness program packed for length-lex comparison: length in the high
/// word, bits MSB-first in the low word. Smaller key = earlier program.
using WitnessKey = std::uint64_t;
inline constexpr WitnessKey kNoWitness = ~WitnessKey{0};

inline WitnessKey make_witness_key(unsigned length, std::uint32_t bits) {
    return (WitnessKey{length} << 32) | bits;
}
inline unsigned witness_length(WitnessKey key) { return static_cast<unsigned>(key >> 32); }
BitString witness_bits(WitnessKey key);

class ComplexityTable {
public:
    ComplexityTable() = default;
    /// Conditions and targets are sorted length-lex and deduplicated.
    ComplexityTable(Digest machine_fingerprint, Mode mode, unsigned max_program_bits, unsigned budget,
                    std::vector<BitString> conditions, std::vector<BitString> targets);

    [[nodiscard]] const Digest& machine_fingerprint() const noexcept { return fingerprint_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] unsigned max_program_bits() const noexcept { return max_program_bits_; }
    [[nodiscard]] unsigned budget() const noexcept { return budget_; }
    [[nodiscard]] const std::vector<BitString>& conditions() const noexcept { return conditions_; }
    [[nodiscard]] const std::vector<BitString>& targets() const noexcept { return targets_; }

    [[nodiscard]] std::optional<std::size_t> condition_row(const BitString& condition) const;
    [[nodiscard]] std::optional<std::size_t> target_column(const BitString& target) const;

    [[nodiscard]] WitnessKey cell(std::size_t row, std::size_t col) const {
        return cells_[row * targets_.size() + col];
    }
    void set_cell(std::size_t row, std::size_t col, WitnessKey key) { cells_[row * targets_.size() + col] = key; }

    /// Value for an in-domain pair; NotComputed otherwise.
    [[nodiscard]] Complexity value(const BitString& target, const BitString& condition) const;
    [[nodiscard]] std::optional<BitString> witness(const BitString& target, const BitString& condition) const;

    [[nodiscard]] std::size_t finite_count() const;

    bool operator==(const ComplexityTable& other) const;

private:
    void reindex();

    Digest fingerprint_{};
    Mode mode_ = Mode::plain;
    unsigned max_program_bits_ = 0;
    unsigned budget_ = 0;
    std::vector<BitString> conditions_;
    std::vector<BitString> targets_;
    std::vector<WitnessKey> cells_;
    std::unordered_map<BitString, std::size_t> condition_index_;
    std::unordered_map<BitString, std::size_t> target_index_;
};

struct BuildOptions {
    unsigned max_program_bits = 24;
    unsigned budget = 1024;
    unsigned workers = 1;  // 0 = hardware concurrency
    std::uint64_t work_ceiling = kDefaultWorkCeiling;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Exact time-bounded complexities for every (condition, target) pair: the
/// length-lex first program of length <= P that halts within T on the
/// condition with the target as output. Independent of worker count.
ComplexityTable build_table(const MachineDescriptor& machine, const std::vector<BitString>& conditions,
                            const std::vector<BitString>& targets, const BuildOptions& options);

/// Throws std::invalid_argument unless the table is plain-mode; NotComputed if out of domain.
Complexity lookup_c(const ComplexityTable& table, const BitString& x, const BitString& condition);
/// Throws std::invalid_argument unless the table is prefix-mode; NotComputed if out of domain.
Complexity lookup_k(const ComplexityTable& table, const BitString& x, const BitString& condition);

/// C_T(<a,b>) with the empty condition.
Complexity pair_complexity(const ComplexityTable& table, const BitString& a, const BitString& b);

/// Strings y with C_T(<a,y>) <= n, in discovery (witness length-lex) order.
struct SliceCount {
    unsigned n = 0;
    BitString a;
    std::vector<BitString> ys;  // ordinal index = position

    [[nodiscard]] std::uint64_t count() const noexcept { return ys.size(); }
    [[nodiscard]] std::optional<std::uint64_t> ordinal_of(const BitString& y) const;
};

/// Slices of a plain-mode table over pair encodings with the empty condition,
/// sorted by a (length-lex). Only pair targets inside the table's domain count.
std::vector<SliceCount> enumerate_slices(const ComplexityTable& table, unsigned n);

/// Exact dyadic rational numerator / 2^exponent.
struct Dyadic {
    std::uint64_t numerator = 0;
    unsigned exponent = 0;
    bool operator==(const Dyadic&) const = default;
};

/// P(a|n) = N_a 2^{-n-1}.
Dyadic semimeasure(const SliceCount& slice);

/// True when the sum of the dyadics is <= 1, computed exactly.
bool dyadic_sum_at_most_one(const std::vector<Dyadic>& terms);

inline constexpr unsigned kMaxKraftProgramBits = 20;

/// counts[l] = number of programs of length l that halt within the budget on
/// the condition. Exhaustive, so limited to 20 bits.
std::vector<std::uint64_t> halting_program_counts(const MachineDescriptor& machine, const BitString& condition,
                                                  unsigned max_program_bits, unsigned budget);

/// sum_l counts[l] 2^-l as an exact dyadic.
Dyadic kraft_sum(const std::vector<std::uint64_t>& counts);

// ---- cache files --------------------------------------------------------

struct CacheError : std::runtime_error {
    enum class Kind { io_failure, corrupt, fingerprint_mismatch, config_mismatch };
    Kind kind;
    CacheError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

std::vector<std::uint8_t> serialize_table(const ComplexityTable& table);
ComplexityTable deserialize_table(const std::vector<std::uint8_t>& bytes);

void save_cache(const ComplexityTable& table, const std::string& path);

/// Loads and validates a cache. The fingerprint is checked before the trailing
/// digest, so a foreign machine reports fingerprint_mismatch and any other
/// alteration reports corrupt. P and T must equal the requested values.
ComplexityTable load_cache(const std::string& path, const Digest& expected_fingerprint, unsigned max_program_bits,
                           unsigned budget);

}  // namespace klab
