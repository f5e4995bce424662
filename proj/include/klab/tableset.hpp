#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "klab/enumerator.hpp"
#include "klab/machine.hpp"

namespace klab {

/// L: max total length of a pair (singles go to L+2), P: max program bits,
/// T: step budget.
struct Scale {
    unsigned L = 4;
    unsigned P = 24;
    unsigned T = 1024;

    bool operator==(const Scale&) const = default;
};

/// A required condition row was never built.
struct MissingCondition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lengths of r used by the counterexample trend.
inline const std::vector<unsigned> kCounterexampleLengths = {2, 4, 8};

inline unsigned singles_bound(const Scale& s) { return s.L + 2; }
/// Longest y in the pair universe <a,y> used for slice counting.
unsigned slice_y_bound(const Scale& s);

struct BlockPlan {
    std::string name;
    Mode mode;
    std::vector<BitString> conditions;
    std::vector<BitString> targets;
};

/// Every table needed by the identity checks at a scale.
std::vector<BlockPlan> plan_blocks(const Scale& scale);

/// The collection of tables the identity checks read from, plus optional
/// hand-set stub values (used by tests).
class TableSet {
public:
    TableSet() = default;
    TableSet(MachineDescriptor plain, MachineDescriptor prefix, Scale scale);

    void add(ComplexityTable table);
    void set_stub(Mode mode, const BitString& target, const BitString& condition, Complexity value);

    [[nodiscard]] Complexity value(Mode mode, const BitString& target, const BitString& condition) const;
    [[nodiscard]] Complexity c(const BitString& x, const BitString& condition = {}) const {
        return value(Mode::plain, x, condition);
    }
    [[nodiscard]] Complexity k(const BitString& x, const BitString& condition = {}) const {
        return value(Mode::prefix, x, condition);
    }
    [[nodiscard]] std::optional<BitString> witness(Mode mode, const BitString& target,
                                                   const BitString& condition) const;

    [[nodiscard]] bool has_condition(Mode mode, const BitString& condition) const;
    /// Throws MissingCondition when no table or stub carries the row.
    void require(Mode mode, const BitString& condition) const;

    /// Plain table with the empty condition and the most targets; nullptr if none.
    [[nodiscard]] const ComplexityTable* slice_table() const;

    [[nodiscard]] const std::vector<ComplexityTable>& tables() const noexcept { return tables_; }
    [[nodiscard]] const Scale& scale() const noexcept { return scale_; }
    void set_scale(const Scale& s) { scale_ = s; }
    [[nodiscard]] bool has_machines() const noexcept { return plain_.has_value() && prefix_.has_value(); }
    [[nodiscard]] const MachineDescriptor& plain_machine() const { return *plain_; }
    [[nodiscard]] const MachineDescriptor& prefix_machine() const { return *prefix_; }
    /// Fingerprint binding both machine modes; zero when built from stubs only.
    [[nodiscard]] Digest fingerprint() const;

private:
    std::optional<MachineDescriptor> plain_;
    std::optional<MachineDescriptor> prefix_;
    Scale scale_{};
    std::vector<ComplexityTable> tables_;
    std::map<std::pair<int, BitString>, std::vector<std::size_t>> by_condition_;
    std::map<std::tuple<int, BitString, BitString>, Complexity> stubs_;
    std::map<std::pair<int, BitString>, int> stub_conditions_;
};

struct WorkbenchOptions {
    unsigned workers = 0;
    std::string cache_dir;  // empty: no caching
    std::ostream* log = nullptr;
};

/// Loads every planned block from the cache directory or builds and saves
/// it. Throws CacheError on a tampered or foreign cache, CapacityExceeded on
/// scale limits.
TableSet build_tableset(const Scale& scale, const WorkbenchOptions& options);

std::string cache_file_name(const BlockPlan& block, const Scale& scale);

}  // namespace klab
