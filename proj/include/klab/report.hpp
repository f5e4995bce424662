#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "klab/digest.hpp"
#include "klab/enumerator.hpp"
#include "klab/tableset.hpp"

namespace klab {

enum class IdentityId {
    THM1,
    THM1_UPPER,
    THM1_LOWER_K,
    THM1_LOWER_C,
    PROP2,
    COR_CKC,
    COR_KKK,
    COR_EMPTY_B,
    COR_EMPTY_A,
    COR_KC_EQ_CC,
    COR_FUNC,
    LEVIN_FP,
    GACS_ID,
    PREFIX_PAIR,
    COUNTEREX,
    PROP3_FP,
    PROP3_SUMS,
    REMARK_SCAN,
};

const std::vector<IdentityId>& all_identities();
const char* to_string(IdentityId id);
std::optional<IdentityId> identity_from_string(const std::string& s);

enum class ExcludedReason { infinity, not_computed };
const char* to_string(ExcludedReason r);

struct ReportItem {
    std::string id;
    std::optional<std::int64_t> deviation;
    std::optional<ExcludedReason> excluded;
    nlohmann::json detail;  // null when absent

    static ReportItem included(std::string id, std::int64_t deviation, nlohmann::json detail = nullptr);
    static ReportItem excluded_item(std::string id, ExcludedReason reason, nlohmann::json detail = nullptr);
    bool operator==(const ReportItem&) const = default;
};

struct ReportStats {
    std::int64_t min = 0;
    std::int64_t max = 0;
    double mean = 0;
    bool operator==(const ReportStats&) const = default;
};

struct DeviationReport {
    IdentityId identity = IdentityId::THM1;
    std::string variant;  // distinguishes COR_FUNC functions; empty otherwise
    Scale scale{};
    Digest machine_fingerprint{};
    std::vector<ReportItem> items;
    nlohmann::json detail;  // report-level extras, null when absent

    /// Undefined (nullopt) when no item is included.
    [[nodiscard]] std::optional<ReportStats> stats() const;
    [[nodiscard]] double coverage() const;
    [[nodiscard]] std::size_t included_count() const;
    /// max |deviation| over included items, 0 when none.
    [[nodiscard]] std::int64_t max_abs_deviation() const;
    [[nodiscard]] std::string key() const;
    bool operator==(const DeviationReport&) const = default;
};

nlohmann::json to_json(const DeviationReport& report);
DeviationReport report_from_json(const nlohmann::json& j);

/// Header row plus one row per item.
std::string to_csv(const std::vector<DeviationReport>& reports);

}  // namespace klab
