#include "klab/report.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <sstream>

namespace klab {

namespace {

struct IdentityName {
    IdentityId id;
    const char* name;
};

constexpr std::array<IdentityName, 18> kIdentityNames = {{
    {IdentityId::THM1, "THM1"},
    {IdentityId::THM1_UPPER, "THM1_UPPER"},
    {IdentityId::THM1_LOWER_K, "THM1_LOWER_K"},
    {IdentityId::THM1_LOWER_C, "THM1_LOWER_C"},
    {IdentityId::PROP2, "PROP2"},
    {IdentityId::COR_CKC, "COR_CKC"},
    {IdentityId::COR_KKK, "COR_KKK"},
    {IdentityId::COR_EMPTY_B, "COR_EMPTY_B"},
    {IdentityId::COR_EMPTY_A, "COR_EMPTY_A"},
    {IdentityId::COR_KC_EQ_CC, "COR_KC_EQ_CC"},
    {IdentityId::COR_FUNC, "COR_FUNC"},
    {IdentityId::LEVIN_FP, "LEVIN_FP"},
    {IdentityId::GACS_ID, "GACS_ID"},
    {IdentityId::PREFIX_PAIR, "PREFIX_PAIR"},
    {IdentityId::COUNTEREX, "COUNTEREX"},
    {IdentityId::PROP3_FP, "PROP3_FP"},
    {IdentityId::PROP3_SUMS, "PROP3_SUMS"},
    {IdentityId::REMARK_SCAN, "REMARK_SCAN"},
}};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

const std::vector<IdentityId>& all_identities() {
    static const std::vector<IdentityId> ids = [] {
        std::vector<IdentityId> v;
        for (const auto& e : kIdentityNames) v.push_back(e.id);
        return v;
    }();
    return ids;
}

const char* to_string(IdentityId id) {
    for (const auto& e : kIdentityNames) {
        if (e.id == id) return e.name;
    }
    return "?";
}

std::optional<IdentityId> identity_from_string(const std::string& s) {
    for (const auto& e : kIdentityNames) {
        if (s == e.name) return e.id;
    }
    return std::nullopt;
}

const char* to_string(ExcludedReason r) { return r == ExcludedReason::infinity ? "Infinity" : "NotComputed"; }

ReportItem ReportItem::included(std::string id, std::int64_t deviation, nlohmann::json detail) {
    return {std::move(id), deviation, std::nullopt, std::move(detail)};
}

ReportItem ReportItem::excluded_item(std::string id, ExcludedReason reason, nlohmann::json detail) {
    return {std::move(id), std::nullopt, reason, std::move(detail)};
}

std::optional<ReportStats> DeviationReport::stats() const {
    std::optional<ReportStats> s;
    long double sum = 0;
    std::size_t n = 0;
    for (const auto& item : items) {
        if (!item.deviation) continue;
        std::int64_t d = *item.deviation;
        if (!s) s = ReportStats{d, d, 0};
        s->min = std::min(s->min, d);
        s->max = std::max(s->max, d);
        sum += d;
        ++n;
    }
    if (s) s->mean = static_cast<double>(sum / static_cast<long double>(n));
    return s;
}

std::size_t DeviationReport::included_count() const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [](const ReportItem& i) { return i.deviation.has_value(); }));
}

double DeviationReport::coverage() const {
    if (items.empty()) return 0.0;
    return static_cast<double>(included_count()) / static_cast<double>(items.size());
}

std::int64_t DeviationReport::max_abs_deviation() const {
    std::int64_t m = 0;
    for (const auto& item : items) {
        if (item.deviation) m = std::max<std::int64_t>(m, std::llabs(*item.deviation));
    }
    return m;
}

std::string DeviationReport::key() const {
    std::ostringstream os;
    os << to_string(identity);
    if (!variant.empty()) os << '/' << variant;
    os << " L=" << scale.L << " P=" << scale.P << " T=" << scale.T;
    return os.str();
}

nlohmann::json to_json(const DeviationReport& r) {
    nlohmann::json j;
    j["identity_id"] = to_string(r.identity);
    if (!r.variant.empty()) j["variant"] = r.variant;
    j["scale"] = {{"L", r.scale.L}, {"P", r.scale.P}, {"T", r.scale.T}};
    j["machine_fingerprint"] = r.machine_fingerprint.to_hex();
    if (auto s = r.stats()) {
        j["stats"] = {{"min", s->min}, {"max", s->max}, {"mean", s->mean}};
    } else {
        j["stats"] = nullptr;
    }
    j["coverage"] = r.coverage();
    auto items = nlohmann::json::array();
    for (const auto& item : r.items) {
        nlohmann::json ji;
        ji["id"] = item.id;
        if (item.deviation) {
            ji["deviation"] = *item.deviation;
        } else {
            ji["excluded_reason"] = to_string(*item.excluded);
        }
        if (!item.detail.is_null()) ji["detail"] = item.detail;
        items.push_back(std::move(ji));
    }
    j["items"] = std::move(items);
    if (!r.detail.is_null()) j["detail"] = r.detail;
    return j;
}

DeviationReport report_from_json(const nlohmann::json& j) {
    DeviationReport r;
    auto id = identity_from_string(j.at("identity_id").get<std::string>());
    if (!id) throw std::invalid_argument("report: unknown identity_id");
    r.identity = *id;
    if (j.contains("variant")) r.variant = j.at("variant").get<std::string>();
    const auto& sc = j.at("scale");
    r.scale = {sc.at("L").get<unsigned>(), sc.at("P").get<unsigned>(), sc.at("T").get<unsigned>()};
    r.machine_fingerprint = Digest::from_hex(j.at("machine_fingerprint").get<std::string>());
    for (const auto& ji : j.at("items")) {
        ReportItem item;
        item.id = ji.at("id").get<std::string>();
        if (ji.contains("deviation")) {
            item.deviation = ji.at("deviation").get<std::int64_t>();
        } else {
            auto reason = ji.at("excluded_reason").get<std::string>();
            if (reason == "Infinity") {
                item.excluded = ExcludedReason::infinity;
            } else if (reason == "NotComputed") {
                item.excluded = ExcludedReason::not_computed;
            } else {
                throw std::invalid_argument("report: bad excluded_reason " + reason);
            }
        }
        if (ji.contains("detail")) item.detail = ji.at("detail");
        r.items.push_back(std::move(item));
    }
    if (j.contains("detail")) r.detail = j.at("detail");
    return r;
}

std::string to_csv(const std::vector<DeviationReport>& reports) {
    std::ostringstream os;
    os << "identity_id,variant,L,P,T,machine_fingerprint,min,max,mean,coverage,id,deviation,excluded_reason\n";
    for (const auto& r : reports) {
        auto s = r.stats();
        std::ostringstream prefix;
        prefix << to_string(r.identity) << ',' << csv_escape(r.variant) << ',' << r.scale.L << ',' << r.scale.P
               << ',' << r.scale.T << ',' << r.machine_fingerprint.to_hex() << ',';
        if (s) {
            prefix << s->min << ',' << s->max << ',' << s->mean;
        } else {
            prefix << ",,";
        }
        prefix << ',' << r.coverage() << ',';
        for (const auto& item : r.items) {
            os << prefix.str() << csv_escape(item.id) << ',';
            if (item.deviation) {
                os << *item.deviation << ',';
            } else {
                os << ',' << to_string(*item.excluded);
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace klab
