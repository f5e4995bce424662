#pragma once

// Regression bounds on max |deviation| per identity, pinned from the first
// full run of the frozen klab-ref v1 machine at L=4, P=24, T=1024. Changing a
// value here is a reviewed action: record the run that justified it.

#include <cstdint>
#include <optional>
#include <string_view>

#include "klab/report.hpp"

namespace klab {

struct PinnedBound {
    IdentityId id;
    std::string_view variant;
    std::int64_t bound;
    bool one_sided = false;  // bound the signed maximum only
};

inline constexpr Scale kPinnedScale{4, 24, 1024};

// klab-ref v1, L=4 P=24 T=1024 (singles to length 6, Levin to length 5).
inline constexpr PinnedBound kPinnedBounds[] = {
    {IdentityId::THM1, "", 5},
    {IdentityId::THM1_UPPER, "", 5},
    {IdentityId::THM1_LOWER_K, "", -1, true},
    {IdentityId::THM1_LOWER_C, "", 3, true},
    {IdentityId::PROP2, "", 5},
    {IdentityId::COR_CKC, "", 11},
    {IdentityId::COR_KKK, "", 14},
    {IdentityId::COR_EMPTY_B, "", 3},
    {IdentityId::COR_EMPTY_A, "", 0},
    {IdentityId::COR_KC_EQ_CC, "", 3},
    {IdentityId::COR_FUNC, "identity", 15},
    {IdentityId::COR_FUNC, "const-empty", 3},
    {IdentityId::COR_FUNC, "length", 7},
    {IdentityId::LEVIN_FP, "", 3},
    {IdentityId::GACS_ID, "", 7},
    {IdentityId::PREFIX_PAIR, "", 9},
    {IdentityId::PROP3_FP, "", 0},
    {IdentityId::PROP3_SUMS, "", 8},
};

/// nullptr for report-only identities (COUNTEREX, REMARK_SCAN).
inline const PinnedBound* pinned_bound(IdentityId id, std::string_view variant) {
    for (const auto& b : kPinnedBounds) {
        if (b.id == id && b.variant == variant) return &b;
    }
    return nullptr;
}

/// The value compared against the pinned bound.
inline std::int64_t bounded_quantity(const DeviationReport& r, const PinnedBound& b) {
    if (!b.one_sided) return r.max_abs_deviation();
    auto s = r.stats();
    return s ? s->max : 0;
}

inline bool within_pinned_bound(const DeviationReport& r) {
    const PinnedBound* b = pinned_bound(r.identity, r.variant);
    return !b || bounded_quantity(r, *b) <= b->bound;
}

}  // namespace klab
