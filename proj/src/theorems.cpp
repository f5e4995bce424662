#include "klab/theorems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "klab/bitcodec.hpp"

namespace klab {

using nlohmann::json;

namespace {

DeviationReport make_report(const TableSet& t, IdentityId id, unsigned L) {
    DeviationReport r;
    r.identity = id;
    r.scale = t.scale();
    r.scale.L = L;
    r.machine_fingerprint = t.fingerprint();
    return r;
}

json cj(const Complexity& c) {
    switch (c.kind) {
        case Complexity::Kind::finite: return c.bits;
        case Complexity::Kind::infinity: return "Infinity";
        default: return "NotComputed";
    }
}

/// NotComputed wins over Infinity so that domain gaps stay visible.
std::optional<ExcludedReason> bad(std::initializer_list<Complexity> cs) {
    std::optional<ExcludedReason> out;
    for (const auto& c : cs) {
        if (c.kind == Complexity::Kind::not_computed) return ExcludedReason::not_computed;
        if (c.kind == Complexity::Kind::infinity) out = ExcludedReason::infinity;
    }
    return out;
}

ReportItem item_from(std::string id, std::initializer_list<Complexity> terms, std::int64_t deviation, json detail) {
    if (auto reason = bad(terms)) return ReportItem::excluded_item(std::move(id), *reason, std::move(detail));
    return ReportItem::included(std::move(id), deviation, std::move(detail));
}

std::int64_t v(const Complexity& c) { return static_cast<std::int64_t>(c.bits); }

BitString nat(std::uint64_t n) { return nat_to_bits(n); }

BitString cond2(const BitString& a, const BitString& b) { return condition_encode({a, b}); }

Complexity need_c(const TableSet& t, const BitString& x, const BitString& cond) {
    t.require(Mode::plain, cond);
    return t.c(x, cond);
}

Complexity need_k(const TableSet& t, const BitString& x, const BitString& cond) {
    t.require(Mode::prefix, cond);
    return t.k(x, cond);
}

unsigned floor_log2(std::uint64_t n) { return static_cast<unsigned>(std::bit_width(n)) - 1; }
unsigned ceil_log2(std::uint64_t n) { return n <= 1 ? 0 : static_cast<unsigned>(std::bit_width(n - 1)); }

std::vector<BitString> singles_up_to(unsigned n) { return all_strings_up_to(n); }

}  // namespace

std::string single_id(const BitString& a) { return a.pretty(); }

std::string pair_id(const BitString& a, const BitString& b) { return a.pretty() + "," + b.pretty(); }

std::vector<std::pair<BitString, BitString>> pairs_up_to(unsigned total) {
    std::vector<std::pair<BitString, BitString>> out;
    for (unsigned t = 0; t <= total; ++t) {
        for (unsigned la = 0; la <= t; ++la) {
            for (const auto& a : all_strings_of_length(la)) {
                for (const auto& b : all_strings_of_length(t - la)) out.emplace_back(a, b);
            }
        }
    }
    return out;
}

// ---- additivity of the pair complexity -----------------------------------

DeviationReport check_theorem1(const TableSet& t, unsigned L) {
    auto report = make_report(t, IdentityId::THM1, L);
    for (const auto& [a, b] : pairs_up_to(L)) {
        std::string id = pair_id(a, b);
        Complexity n = t.c(pair_encode(a, b));
        if (!n.is_finite()) {
            report.items.push_back(item_from(id, {n}, 0, {{"C_ab", cj(n)}}));
            continue;
        }
        Complexity ka = need_k(t, a, nat(n.bits));
        Complexity cb = need_c(t, b, cond2(a, nat(n.bits)));
        json detail = {{"C_ab", n.bits}, {"K_a_n", cj(ka)}, {"C_b_an", cj(cb)}};
        report.items.push_back(item_from(id, {ka, cb}, v(n) - v(ka) - v(cb), std::move(detail)));
    }
    return report;
}

DeviceRun run_concatenation_device(const TableSet& t, const BitString& description) {
    DeviceRun out;
    out.description_bits = description.size();
    if (!t.has_machines()) return out;
    SelfDelimDecoded head;
    try {
        head = selfdelim_decode(description);
    } catch (const MalformedCode&) {
        return out;
    }
    const std::uint64_t n = head.rest.size() + bits_to_nat(head.value);
    const BitString nb = nat(n);
    const unsigned budget = t.scale().T;
    RunResult ra = run_stream(t.prefix_machine(), head.rest, nb, budget);
    if (ra.status != RunStatus::halted) return out;
    BitString q = head.rest.substr(ra.program_bits_read);
    RunResult rb = run(t.plain_machine(), q, cond2(ra.output, nb), budget);
    if (rb.status != RunStatus::halted) return out;
    out.ok = true;
    out.a = ra.output;
    out.b = rb.output;
    return out;
}

DeviationReport check_thm1_upper(const TableSet& t, unsigned L) {
    auto report = make_report(t, IdentityId::THM1_UPPER, L);
    std::size_t devices_run = 0;
    std::size_t devices_ok = 0;
    for (const auto& [a, b] : pairs_up_to(L)) {
        std::string id = pair_id(a, b);
        Complexity n = t.c(pair_encode(a, b));
        if (!n.is_finite()) {
            report.items.push_back(item_from(id, {n}, 0, {{"C_ab", cj(n)}}));
            continue;
        }
        const BitString nb = nat(n.bits);
        const BitString an = cond2(a, nb);
        Complexity ka = need_k(t, a, nb);
        Complexity cb = need_c(t, b, an);
        if (auto reason = bad({ka, cb})) {
            report.items.push_back(ReportItem::excluded_item(id, *reason, {{"C_ab", n.bits}}));
            continue;
        }
        auto p = t.witness(Mode::prefix, a, nb);
        auto q = t.witness(Mode::plain, b, an);
        std::int64_t plen = p ? static_cast<std::int64_t>(p->size()) : v(ka);
        std::int64_t qlen = q ? static_cast<std::int64_t>(q->size()) : v(cb);
        std::int64_t d = v(n) - plen - qlen;
        json detail = {{"C_ab", n.bits}, {"p_bits", plen}, {"q_bits", qlen}};
        if (p && q && d >= 0) {
            BitString description = selfdelim_encode(nat(static_cast<std::uint64_t>(d))) + *p + *q;
            DeviceRun run = run_concatenation_device(t, description);
            bool ok = run.ok && run.a == a && run.b == b;
            ++devices_run;
            devices_ok += ok ? 1 : 0;
            detail["device_bits"] = description.size();
            detail["device_ok"] = ok;
        }
        report.items.push_back(ReportItem::included(id, d, std::move(detail)));
    }
    report.detail = {{"devices_run", devices_run}, {"devices_ok", devices_ok}};
    return report;
}

std::pair<DeviationReport, DeviationReport> check_thm1_lower(const TableSet& t, unsigned L) {
    auto rk = make_report(t, IdentityId::THM1_LOWER_K, L);
    auto rc = make_report(t, IdentityId::THM1_LOWER_C, L);
    const ComplexityTable* st = t.slice_table();
    if (!st) throw MissingCondition("no plain table with the empty condition for slice counting");

    std::map<unsigned, std::map<BitString, SliceCount>> slices;
    auto slice_of = [&](unsigned n, const BitString& a) -> const SliceCount* {
        auto it = slices.find(n);
        if (it == slices.end()) {
            std::map<BitString, SliceCount> by_a;
            for (auto& s : enumerate_slices(*st, n)) by_a.emplace(s.a, std::move(s));
            it = slices.emplace(n, std::move(by_a)).first;
        }
        auto jt = it->second.find(a);
        return jt == it->second.end() ? nullptr : &jt->second;
    };

    std::set<std::pair<BitString, unsigned>> seen_an;
    for (const auto& [a, b] : pairs_up_to(L)) {
        Complexity n = t.c(pair_encode(a, b));
        std::string id = pair_id(a, b);
        if (!n.is_finite()) {
            rc.items.push_back(item_from(id, {n}, 0, nullptr));
            continue;
        }
        const SliceCount* slice = slice_of(n.bits, a);
        const std::uint64_t na = slice ? slice->count() : 0;
        if (na == 0) {
            rc.items.push_back(ReportItem::excluded_item(id, ExcludedReason::not_computed, {{"n", n.bits}}));
            continue;
        }
        const BitString nb = nat(n.bits);
        if (seen_an.emplace(a, n.bits).second) {
            Complexity ka = need_k(t, a, nb);
            std::int64_t bound = v(n) - floor_log2(na);
            rk.items.push_back(item_from(a.pretty() + "|" + std::to_string(n.bits), {ka}, v(ka) - bound,
                                         {{"n", n.bits}, {"N_a", na}, {"K_a_n", cj(ka)}}));
        }
        Complexity cb = need_c(t, b, cond2(a, nb));
        json detail = {{"n", n.bits}, {"N_a", na}, {"C_b_an", cj(cb)}};
        if (auto ord = slice->ordinal_of(b)) detail["ordinal"] = *ord;
        rc.items.push_back(item_from(id, {cb}, v(cb) - ceil_log2(na), std::move(detail)));
    }

    // Counting bound per n: sum_a N_a <= 2^(n+1), also as an exact dyadic sum.
    json counting = json::array();
    const unsigned y_bound = slice_y_bound(t.scale());
    for (const auto& [n, by_a] : slices) {
        std::uint64_t total = 0;
        std::size_t boundary = 0;
        std::vector<Dyadic> terms;
        for (const auto& [a, s] : by_a) {
            total += s.count();
            terms.push_back(semimeasure(s));
            for (const auto& y : s.ys) boundary += y.size() == y_bound ? 1 : 0;
        }
        counting.push_back({{"n", n},
                            {"sum_N_a", total},
                            {"bound", std::uint64_t{1} << (n + 1)},
                            {"holds", dyadic_sum_at_most_one(terms) && total <= (std::uint64_t{1} << (n + 1))},
                            {"boundary_hits", boundary}});
    }
    rk.detail = {{"counting", counting}, {"y_bound", y_bound}};
    rc.detail = rk.detail;
    return {std::move(rk), std::move(rc)};
}

// ---- corollaries -----------------------------------------------------------

std::vector<DeviationReport> check_corollaries(const TableSet& t, unsigned L) {
    auto ckc = make_report(t, IdentityId::COR_CKC, L);
    auto kkk = make_report(t, IdentityId::COR_KKK, L);
    auto eb = make_report(t, IdentityId::COR_EMPTY_B, L);
    auto ea = make_report(t, IdentityId::COR_EMPTY_A, L);
    auto kc = make_report(t, IdentityId::COR_KC_EQ_CC, L);
    auto gacs = make_report(t, IdentityId::GACS_ID, L);
    auto pp = make_report(t, IdentityId::PREFIX_PAIR, L);

    for (const auto& a : singles_up_to(L + 2)) {
        std::string id = single_id(a);
        Complexity c = t.c(a);
        Complexity k = t.k(a);
        if (!c.is_finite()) {
            for (auto* r : {&ckc, &eb, &ea, &kc}) r->items.push_back(item_from(id, {c}, 0, nullptr));
        } else {
            const BitString cb = nat(c.bits);
            Complexity c_self = t.c(pair_encode(a, cb));
            ckc.items.push_back(item_from(id, {c_self}, v(c_self) - v(c), {{"C_a", c.bits}, {"C_a_Ca", cj(c_self)}}));
            Complexity k_given = need_k(t, a, cb);
            eb.items.push_back(item_from(id, {k_given}, v(c) - v(k_given), {{"C_a", c.bits}, {"K_a_Ca", cj(k_given)}}));
            Complexity c_given = need_c(t, a, cb);
            ea.items.push_back(item_from(id, {c_given}, v(c) - v(c_given), {{"C_a", c.bits}, {"C_a_Ca", cj(c_given)}}));
            kc.items.push_back(item_from(id, {c_given, k_given}, v(c_given) - v(k_given),
                                         {{"C_u_Cu", cj(c_given)}, {"K_u_Cu", cj(k_given)}}));
        }
        if (!k.is_finite()) {
            kkk.items.push_back(item_from(id, {k}, 0, nullptr));
        } else {
            Complexity k_self = t.k(pair_encode(a, nat(k.bits)));
            kkk.items.push_back(item_from(id, {k_self}, v(k_self) - v(k), {{"K_a", k.bits}, {"K_a_Ka", cj(k_self)}}));
        }
    }

    for (const auto& [a, b] : pairs_up_to(L)) {
        std::string id = pair_id(a, b);
        const BitString ab = pair_encode(a, b);
        Complexity n = t.c(ab);
        if (!n.is_finite()) {
            gacs.items.push_back(item_from(id, {n}, 0, nullptr));
        } else {
            Complexity k_ab = need_k(t, ab, nat(n.bits));
            gacs.items.push_back(item_from(id, {k_ab}, v(n) - v(k_ab), {{"C_ab", n.bits}, {"K_ab_n", cj(k_ab)}}));
        }
        Complexity kab = t.k(ab);
        Complexity ka = t.k(a);
        if (!ka.is_finite()) {
            pp.items.push_back(item_from(id, {kab, ka}, 0, nullptr));
            continue;
        }
        Complexity kb = need_k(t, b, cond2(a, nat(ka.bits)));
        pp.items.push_back(item_from(id, {kab, kb}, v(kab) - v(ka) - v(kb),
                                     {{"K_ab", cj(kab)}, {"K_a", ka.bits}, {"K_b_aKa", cj(kb)}}));
    }
    return {ckc, kkk, eb, ea, kc, gacs, pp};
}

LevinResult levin_fixed_point(const TableSet& t, const BitString& a, unsigned i_max) {
    LevinResult out;
    out.c = t.c(a);
    json values = json::array();
    for (unsigned i = 0; i <= i_max; ++i) {
        Complexity k = need_k(t, a, nat(i));
        values.push_back(cj(k));
        bool below = k.is_finite() && k.bits <= i;
        if (!out.i_star && below) {
            out.i_star = i;
        } else if (out.i_star && !below) {
            out.violations.push_back(i);
        }
    }
    if (!out.violations.empty()) out.window = out.violations.back() - *out.i_star;
    json detail = {{"C_a", cj(out.c)}, {"violations", out.violations}, {"window", out.window}};
    std::string id = single_id(a);
    if (!out.i_star) {
        detail["i_star"] = nullptr;
        out.row = ReportItem::excluded_item(id, ExcludedReason::infinity, detail);
    } else {
        detail["i_star"] = *out.i_star;
        out.row = item_from(id, {out.c}, static_cast<std::int64_t>(*out.i_star) - v(out.c), detail);
    }
    return out;
}

DeviationReport check_levin(const TableSet& t, unsigned max_len, unsigned i_max) {
    auto report = make_report(t, IdentityId::LEVIN_FP, t.scale().L);
    std::size_t flagged = 0;
    for (const auto& a : singles_up_to(max_len)) {
        auto res = levin_fixed_point(t, a, i_max);
        flagged += res.violations.empty() ? 0 : 1;
        report.items.push_back(std::move(res.row));
    }
    report.detail = {{"max_len", max_len}, {"i_max", i_max}, {"strings_with_violations", flagged}};
    return report;
}

DeviationReport check_function_corollary(const TableSet& t, const StringFunction& f, const std::string& name,
                                         unsigned max_len) {
    auto report = make_report(t, IdentityId::COR_FUNC, t.scale().L);
    report.variant = name;
    for (const auto& b : singles_up_to(max_len)) {
        std::string id = single_id(b);
        Complexity c = t.c(b);
        if (!c.is_finite()) {
            report.items.push_back(item_from(id, {c}, 0, nullptr));
            continue;
        }
        const BitString fb = f(b);
        const BitString cb = nat(c.bits);
        Complexity kf = need_k(t, fb, cb);
        Complexity cf = need_c(t, b, cond2(fb, cb));
        report.items.push_back(item_from(id, {kf, cf}, v(c) - v(kf) - v(cf),
                                         {{"f_b", fb.pretty()}, {"C_b", c.bits}, {"K_fb_Cb", cj(kf)}, {"C_b_fbCb", cj(cf)}}));
    }
    return report;
}

std::vector<std::pair<std::string, StringFunction>> builtin_functions() {
    return {
        {"identity", [](const BitString& b) { return b; }},
        {"const-empty", [](const BitString&) { return BitString{}; }},
        {"length", [](const BitString& b) { return nat_to_bits(b.size()); }},
    };
}

DeviationReport check_prop2(const TableSet& t, unsigned L) {
    auto report = make_report(t, IdentityId::PROP2, L);
    for (const auto& [a, b] : pairs_up_to(L)) {
        std::string id = pair_id(a, b);
        Complexity n = t.c(pair_encode(a, b));
        if (!n.is_finite()) {
            report.items.push_back(item_from(id, {n}, 0, nullptr));
            continue;
        }
        Complexity m = need_k(t, a, nat(n.bits));
        if (!m.is_finite()) {
            report.items.push_back(item_from(id, {m}, 0, {{"C_ab", n.bits}}));
            continue;
        }
        Complexity cb = need_c(t, b, cond2(a, nat(m.bits)));
        Complexity cb_thm1 = t.c(b, cond2(a, nat(n.bits)));
        report.items.push_back(item_from(id, {cb}, v(n) - v(m) - v(cb),
                                         {{"C_ab", n.bits}, {"K_a_n", m.bits}, {"C_b_am", cj(cb)}, {"C_b_an", cj(cb_thm1)}}));
    }
    return report;
}

// ---- counterexample ---------------------------------------------------------

double counterexample_reference(unsigned n) {
    double ln = std::log2(static_cast<double>(n));
    return ln - 2.0 * std::log2(ln);
}

CounterexampleRow counterexample_at(const TableSet& t, unsigned n) {
    CounterexampleRow row;
    row.n = n;
    row.reference = counterexample_reference(n);
    bool found = false;
    for (const auto& r : all_strings_of_length(n)) {
        for (unsigned i = 0; i <= n; ++i) {
            Complexity c = t.c(pair_encode(r, nat(i)));
            if (c.is_finite() && (!found || c.bits > row.c_ri.bits)) {
                found = true;
                row.r = r;
                row.i = i;
                row.c_ri = c;
            }
        }
    }
    if (!found) throw ScaleTooSmall("no finite C(<r,i>) entry at n = " + std::to_string(n));
    row.x = row.r.substr(0, row.i);
    row.y = row.r.substr(row.i);
    row.c_xy = t.c(pair_encode(row.x, row.y));
    row.c_x = t.c(row.x);
    row.k_y_given_x = need_k(t, row.y, row.x);
    if (!bad({row.c_xy, row.c_x, row.k_y_given_x})) row.gap = v(row.c_xy) - v(row.c_x) - v(row.k_y_given_x);
    return row;
}

CounterexampleScan counterexample_scan(const TableSet& t, unsigned L) {
    CounterexampleScan scan;
    for (const auto& [x, y] : pairs_up_to(L)) {
        ++scan.pairs;
        Complexity cxy = t.c(pair_encode(x, y));
        Complexity cx = t.c(x);
        Complexity ky = need_k(t, y, x);
        if (bad({cxy, cx, ky})) continue;
        ++scan.covered;
        std::int64_t gap = v(cxy) - v(cx) - v(ky);
        if (scan.covered == 1 || gap > scan.max_gap) scan.max_gap = gap;
        if (gap > 0) {
            ++scan.strict;
            if (!scan.example) scan.example = std::make_pair(x, y);
        }
    }
    return scan;
}

DeviationReport counterexample_search(const TableSet& t, const std::vector<unsigned>& n_values, unsigned L) {
    auto report = make_report(t, IdentityId::COUNTEREX, L);
    for (unsigned n : n_values) {
        std::string id = "n=" + std::to_string(n);
        try {
            auto row = counterexample_at(t, n);
            json detail = {{"n", n},
                           {"r", row.r.pretty()},
                           {"i", row.i},
                           {"x", row.x.pretty()},
                           {"y", row.y.pretty()},
                           {"C_ri", row.c_ri.bits},
                           {"C_xy", cj(row.c_xy)},
                           {"C_x", cj(row.c_x)},
                           {"K_y_x", cj(row.k_y_given_x)},
                           {"reference", row.reference}};
            report.items.push_back(item_from(id, {row.c_xy, row.c_x, row.k_y_given_x}, row.gap.value_or(0), detail));
        } catch (const ScaleTooSmall&) {
            report.items.push_back(ReportItem::excluded_item(
                id, ExcludedReason::infinity,
                {{"n", n}, {"scale_too_small", true}, {"reference", counterexample_reference(n)}}));
        }
    }
    auto scan = counterexample_scan(t, L);
    json s = {{"L", L}, {"pairs", scan.pairs}, {"covered", scan.covered}, {"strict", scan.strict},
              {"max_gap", scan.max_gap}};
    s["example"] = scan.example ? json(pair_id(scan.example->first, scan.example->second)) : json(nullptr);
    report.detail = {{"scan", s}};
    return report;
}

// ---- fixed points -----------------------------------------------------------

namespace {

Point apply_f(const TableSet& t, const BitString& x, const BitString& y, Point p) {
    Complexity k = need_c(t, x, nat(p.second));
    Complexity l = need_c(t, y, cond2(x, nat(p.first)));
    if (auto reason = bad({k, l})) {
        throw Diverged(*reason, "F(" + std::to_string(p.first) + "," + std::to_string(p.second) +
                                    ") has no finite value for " + pair_id(x, y));
    }
    return {k.bits, l.bits};
}

unsigned distance(unsigned a, unsigned b) { return a > b ? a - b : b - a; }

}  // namespace

unsigned fixed_point_residual(const TableSet& t, const BitString& x, const BitString& y, Point p) {
    Point f = apply_f(t, x, y, p);
    return distance(p.first, f.first) + distance(p.second, f.second);
}

FixedPoint fixed_point_kl(const TableSet& t, const BitString& x, const BitString& y, unsigned max_iter) {
    FixedPoint out;
    if (max_iter == 0) return out;
    out.trace.push_back(apply_f(t, x, y, {0, 0}));
    out.steps = 1;
    std::size_t cycle_start = 0;
    while (out.steps < max_iter) {
        Point next = apply_f(t, x, y, out.trace.back());
        ++out.steps;
        auto it = std::find(out.trace.begin(), out.trace.end(), next);
        if (it != out.trace.end()) {
            out.cycle_found = true;
            cycle_start = static_cast<std::size_t>(it - out.trace.begin());
            break;
        }
        out.trace.push_back(next);
    }
    // Without a cycle the whole trace is the candidate set.
    std::optional<std::pair<unsigned, Point>> best;
    for (std::size_t i = cycle_start; i < out.trace.size(); ++i) {
        Point p = out.trace[i];
        unsigned r = fixed_point_residual(t, x, y, p);
        if (!best || std::make_pair(r, p) < *best) best = std::make_pair(r, p);
    }
    out.cycle_length = out.cycle_found ? out.trace.size() - cycle_start : 0;
    out.residual = best->first;
    out.k = best->second.first;
    out.l = best->second.second;
    return out;
}

std::vector<ReportItem> check_prop3_sums(const TableSet& t, const BitString& x, const BitString& y, unsigned k,
                                         unsigned l) {
    const BitString xy = pair_encode(x, y);
    const std::int64_t sum = static_cast<std::int64_t>(k) + l;
    const std::string base = pair_id(x, y);
    Complexity both = need_c(t, xy, cond2(nat(k), nat(l)));
    Complexity only_k = need_c(t, xy, nat(k));
    Complexity only_l = need_c(t, xy, nat(l));
    json d = {{"k", k}, {"l", l}};
    return {
        item_from(base + "|k,l", {both}, v(both) - sum, d),
        item_from(base + "|k", {only_k}, v(only_k) - sum, d),
        item_from(base + "|l", {only_l}, v(only_l) - sum, d),
    };
}

std::pair<DeviationReport, DeviationReport> check_prop3(const TableSet& t, unsigned L, unsigned max_iter) {
    auto fp_report = make_report(t, IdentityId::PROP3_FP, L);
    auto sums = make_report(t, IdentityId::PROP3_SUMS, L);
    std::size_t cycles = 0;
    std::size_t exact = 0;
    std::size_t max_steps = 0;
    for (const auto& [x, y] : pairs_up_to(L)) {
        std::string id = pair_id(x, y);
        try {
            auto fp = fixed_point_kl(t, x, y, max_iter);
            cycles += fp.cycle_found ? 1 : 0;
            max_steps = std::max(max_steps, fp.steps);
            json trace = json::array();
            for (const auto& p : fp.trace) trace.push_back({p.first, p.second});
            fp_report.items.push_back(ReportItem::included(id, fp.residual,
                                                           {{"k", fp.k},
                                                            {"l", fp.l},
                                                            {"steps", fp.steps},
                                                            {"cycle_found", fp.cycle_found},
                                                            {"cycle_length", fp.cycle_length},
                                                            {"trace", trace}}));
            if (fp.residual == 0) {
                ++exact;
                for (auto& item : check_prop3_sums(t, x, y, fp.k, fp.l)) sums.items.push_back(std::move(item));
            }
        } catch (const Diverged& e) {
            fp_report.items.push_back(ReportItem::excluded_item(id, e.reason, {{"diverged", e.what()}}));
        }
    }
    fp_report.detail = {{"max_iter", max_iter}, {"cycles_found", cycles}, {"residual_zero", exact},
                        {"max_steps", max_steps}};
    return {std::move(fp_report), std::move(sums)};
}

RemarkScan remark_scan(const TableSet& t, const BitString& x, const BitString& y, unsigned box) {
    RemarkScan out;
    for (unsigned k = 0; k <= box; ++k) {
        Complexity cy = need_c(t, y, cond2(x, nat(k)));
        if (!cy.is_finite()) continue;
        for (unsigned l = 0; l <= box; ++l) {
            Complexity cx = need_c(t, x, nat(l));
            if (cx.is_finite() && cx.bits <= k && cy.bits <= l) out.candidates.emplace_back(k, l);
        }
    }
    auto dominates = [](Point p, Point q) { return p != q && p.first <= q.first && p.second <= q.second; };
    for (const auto& q : out.candidates) {
        bool dominated = std::any_of(out.candidates.begin(), out.candidates.end(),
                                     [&](const Point& p) { return dominates(p, q); });
        if (!dominated) out.frontier.push_back(q);
    }
    try {
        auto fp = fixed_point_kl(t, x, y);
        if (fp.residual == 0) {
            Point p{fp.k, fp.l};
            out.fixed_point = p;
            out.fixed_point_dominated = std::any_of(out.candidates.begin(), out.candidates.end(),
                                                    [&](const Point& c) { return dominates(c, p); });
        }
    } catch (const Diverged&) {
    }
    return out;
}

DeviationReport check_remark(const TableSet& t, unsigned L, unsigned box) {
    auto report = make_report(t, IdentityId::REMARK_SCAN, L);
    std::size_t dominated = 0;
    for (const auto& [x, y] : pairs_up_to(L)) {
        auto scan = remark_scan(t, x, y, box);
        json frontier = json::array();
        bool zero_l = false;
        for (const auto& p : scan.frontier) {
            frontier.push_back({p.first, p.second});
            zero_l = zero_l || p.second == 0;
        }
        json detail = {{"candidates", scan.candidates.size()}, {"frontier", frontier}, {"frontier_has_l0", zero_l}};
        if (!scan.fixed_point) {
            report.items.push_back(ReportItem::excluded_item(pair_id(x, y), ExcludedReason::not_computed, detail));
            continue;
        }
        detail["fixed_point"] = {scan.fixed_point->first, scan.fixed_point->second};
        dominated += scan.fixed_point_dominated ? 1 : 0;
        report.items.push_back(ReportItem::included(pair_id(x, y), scan.fixed_point_dominated ? 1 : 0, detail));
    }
    report.detail = {{"box", box}, {"dominated_fixed_points", dominated}};
    return report;
}

// ---- drivers ----------------------------------------------------------------

namespace {

std::vector<DeviationReport> compute_identity(const TableSet& t, IdentityId id, unsigned L) {
    switch (id) {
        case IdentityId::THM1: return {check_theorem1(t, L)};
        case IdentityId::THM1_UPPER: return {check_thm1_upper(t, L)};
        case IdentityId::THM1_LOWER_K: return {check_thm1_lower(t, L).first};
        case IdentityId::THM1_LOWER_C: return {check_thm1_lower(t, L).second};
        case IdentityId::PROP2: return {check_prop2(t, L)};
        case IdentityId::COR_CKC:
        case IdentityId::COR_KKK:
        case IdentityId::COR_EMPTY_B:
        case IdentityId::COR_EMPTY_A:
        case IdentityId::COR_KC_EQ_CC:
        case IdentityId::GACS_ID:
        case IdentityId::PREFIX_PAIR: {
            for (auto& r : check_corollaries(t, L)) {
                if (r.identity == id) return {std::move(r)};
            }
            return {};
        }
        case IdentityId::COR_FUNC: {
            std::vector<DeviationReport> out;
            for (const auto& [name, f] : builtin_functions()) {
                out.push_back(check_function_corollary(t, f, name, L + 2));
            }
            return out;
        }
        case IdentityId::LEVIN_FP: return {check_levin(t, L + 1, t.scale().P)};
        case IdentityId::COUNTEREX: return {counterexample_search(t, kCounterexampleLengths, L)};
        case IdentityId::PROP3_FP: return {check_prop3(t, L).first};
        case IdentityId::PROP3_SUMS: return {check_prop3(t, L).second};
        case IdentityId::REMARK_SCAN: return {check_remark(t, L, t.scale().P)};
    }
    return {};
}

}  // namespace

std::vector<DeviationReport> verify_identity(const TableSet& t, IdentityId id, unsigned L) {
    auto out = compute_identity(t, id, L);
    for (auto& r : out) r.scale.L = L;
    return out;
}

std::vector<DeviationReport> verify_all(const TableSet& t, unsigned L) {
    std::vector<DeviationReport> out;
    auto lower = check_thm1_lower(t, L);
    auto cors = check_corollaries(t, L);
    auto prop3 = check_prop3(t, L);
    for (IdentityId id : all_identities()) {
        switch (id) {
            case IdentityId::THM1_LOWER_K: out.push_back(lower.first); break;
            case IdentityId::THM1_LOWER_C: out.push_back(lower.second); break;
            case IdentityId::PROP3_FP: out.push_back(prop3.first); break;
            case IdentityId::PROP3_SUMS: out.push_back(prop3.second); break;
            case IdentityId::COR_CKC:
            case IdentityId::COR_KKK:
            case IdentityId::COR_EMPTY_B:
            case IdentityId::COR_EMPTY_A:
            case IdentityId::COR_KC_EQ_CC:
            case IdentityId::GACS_ID:
            case IdentityId::PREFIX_PAIR:
                for (const auto& r : cors) {
                    if (r.identity == id) out.push_back(r);
                }
                break;
            default:
                for (auto& r : verify_identity(t, id, L)) out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace klab
