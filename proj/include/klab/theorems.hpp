#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "klab/report.hpp"
#include "klab/tableset.hpp"

namespace klab {

/// No finite (r, i) entry exists at the requested n.
struct ScaleTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed-point iteration reached a value with no usable table entry.
struct Diverged : std::runtime_error {
    ExcludedReason reason;
    Diverged(ExcludedReason r, const std::string& what) : std::runtime_error(what), reason(r) {}
};

std::string single_id(const BitString& a);
std::string pair_id(const BitString& a, const BitString& b);
/// All (a, b) with |a| + |b| <= total, by total length, then a, then b.
std::vector<std::pair<BitString, BitString>> pairs_up_to(unsigned total);

// ---- additivity of the pair complexity -----------------------------------

/// C(a,b) - [K(a|n) + C(b|a,n)], n = C(a,b).
DeviationReport check_theorem1(const TableSet& tables, unsigned L);

/// Same pairs, deviation C(a,b) - (|p| + |q|) over the stored witnesses. When
/// real witnesses are present and d = C(a,b) - |p| - |q| >= 0, the
/// description selfdelim(d) p q is decoded back to (a, b) on the machine.
DeviationReport check_thm1_upper(const TableSet& tables, unsigned L);

/// K(a|n) - (n - floor(log2 N_a)) and C(b|a,n) - ceil(log2 N_a).
std::pair<DeviationReport, DeviationReport> check_thm1_lower(const TableSet& tables, unsigned L);

/// Result of running selfdelim(d) p q through the two machines.
struct DeviceRun {
    bool ok = false;
    BitString a;
    BitString b;
    std::size_t description_bits = 0;
};
DeviceRun run_concatenation_device(const TableSet& tables, const BitString& description);

// ---- corollaries -----------------------------------------------------------

/// COR_CKC, COR_KKK, COR_EMPTY_B, COR_EMPTY_A, COR_KC_EQ_CC over single
/// strings up to L+2, GACS_ID and PREFIX_PAIR over pairs up to L.
std::vector<DeviationReport> check_corollaries(const TableSet& tables, unsigned L);

struct LevinResult {
    std::optional<unsigned> i_star;
    Complexity c;
    /// i > i_star with K(a|i) > i; the window is the distance to the largest.
    std::vector<unsigned> violations;
    unsigned window = 0;
    ReportItem row;
};
LevinResult levin_fixed_point(const TableSet& tables, const BitString& a, unsigned i_max);
/// Every a with |a| <= max_len, i up to i_max.
DeviationReport check_levin(const TableSet& tables, unsigned max_len, unsigned i_max);

using StringFunction = std::function<BitString(const BitString&)>;
/// C(b) - K(f(b)|C(b)) - C(b|f(b),C(b)) for all b with |b| <= max_len.
DeviationReport check_function_corollary(const TableSet& tables, const StringFunction& f, const std::string& name,
                                         unsigned max_len);
/// identity, const-empty, length.
std::vector<std::pair<std::string, StringFunction>> builtin_functions();

/// C(a,b) - K(a|n) - C(b|a,m), n = C(a,b), m = K(a|n).
DeviationReport check_prop2(const TableSet& tables, unsigned L);

// ---- counterexample ---------------------------------------------------------

struct CounterexampleRow {
    unsigned n = 0;
    BitString r;
    unsigned i = 0;
    BitString x, y;
    Complexity c_ri, c_xy, c_x, k_y_given_x;
    std::optional<std::int64_t> gap;
    double reference = 0;
};

/// log2 n - 2 log2 log2 n (n >= 2).
double counterexample_reference(unsigned n);
/// Argmax of C(<r, i>) over |r| = n, i < n (first in (r, i) order on ties).
CounterexampleRow counterexample_at(const TableSet& tables, unsigned n);

struct CounterexampleScan {
    std::size_t pairs = 0;
    std::size_t covered = 0;
    std::size_t strict = 0;  // C(x,y) > C(x) + K(y|x)
    std::int64_t max_gap = 0;
    std::optional<std::pair<BitString, BitString>> example;
};
CounterexampleScan counterexample_scan(const TableSet& tables, unsigned L);

/// Trend rows, one per n; the exhaustive scan over pairs up to L goes into
/// the report detail.
DeviationReport counterexample_search(const TableSet& tables, const std::vector<unsigned>& n_values, unsigned L);

// ---- fixed points -----------------------------------------------------------

using Point = std::pair<unsigned, unsigned>;

struct FixedPoint {
    unsigned k = 0;
    unsigned l = 0;
    unsigned residual = 0;
    std::vector<Point> trace;
    bool cycle_found = false;
    std::size_t cycle_length = 0;
    std::size_t steps = 0;  // applications of F
};

/// F(k,l) = (C(x|l), C(y|x,k)), started from F(0,0).
FixedPoint fixed_point_kl(const TableSet& tables, const BitString& x, const BitString& y, unsigned max_iter = 64);
unsigned fixed_point_residual(const TableSet& tables, const BitString& x, const BitString& y, Point p);

/// Three rows: C(x,y|k,l), C(x,y|k), C(x,y|l), each minus (k+l).
std::vector<ReportItem> check_prop3_sums(const TableSet& tables, const BitString& x, const BitString& y, unsigned k,
                                         unsigned l);
/// PROP3_FP (deviation = residual) and PROP3_SUMS (residual-0 pairs only).
std::pair<DeviationReport, DeviationReport> check_prop3(const TableSet& tables, unsigned L, unsigned max_iter = 64);

struct RemarkScan {
    std::vector<Point> candidates;
    std::vector<Point> frontier;
    std::optional<Point> fixed_point;
    bool fixed_point_dominated = false;
};
RemarkScan remark_scan(const TableSet& tables, const BitString& x, const BitString& y, unsigned box);
/// Deviation 1 when the residual-0 fixed point is strictly dominated by a candidate.
DeviationReport check_remark(const TableSet& tables, unsigned L, unsigned box);

// ---- drivers ----------------------------------------------------------------

std::vector<DeviationReport> verify_identity(const TableSet& tables, IdentityId id, unsigned L);
std::vector<DeviationReport> verify_all(const TableSet& tables, unsigned L);

}  // namespace klab
