// One pass/fail line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "klab/bitcodec.hpp"
#include "klab/enumerator.hpp"
#include "klab/pinned_bounds.hpp"
#include "klab/tableset.hpp"
#include "klab/theorems.hpp"

using namespace klab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int n, const std::string& title, const std::function<bool(std::ostringstream&)>& body) {
    auto start = std::chrono::steady_clock::now();
    std::ostringstream note;
    bool ok = false;
    try {
        ok = body(note);
    } catch (const std::exception& e) {
        note << "threw: " << e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!ok) ++failures;
    std::string text = note.str();
    while (!text.empty() && (text.back() == ' ' || text.back() == ',')) text.pop_back();
    std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", ok ? "PASS" : "FAIL", n, title.c_str(), text.c_str(), secs);
    std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

BitString random_string(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    std::size_t n = lo + rng() % (hi - lo + 1);
    BitString s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(rng() & 1U);
    return s;
}

std::vector<BitString> representative_conditions() {
    std::vector<BitString> out;
    for (const auto& s : all_strings_up_to(2)) out.push_back(s);
    out.push_back(BitString::from_string("0110"));
    out.push_back(BitString::from_string("11111111"));
    for (unsigned n : {3U, 7U, 12U}) out.push_back(nat_to_bits(n));
    out.push_back(condition_encode({BitString::from_string("10"), nat_to_bits(5)}));
    out.push_back(condition_encode({BitString{}, nat_to_bits(9)}));
    out.push_back(condition_encode({nat_to_bits(3), nat_to_bits(7)}));
    out.push_back(pair_encode(BitString::from_string("1"), BitString::from_string("0")));
    return out;
}

const DeviationReport& find(const std::vector<DeviationReport>& rs, IdentityId id, std::string_view variant = "") {
    for (const auto& r : rs) {
        if (r.identity == id && r.variant == variant) return r;
    }
    throw std::runtime_error(std::string("no report for ") + to_string(id));
}

bool check_pinned(const DeviationReport& r, std::ostringstream& note) {
    const PinnedBound* b = pinned_bound(r.identity, r.variant);
    if (!b) throw std::runtime_error("no pinned bound for " + r.key());
    std::int64_t q = bounded_quantity(r, *b);
    note << (r.variant.empty() ? to_string(r.identity) : r.variant) << ' ' << q << "<=" << b->bound << ' ';
    return q <= b->bound;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(KLAB_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

int main() {
    const auto plain = reference_machine(Mode::plain);
    const auto prefix = reference_machine(Mode::prefix);
    const auto conds = representative_conditions();

    criterion(1, "codec laws", [&](std::ostringstream& note) {
        auto t0 = std::chrono::steady_clock::now();
        std::size_t bad = 0;
        std::set<std::string> codes;
        for (const auto& x : all_strings_up_to(8)) {
            auto enc = selfdelim_encode(x);
            auto dec = selfdelim_decode(enc);
            bad += (dec.value == x && dec.rest.empty()) ? 0 : 1;
            auto [a, b] = pair_decode(pair_encode(x, x));
            bad += (a == x && b == x) ? 0 : 1;
            codes.insert(enc.to_string());
        }
        // In sorted order a codeword that prefixes another is followed by one it prefixes.
        std::string prev;
        for (const auto& c : codes) {
            if (!prev.empty() && c.compare(0, prev.size(), prev) == 0) ++bad;
            prev = c;
        }
        std::mt19937_64 rng(1);
        for (int i = 0; i < 100000; ++i) {
            BitString a = random_string(rng, 9, 80);
            BitString tail = random_string(rng, 0, 40);
            auto dec = selfdelim_decode(selfdelim_encode(a) + tail);
            bad += (dec.value == a && dec.rest == tail) ? 0 : 1;
        }
        double secs = elapsed_since(t0);
        note << bad << " violations over " << codes.size() << " exhaustive + 100000 random";
        return bad == 0 && secs < 10.0;
    });

    criterion(2, "prefix-free domain", [&](std::ostringstream& note) {
        auto t0 = std::chrono::steady_clock::now();
        std::size_t halted_total = 0;
        std::size_t violations = 0;
        for (const auto& c : conds) {
            std::set<BitString> halted;
            for (const auto& p : all_strings_up_to(14)) {
                if (run(prefix, p, c, 1024).status == RunStatus::halted) halted.insert(p);
            }
            halted_total += halted.size();
            for (const auto& p : halted) {
                for (std::size_t k = 0; k < p.size(); ++k) violations += halted.count(p.substr(0, k));
            }
        }
        double secs = elapsed_since(t0);
        note << conds.size() << " conditions, " << halted_total << " halting programs, " << violations
             << " violations";
        return conds.size() == 16 && violations == 0 && secs < 120.0;
    });

    criterion(3, "Kraft inequality", [&](std::ostringstream& note) {
        bool ok = true;
        double worst = 0;
        for (const auto& c : conds) {
            Dyadic d = kraft_sum(halting_program_counts(prefix, c, 14, 1024));
            ok = ok && dyadic_sum_at_most_one({d});
            worst = std::max(worst, static_cast<double>(d.numerator) / static_cast<double>(1ULL << d.exponent));
        }
        note << "largest sum " << worst;
        return ok;
    });

    criterion(4, "budget/length monotonicity", [&](std::ostringstream& note) {
        const auto targets = all_strings_up_to(6);
        std::size_t violations = 0;
        std::size_t compared = 0;
        for (const auto* m : {&plain, &prefix}) {
            BuildOptions small;
            small.max_program_bits = 20;
            small.budget = 512;
            BuildOptions large;
            auto a = build_table(*m, conds, targets, small);
            auto b = build_table(*m, conds, targets, large);
            for (const auto& c : conds) {
                for (const auto& t : targets) {
                    Complexity s = a.value(t, c);
                    Complexity l = b.value(t, c);
                    ++compared;
                    // Infinity counts as +inf: the small table may only be larger.
                    if (!s.is_finite()) continue;
                    if (!l.is_finite() || l.bits > s.bits) ++violations;
                }
            }
        }
        note << compared << " entries, " << violations << " violations";
        return violations == 0;
    });

    const fs::path root = fs::temp_directory_path() / "klab-acceptance";
    fs::remove_all(root);
    TableSet lab;

    criterion(5, "parallel determinism", [&](std::ostringstream& note) {
        WorkbenchOptions one;
        one.workers = 1;
        one.cache_dir = (root / "w1").string();
        WorkbenchOptions eight;
        eight.workers = 8;
        eight.cache_dir = (root / "w8").string();
        lab = build_tableset(kPinnedScale, one);
        build_tableset(kPinnedScale, eight);
        std::size_t files = 0;
        bool same = true;
        for (const auto& e : fs::directory_iterator(one.cache_dir)) {
            if (e.path().extension() != ".klab") continue;
            ++files;
            fs::path other = fs::path(eight.cache_dir) / e.path().filename();
            same = same && fs::exists(other) && sha256(read_bytes(e.path())) == sha256(read_bytes(other));
        }
        note << files << " cache files compared by SHA-256";
        return same && files == plan_blocks(kPinnedScale).size();
    });

    const auto reports = verify_all(lab, 4);

    criterion(6, "counting bound", [&](std::ostringstream& note) {
        const auto& rk = find(reports, IdentityId::THM1_LOWER_K);
        bool ok = !rk.detail["counting"].empty();
        for (const auto& c : rk.detail["counting"]) {
            ok = ok && c["holds"].get<bool>() &&
                 c["sum_N_a"].get<std::uint64_t>() <= c["bound"].get<std::uint64_t>();
        }
        note << rk.detail["counting"].size() << " values of n";
        return ok;
    });

    criterion(7, "pair additivity deviation stability", [&](std::ostringstream& note) {
        auto l3 = build_tableset(Scale{3, 24, 1024}, WorkbenchOptions{1, (root / "w1").string(), nullptr});
        auto r3 = check_theorem1(l3, 3);
        const auto& r4 = find(reports, IdentityId::THM1);
        note << "coverage " << r3.coverage() << '/' << r4.coverage() << ", max " << r3.max_abs_deviation() << " -> "
             << r4.max_abs_deviation() << ", ";
        return r3.coverage() >= 0.8 && r4.coverage() >= 0.8 &&
               r4.max_abs_deviation() - r3.max_abs_deviation() <= 4 && check_pinned(r4, note);
    });

    criterion(8, "lower-bound inequalities", [&](std::ostringstream& note) {
        bool a = check_pinned(find(reports, IdentityId::THM1_LOWER_K), note);
        bool b = check_pinned(find(reports, IdentityId::THM1_LOWER_C), note);
        return a && b;
    });

    criterion(9, "Levin fixed point", [&](std::ostringstream& note) {
        const auto& lv = find(reports, IdentityId::LEVIN_FP);
        std::size_t missing = 0;
        for (const auto& i : lv.items) missing += i.deviation ? 0 : 1;
        note << lv.items.size() << " strings, " << missing << " without i_star, ";
        return lv.items.size() == all_strings_up_to(5).size() && missing == 0 && check_pinned(lv, note);
    });

    criterion(10, "corollary suite", [&](std::ostringstream& note) {
        bool ok = true;
        for (IdentityId id : {IdentityId::COR_CKC, IdentityId::COR_KKK, IdentityId::COR_EMPTY_B, IdentityId::COR_EMPTY_A,
                              IdentityId::COR_KC_EQ_CC, IdentityId::GACS_ID, IdentityId::PREFIX_PAIR}) {
            ok = check_pinned(find(reports, id), note) && ok;
        }
        return ok;
    });

    criterion(11, "counterexample existence", [&](std::ostringstream& note) {
        const auto& cx = find(reports, IdentityId::COUNTEREX);
        std::size_t strict = cx.detail["scan"]["strict"];
        note << strict << " of " << cx.detail["scan"]["pairs"].get<std::size_t>() << " pairs strict; trend";
        for (const auto& i : cx.items) {
            note << ' ' << i.id << " gap=" << (i.deviation ? std::to_string(*i.deviation) : "none")
                 << " ref=" << i.detail["reference"].get<double>();
        }
        return strict >= 1;
    });

    criterion(12, "fixed-point sums", [&](std::ostringstream& note) {
        const auto& fp = find(reports, IdentityId::PROP3_FP);
        std::size_t pairs = fp.items.size();
        std::size_t cycles = fp.detail["cycles_found"];
        std::size_t steps = fp.detail["max_steps"];
        note << cycles << '/' << pairs << " terminated, max " << steps << " steps, ";
        return cycles == pairs && steps <= 64 && check_pinned(find(reports, IdentityId::PROP3_SUMS), note);
    });

    criterion(13, "cache integrity", [&](std::ostringstream& note) {
        const auto& table = lab.tables().front();
        fs::path file = root / "roundtrip.klab";
        save_cache(table, file.string());
        auto bytes = read_bytes(file);
        auto reloaded = load_cache(file.string(), table.machine_fingerprint(), kPinnedScale.P, kPinnedScale.T);
        bool roundtrip = serialize_table(reloaded) == bytes && reloaded == table;

        // Tamper with a cache the command line reads.
        fs::path dir = root / "cli";
        if (run_cli("tables build --scale-L 1 --cache-dir " + dir.string()) != 0) return false;
        fs::path victim;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".klab") victim = e.path();
        }
        auto pristine = read_bytes(victim);
        auto foreign = pristine;
        foreign[7] ^= 0xFF;
        write_bytes(victim, foreign);
        int fp_code = run_cli("verify THM1 --scale-L 1 --cache-dir " + dir.string());
        auto corrupt = pristine;
        corrupt[corrupt.size() / 2] ^= 0x01;
        write_bytes(victim, corrupt);
        int digest_code = run_cli("verify THM1 --scale-L 1 --cache-dir " + dir.string());
        write_bytes(victim, pristine);
        int clean_code = run_cli("verify THM1 --scale-L 1 --cache-dir " + dir.string());
        note << "roundtrip " << (roundtrip ? "exact" : "differs") << ", fingerprint tamper exit " << fp_code
             << ", digest tamper exit " << digest_code;
        return roundtrip && fp_code == 5 && digest_code == 3 && clean_code == 0;
    });

    fs::remove_all(root);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
