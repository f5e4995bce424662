#include "klab/enumerator.hpp"

#include <algorithm>
#include <bit>
#include <atomic>
#include <map>
#include <thread>

#include "klab/bitcodec.hpp"
#include "klab/detail/interpreter.hpp"

namespace klab {

std::string to_string(const Complexity& c) {
    switch (c.kind) {
        case Complexity::Kind::finite: return std::to_string(c.bits);
        case Complexity::Kind::infinity: return "inf";
        case Complexity::Kind::not_computed: return "not_computed";
    }
    return "?";
}

BitString witness_bits(WitnessKey key) {
    return BitString::from_uint(key & 0xFFFFFFFFULL, witness_length(key));
}

// ---- ComplexityTable ----------------------------------------------------

namespace {

std::vector<BitString> sorted_unique(std::vector<BitString> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

ComplexityTable::ComplexityTable(Digest machine_fingerprint, Mode mode, unsigned max_program_bits, unsigned budget,
                                 std::vector<BitString> conditions, std::vector<BitString> targets)
    : fingerprint_(machine_fingerprint),
      mode_(mode),
      max_program_bits_(max_program_bits),
      budget_(budget),
      conditions_(sorted_unique(std::move(conditions))),
      targets_(sorted_unique(std::move(targets))),
      cells_(conditions_.size() * targets_.size(), kNoWitness) {
    reindex();
}

void ComplexityTable::reindex() {
    condition_index_.clear();
    target_index_.clear();
    for (std::size_t i = 0; i < conditions_.size(); ++i) condition_index_.emplace(conditions_[i], i);
    for (std::size_t i = 0; i < targets_.size(); ++i) target_index_.emplace(targets_[i], i);
}

std::optional<std::size_t> ComplexityTable::condition_row(const BitString& condition) const {
    auto it = condition_index_.find(condition);
    if (it == condition_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> ComplexityTable::target_column(const BitString& target) const {
    auto it = target_index_.find(target);
    if (it == target_index_.end()) return std::nullopt;
    return it->second;
}

Complexity ComplexityTable::value(const BitString& target, const BitString& condition) const {
    auto row = condition_row(condition);
    auto col = target_column(target);
    if (!row || !col) return Complexity::not_computed();
    WitnessKey key = cell(*row, *col);
    return key == kNoWitness ? Complexity::infinity() : Complexity::finite(witness_length(key));
}

std::optional<BitString> ComplexityTable::witness(const BitString& target, const BitString& condition) const {
    auto row = condition_row(condition);
    auto col = target_column(target);
    if (!row || !col) return std::nullopt;
    WitnessKey key = cell(*row, *col);
    if (key == kNoWitness) return std::nullopt;
    return witness_bits(key);
}

std::size_t ComplexityTable::finite_count() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](WitnessKey k) { return k != kNoWitness; }));
}

bool ComplexityTable::operator==(const ComplexityTable& other) const {
    return fingerprint_ == other.fingerprint_ && mode_ == other.mode_ &&
           max_program_bits_ == other.max_program_bits_ && budget_ == other.budget_ &&
           conditions_ == other.conditions_ && targets_ == other.targets_ && cells_ == other.cells_;
}

// ---- enumeration --------------------------------------------------------

namespace {

struct BinaryTrie {
    struct Node {
        std::int32_t child[2] = {-1, -1};
        std::int32_t item = -1;  // index of the string ending here
    };
    std::vector<Node> nodes{1};

    void insert(const BitString& s, std::int32_t item) {
        std::size_t node = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            int b = s[i];
            if (nodes[node].child[b] < 0) {
                nodes[node].child[b] = static_cast<std::int32_t>(nodes.size());
                nodes.emplace_back();
            }
            node = static_cast<std::size_t>(nodes[node].child[b]);
        }
        nodes[node].item = item;
    }
    // Node sequence from the root to the end of s (s must be present).
    std::vector<std::int32_t> path(const BitString& s) const {
        std::vector<std::int32_t> out{0};
        std::int32_t node = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            node = nodes[static_cast<std::size_t>(node)].child[s[i]];
            out.push_back(node);
        }
        return out;
    }
};

// What the condition tape has revealed at the current trie node.
enum CondNext : std::uint8_t { kUnknown, kBit0, kBit1, kAtEnd, kNotEnd };

struct DfsTapes {
    const BinaryTrie* cond_trie;
    const BinaryTrie* target_trie;
    std::uint32_t prog = 0;  // provided bits, MSB-first
    std::uint8_t avail = 0;
    bool eof = false;
    std::uint8_t cond_next = kUnknown;
    std::uint8_t out_len = 0;
    std::int32_t cond_node = 0;
    std::int32_t out_node = 0;

    int read_program(std::uint32_t pos) const {
        if (pos < avail) return static_cast<int>((prog >> (avail - 1 - pos)) & 1U);
        return eof ? detail::kEof : detail::kNeed;
    }
    bool program_complete(std::uint32_t) const { return true; }
    int cond_peek() const {
        switch (cond_next) {
            case kBit0: return 0;
            case kBit1: return 1;
            case kAtEnd: return detail::kEnd;
            default: return detail::kNeed;
        }
    }
    int cond_at_end() const {
        if (cond_next == kAtEnd) return 1;
        if (cond_next == kUnknown) return detail::kNeed;
        return 0;
    }
    void cond_advance() {
        cond_node = cond_trie->nodes[static_cast<std::size_t>(cond_node)].child[cond_next == kBit1 ? 1 : 0];
        cond_next = kUnknown;
    }
    bool emit(bool bit) {
        std::int32_t next = target_trie->nodes[static_cast<std::size_t>(out_node)].child[bit ? 1 : 0];
        if (next < 0) return false;
        out_node = next;
        ++out_len;
        return true;
    }
    std::uint64_t progress() const {
        return static_cast<std::uint64_t>(static_cast<std::uint32_t>(cond_node)) << 24 |
               std::uint64_t{cond_next} << 16 | out_len;
    }
    void push_bit(unsigned b) {
        prog = (prog << 1) | b;
        ++avail;
    }
};

struct DfsNode {
    detail::ExecState exec;
    DfsTapes tapes;
};

// Results are kept per condition-trie node in two slots: results valid for
// every condition extending the node (slot 0) and results valid only for the
// condition ending exactly there (slot 1).
class Explorer {
public:
    Explorer(const MachineDescriptor& m, const BinaryTrie& conds, const BinaryTrie& targets, std::size_t target_count,
             unsigned max_bits, unsigned budget)
        : m_(m),
          conds_(conds),
          targets_(targets),
          target_count_(target_count),
          max_bits_(max_bits),
          budget_(budget),
          plain_(m.mode() == Mode::plain),
          best_(conds.nodes.size() * 2 * target_count, kNoWitness) {}

    // split_depth > 0: nodes that would branch on program bit number split_depth
    // are handed to `frontier` instead of being explored.
    void explore(DfsNode n, unsigned split_depth, std::vector<DfsNode>* frontier) {
        for (;;) {
            detail::Event ev = detail::resume(m_, n.exec, n.tapes, budget_);
            switch (ev) {
                case detail::Event::halted: record(n); return;
                case detail::Event::out_of_budget:
                case detail::Event::stuck:
                case detail::Event::pruned: return;
                case detail::Event::need_program_bit: {
                    if (frontier && n.tapes.avail == split_depth) {
                        frontier->push_back(n);
                        return;
                    }
                    if (n.tapes.avail >= max_bits_) {
                        if (!plain_) return;
                        n.tapes.eof = true;
                        continue;
                    }
                    if (plain_) {
                        DfsNode end = n;
                        end.tapes.eof = true;
                        explore(end, split_depth, frontier);
                    }
                    DfsNode zero = n;
                    zero.tapes.push_bit(0);
                    explore(zero, split_depth, frontier);
                    n.tapes.push_bit(1);
                    continue;
                }
                case detail::Event::need_cond_end: {
                    const auto& node = conds_.nodes[static_cast<std::size_t>(n.tapes.cond_node)];
                    bool terminal = node.item >= 0;
                    bool kids = node.child[0] >= 0 || node.child[1] >= 0;
                    if (terminal && kids) {
                        DfsNode at_end = n;
                        at_end.tapes.cond_next = kAtEnd;
                        explore(at_end, split_depth, frontier);
                        n.tapes.cond_next = kNotEnd;
                    } else {
                        n.tapes.cond_next = terminal ? kAtEnd : kNotEnd;
                    }
                    continue;
                }
                case detail::Event::need_cond_bit: {
                    const auto& node = conds_.nodes[static_cast<std::size_t>(n.tapes.cond_node)];
                    bool has0 = node.child[0] >= 0;
                    bool has1 = node.child[1] >= 0;
                    if (!has0 && !has1) return;  // exhausted for every condition here
                    if (has0 && has1) {
                        DfsNode zero = n;
                        zero.tapes.cond_next = kBit0;
                        explore(zero, split_depth, frontier);
                        n.tapes.cond_next = kBit1;
                    } else {
                        n.tapes.cond_next = has0 ? kBit0 : kBit1;
                    }
                    continue;
                }
            }
        }
    }

    void merge_into(std::vector<WitnessKey>& out) const {
        for (std::size_t i = 0; i < best_.size(); ++i) out[i] = std::min(out[i], best_[i]);
    }

    std::vector<WitnessKey> take() { return std::move(best_); }

private:
    void update(std::int32_t cond_node, int slot, std::int32_t target, WitnessKey key) {
        auto idx = (static_cast<std::size_t>(cond_node) * 2 + static_cast<std::size_t>(slot)) * target_count_ +
                   static_cast<std::size_t>(target);
        if (key < best_[idx]) best_[idx] = key;
    }

    void record(const DfsNode& n) {
        std::int32_t target = targets_.nodes[static_cast<std::size_t>(n.tapes.out_node)].item;
        if (target < 0) return;
        WitnessKey key = make_witness_key(n.tapes.avail, n.tapes.prog);
        const auto& node = conds_.nodes[static_cast<std::size_t>(n.tapes.cond_node)];
        switch (n.tapes.cond_next) {
            case kUnknown: update(n.tapes.cond_node, 0, target, key); break;
            case kAtEnd: update(n.tapes.cond_node, 1, target, key); break;
            case kBit0: update(node.child[0], 0, target, key); break;
            case kBit1: update(node.child[1], 0, target, key); break;
            case kNotEnd:
                for (int b = 0; b < 2; ++b) {
                    if (node.child[b] >= 0) update(node.child[b], 0, target, key);
                }
                break;
        }
    }

    const MachineDescriptor& m_;
    const BinaryTrie& conds_;
    const BinaryTrie& targets_;
    std::size_t target_count_;
    unsigned max_bits_;
    std::uint32_t budget_;
    bool plain_;
    std::vector<WitnessKey> best_;
};

}  // namespace

ComplexityTable build_table(const MachineDescriptor& machine, const std::vector<BitString>& conditions,
                            const std::vector<BitString>& targets, const BuildOptions& options) {
    if (options.max_program_bits > kMaxProgramBitsCap) {
        throw CapacityExceeded("max program bits " + std::to_string(options.max_program_bits) + " exceeds cap " +
                               std::to_string(kMaxProgramBitsCap));
    }
    ComplexityTable table(machine.fingerprint(), machine.mode(), options.max_program_bits, options.budget, conditions,
                          targets);
    const auto& conds = table.conditions();
    const auto& tgts = table.targets();
    const long double work = static_cast<long double>(conds.size()) *
                             static_cast<long double>(std::uint64_t{1} << (options.max_program_bits + 1));
    if (work > static_cast<long double>(options.work_ceiling)) {
        throw CapacityExceeded("|conditions| x 2^(P+1) exceeds the work ceiling");
    }
    for (const auto& t : tgts) {
        if (t.size() > 255) throw CapacityExceeded("target longer than 255 bits");
    }
    if (conds.empty() || tgts.empty()) return table;

    BinaryTrie cond_trie;
    for (std::size_t i = 0; i < conds.size(); ++i) cond_trie.insert(conds[i], static_cast<std::int32_t>(i));
    BinaryTrie target_trie;
    for (std::size_t i = 0; i < tgts.size(); ++i) target_trie.insert(tgts[i], static_cast<std::int32_t>(i));

    const std::size_t slots = cond_trie.nodes.size() * 2 * tgts.size();
    if (slots > (std::size_t{1} << 28)) throw CapacityExceeded("condition x target result space too large");

    unsigned workers = options.workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.workers;

    DfsNode root{};
    root.tapes.cond_trie = &cond_trie;
    root.tapes.target_trie = &target_trie;

    // Shallow part: collect subtrees at a fixed program depth as work items.
    const unsigned split_depth = std::min(options.max_program_bits, 10U);
    std::vector<DfsNode> frontier;
    Explorer shallow(machine, cond_trie, target_trie, tgts.size(), options.max_program_bits, options.budget);
    shallow.explore(root, split_depth, &frontier);
    std::vector<WitnessKey> best = shallow.take();

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::vector<std::vector<WitnessKey>> partial(workers);
    auto run_worker = [&](unsigned w) {
        Explorer ex(machine, cond_trie, target_trie, tgts.size(), options.max_program_bits, options.budget);
        for (std::size_t i = next++; i < frontier.size(); i = next++) {
            ex.explore(frontier[i], 0, nullptr);
            std::size_t d = ++done;
            if (options.progress && w == 0) options.progress(d, frontier.size());
        }
        partial[w] = ex.take();
    };
    if (workers == 1) {
        run_worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::min(best[i], p[i]);
    }
    if (options.progress) options.progress(frontier.size(), frontier.size());

    // Flatten: a condition's value is the minimum over the "extends" slots of
    // every node on its path plus the "exact" slot of its final node.
    const std::size_t nt = tgts.size();
    for (std::size_t row = 0; row < conds.size(); ++row) {
        auto path = cond_trie.path(conds[row]);
        for (std::size_t col = 0; col < nt; ++col) {
            WitnessKey m = best[(static_cast<std::size_t>(path.back()) * 2 + 1) * nt + col];
            for (auto node : path) m = std::min(m, best[(static_cast<std::size_t>(node) * 2) * nt + col]);
            table.set_cell(row, col, m);
        }
    }
    return table;
}

Complexity lookup_c(const ComplexityTable& table, const BitString& x, const BitString& condition) {
    if (table.mode() != Mode::plain) throw std::invalid_argument("lookup_c: table is not plain-mode");
    Complexity c = table.value(x, condition);
    if (c.kind == Complexity::Kind::not_computed) throw NotComputed("C(" + x.pretty() + "|" + condition.pretty() + ")");
    return c;
}

Complexity lookup_k(const ComplexityTable& table, const BitString& x, const BitString& condition) {
    if (table.mode() != Mode::prefix) throw std::invalid_argument("lookup_k: table is not prefix-mode");
    Complexity c = table.value(x, condition);
    if (c.kind == Complexity::Kind::not_computed) throw NotComputed("K(" + x.pretty() + "|" + condition.pretty() + ")");
    return c;
}

Complexity pair_complexity(const ComplexityTable& table, const BitString& a, const BitString& b) {
    return lookup_c(table, pair_encode(a, b), BitString{});
}

std::optional<std::uint64_t> SliceCount::ordinal_of(const BitString& y) const {
    auto it = std::find(ys.begin(), ys.end(), y);
    if (it == ys.end()) return std::nullopt;
    return static_cast<std::uint64_t>(it - ys.begin());
}

std::vector<SliceCount> enumerate_slices(const ComplexityTable& table, unsigned n) {
    if (table.mode() != Mode::plain) throw std::invalid_argument("enumerate_slices: table is not plain-mode");
    auto row = table.condition_row(BitString{});
    if (!row) throw NotComputed("enumerate_slices: table lacks the empty condition");

    struct Found {
        WitnessKey key;
        BitString a;
        BitString y;
    };
    std::vector<Found> found;
    const auto& targets = table.targets();
    for (std::size_t col = 0; col < targets.size(); ++col) {
        WitnessKey key = table.cell(*row, col);
        if (key == kNoWitness || witness_length(key) > n) continue;
        try {
            auto [a, y] = pair_decode(targets[col]);
            found.push_back({key, std::move(a), std::move(y)});
        } catch (const MalformedCode&) {
        }
    }
    // Witnesses are distinct programs, so discovery order is total.
    std::sort(found.begin(), found.end(), [](const Found& l, const Found& r) { return l.key < r.key; });
    std::map<BitString, SliceCount> by_a;
    for (auto& f : found) {
        auto& slice = by_a[f.a];
        slice.n = n;
        slice.a = f.a;
        slice.ys.push_back(std::move(f.y));
    }
    std::vector<SliceCount> out;
    out.reserve(by_a.size());
    for (auto& [a, slice] : by_a) out.push_back(std::move(slice));
    return out;
}

Dyadic semimeasure(const SliceCount& slice) { return {slice.count(), slice.n + 1}; }

bool dyadic_sum_at_most_one(const std::vector<Dyadic>& terms) {
    unsigned e = 0;
    for (const auto& t : terms) e = std::max(e, t.exponent);
    if (e >= 120) throw std::out_of_range("dyadic_sum_at_most_one: exponent too large");
    unsigned __int128 sum = 0;
    const unsigned __int128 one = static_cast<unsigned __int128>(1) << e;
    for (const auto& t : terms) {
        if (t.numerator == 0) continue;
        // A term wider than 2^126 already exceeds one = 2^e, e < 120.
        if (std::bit_width(t.numerator) + (e - t.exponent) > 126) return false;
        sum += static_cast<unsigned __int128>(t.numerator) << (e - t.exponent);
        if (sum > one) return false;
    }
    return true;
}

std::vector<std::uint64_t> halting_program_counts(const MachineDescriptor& machine, const BitString& condition,
                                                  unsigned max_program_bits, unsigned budget) {
    if (max_program_bits > kMaxKraftProgramBits) {
        throw CapacityExceeded("halting_program_counts: at most " + std::to_string(kMaxKraftProgramBits) + " bits");
    }
    std::vector<std::uint64_t> counts(max_program_bits + 1, 0);
    for (unsigned len = 0; len <= max_program_bits; ++len) {
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            if (run(machine, BitString::from_uint(v, len), condition, budget).status == RunStatus::halted) ++counts[len];
        }
    }
    return counts;
}

Dyadic kraft_sum(const std::vector<std::uint64_t>& counts) {
    if (counts.empty()) return {};
    const auto top = static_cast<unsigned>(counts.size() - 1);
    Dyadic d{0, top};
    for (unsigned len = 0; len <= top; ++len) d.numerator += counts[len] << (top - len);
    return d;
}

}  // namespace klab
