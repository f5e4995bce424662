#include "klab/tableset.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "klab/bitcodec.hpp"

namespace klab {

unsigned slice_y_bound(const Scale& s) {
    int by_program = static_cast<int>(s.P) - 10;
    int by_size = 18 - static_cast<int>(s.L);
    return static_cast<unsigned>(std::max(0, std::min(by_program, by_size)));
}

namespace {

void append(std::vector<BitString>& out, const std::vector<BitString>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

std::vector<BitString> pairs_up_to_total(unsigned total) {
    std::vector<BitString> out;
    for (unsigned la = 0; la <= total; ++la) {
        for (const auto& a : all_strings_of_length(la)) {
            for (const auto& b : all_strings_up_to(total - la)) out.push_back(pair_encode(a, b));
        }
    }
    return out;
}

std::vector<BitString> nat_range(unsigned max) {
    std::vector<BitString> out;
    for (unsigned j = 0; j <= max; ++j) out.push_back(nat_to_bits(j));
    return out;
}

std::vector<BitString> string_nat_conditions(unsigned max_len, unsigned max_nat) {
    std::vector<BitString> out;
    for (const auto& a : all_strings_up_to(max_len)) {
        for (unsigned j = 0; j <= max_nat; ++j) out.push_back(condition_encode({a, nat_to_bits(j)}));
    }
    return out;
}

}  // namespace

std::vector<BlockPlan> plan_blocks(const Scale& scale) {
    const unsigned L = scale.L;
    const unsigned S = singles_bound(scale);
    const unsigned P = scale.P;
    const unsigned max_r = *std::max_element(kCounterexampleLengths.begin(), kCounterexampleLengths.end());
    const unsigned short_max = std::max(S, max_r);

    std::vector<BitString> singles = all_strings_up_to(S);
    std::vector<BitString> pairs = pairs_up_to_total(L);
    std::vector<BitString> singles_and_pairs = singles;
    append(singles_and_pairs, pairs);

    // <a, C(a)> and <a, K(a)> encodings for every possible value.
    std::vector<BitString> self_length_pairs;
    for (const auto& a : singles) {
        for (unsigned j = 0; j <= P; ++j) self_length_pairs.push_back(pair_encode(a, nat_to_bits(j)));
    }

    std::vector<BlockPlan> plan;

    {
        BlockPlan b{"plain-empty", Mode::plain, {BitString{}}, all_strings_up_to(short_max)};
        // Pair universe for slice counting.
        const unsigned y_max = slice_y_bound(scale);
        for (const auto& a : all_strings_up_to(L)) {
            for (const auto& y : all_strings_up_to(y_max)) b.targets.push_back(pair_encode(a, y));
        }
        append(b.targets, pairs);
        append(b.targets, self_length_pairs);
        for (unsigned n : kCounterexampleLengths) {
            for (const auto& r : all_strings_of_length(n)) {
                for (unsigned i = 0; i <= n; ++i) {
                    b.targets.push_back(pair_encode(r, nat_to_bits(i)));
                    b.targets.push_back(pair_encode(r.substr(0, i), r.substr(i)));
                }
            }
        }
        plan.push_back(std::move(b));
    }
    {
        BlockPlan b{"prefix-empty", Mode::prefix, {BitString{}}, all_strings_up_to(short_max)};
        append(b.targets, pairs);
        append(b.targets, self_length_pairs);
        plan.push_back(std::move(b));
    }
    plan.push_back({"plain-nat", Mode::plain, nat_range(P), singles_and_pairs});
    plan.push_back({"prefix-nat", Mode::prefix, nat_range(P), singles_and_pairs});
    plan.push_back({"plain-string-nat", Mode::plain, string_nat_conditions(S, P), singles});
    plan.push_back({"prefix-string-nat", Mode::prefix, string_nat_conditions(L, P), all_strings_up_to(L)});
    {
        std::vector<BitString> conds;
        for (unsigned i = 0; i <= P; ++i) {
            for (unsigned j = 0; j <= P; ++j) conds.push_back(condition_encode({nat_to_bits(i), nat_to_bits(j)}));
        }
        plan.push_back({"plain-nat-nat", Mode::plain, std::move(conds), singles_and_pairs});
    }
    plan.push_back({"prefix-string", Mode::prefix, all_strings_up_to(max_r), all_strings_up_to(max_r)});
    return plan;
}

std::string cache_file_name(const BlockPlan& block, const Scale& scale) {
    return block.name + "-L" + std::to_string(scale.L) + "-P" + std::to_string(scale.P) + "-T" +
           std::to_string(scale.T) + ".klab";
}

// ---- TableSet -----------------------------------------------------------

TableSet::TableSet(MachineDescriptor plain, MachineDescriptor prefix, Scale scale)
    : plain_(std::move(plain)), prefix_(std::move(prefix)), scale_(scale) {
    if (plain_->mode() != Mode::plain || prefix_->mode() != Mode::prefix) {
        throw std::invalid_argument("TableSet: machine modes swapped");
    }
}

void TableSet::add(ComplexityTable table) {
    std::size_t idx = tables_.size();
    int mode = static_cast<int>(table.mode());
    for (const auto& cond : table.conditions()) by_condition_[{mode, cond}].push_back(idx);
    tables_.push_back(std::move(table));
}

void TableSet::set_stub(Mode mode, const BitString& target, const BitString& condition, Complexity value) {
    stubs_[{static_cast<int>(mode), target, condition}] = value;
    ++stub_conditions_[{static_cast<int>(mode), condition}];
}

Complexity TableSet::value(Mode mode, const BitString& target, const BitString& condition) const {
    if (!stubs_.empty()) {
        auto it = stubs_.find({static_cast<int>(mode), target, condition});
        if (it != stubs_.end()) return it->second;
    }
    auto it = by_condition_.find({static_cast<int>(mode), condition});
    if (it == by_condition_.end()) return Complexity::not_computed();
    for (std::size_t idx : it->second) {
        Complexity c = tables_[idx].value(target, condition);
        if (c.kind != Complexity::Kind::not_computed) return c;
    }
    return Complexity::not_computed();
}

std::optional<BitString> TableSet::witness(Mode mode, const BitString& target, const BitString& condition) const {
    auto it = by_condition_.find({static_cast<int>(mode), condition});
    if (it == by_condition_.end()) return std::nullopt;
    for (std::size_t idx : it->second) {
        if (auto w = tables_[idx].witness(target, condition)) return w;
    }
    return std::nullopt;
}

bool TableSet::has_condition(Mode mode, const BitString& condition) const {
    return by_condition_.count({static_cast<int>(mode), condition}) != 0 ||
           stub_conditions_.count({static_cast<int>(mode), condition}) != 0;
}

void TableSet::require(Mode mode, const BitString& condition) const {
    if (!has_condition(mode, condition)) {
        throw MissingCondition(std::string(to_string(mode)) + " table for condition \"" + condition.pretty() +
                               "\" was not built");
    }
}

const ComplexityTable* TableSet::slice_table() const {
    const ComplexityTable* best = nullptr;
    for (const auto& t : tables_) {
        if (t.mode() != Mode::plain || !t.condition_row(BitString{})) continue;
        if (!best || t.targets().size() > best->targets().size()) best = &t;
    }
    return best;
}

Digest TableSet::fingerprint() const {
    if (!has_machines()) return Digest{};
    return lab_fingerprint(*plain_, *prefix_);
}

// ---- building -----------------------------------------------------------

TableSet build_tableset(const Scale& scale, const WorkbenchOptions& options) {
    auto plain = reference_machine(Mode::plain);
    auto prefix = reference_machine(Mode::prefix);
    TableSet set(plain, prefix, scale);
    if (!options.cache_dir.empty()) std::filesystem::create_directories(options.cache_dir);

    for (const auto& block : plan_blocks(scale)) {
        const MachineDescriptor& machine = block.mode == Mode::plain ? plain : prefix;
        std::string path;
        if (!options.cache_dir.empty()) {
            path = (std::filesystem::path(options.cache_dir) / cache_file_name(block, scale)).string();
            if (std::filesystem::exists(path)) {
                try {
                    ComplexityTable cached = load_cache(path, machine.fingerprint(), scale.P, scale.T);
                    ComplexityTable probe(machine.fingerprint(), block.mode, scale.P, scale.T, block.conditions,
                                          block.targets);
                    if (cached.conditions() == probe.conditions() && cached.targets() == probe.targets()) {
                        if (options.log) *options.log << "loaded " << path << '\n';
                        set.add(std::move(cached));
                        continue;
                    }
                    if (options.log) *options.log << "stale domain, rebuilding " << path << '\n';
                } catch (const CacheError& e) {
                    if (e.kind != CacheError::Kind::config_mismatch) throw;
                    if (options.log) *options.log << "configuration changed, rebuilding " << path << '\n';
                }
            }
        }
        BuildOptions build;
        build.max_program_bits = scale.P;
        build.budget = scale.T;
        build.workers = options.workers;
        auto t0 = std::chrono::steady_clock::now();
        ComplexityTable table = build_table(machine, block.conditions, block.targets, build);
        if (options.log) {
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            *options.log << "built " << block.name << " (" << table.conditions().size() << " conditions x "
                         << table.targets().size() << " targets) in " << secs << " s\n";
        }
        if (!path.empty()) save_cache(table, path);
        set.add(std::move(table));
    }
    return set;
}

}  // namespace klab
