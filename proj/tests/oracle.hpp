#pragma once

// Straight-line reference interpreter and brute-force complexity search used
// as test oracles. Shares no code with the library interpreter: opcodes are
// matched by scanning the pattern strings of the descriptor.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "klab/bitstring.hpp"
#include "klab/machine.hpp"

namespace oracle {

using klab::BitString;
using klab::MachineDescriptor;
using klab::Opcode;

struct Result {
    bool halted = false;
    BitString output;
    std::size_t read = 0;
};

inline Result execute(const MachineDescriptor& m, const BitString& prog, const BitString& cond, std::uint64_t budget,
                  bool stream = false) {
    const bool prefix = m.mode() == klab::Mode::prefix;
    const std::size_t memory = m.limits().instruction_memory;
    const std::size_t depth_cap = m.limits().stack_depth;

    Result res;
    std::size_t consumed = 0;
    std::size_t cpos = 0;
    std::vector<std::size_t> starts{0};
    std::size_t instr = 0;
    std::size_t pc = 0;
    std::vector<int> stack;
    std::uint64_t steps = 0;
    bool eof = false;

    auto bit_at = [&](std::size_t pos) -> int {
        if (pos >= prog.size()) {
            eof = true;
            return -1;
        }
        consumed = std::max(consumed, pos + 1);
        return prog[pos] ? 1 : 0;
    };
    // Returns opcode index and operand, or -1 on undefined / end of program.
    auto decode = [&](std::size_t pos, unsigned& operand, std::size_t& len) -> int {
        std::string seen;
        std::size_t p = pos;
        for (;;) {
            int b = bit_at(p++);
            if (b < 0) return -1;
            seen.push_back(b ? '1' : '0');
            int exact = -1;
            bool any_prefix = false;
            for (std::size_t i = 0; i < m.opcodes().size(); ++i) {
                const std::string& pat = m.opcodes()[i].pattern;
                if (pat == seen) exact = static_cast<int>(i);
                if (pat.compare(0, seen.size(), seen) == 0) any_prefix = true;
            }
            if (exact >= 0) {
                operand = 0;
                for (unsigned k = 0; k < m.opcodes()[static_cast<std::size_t>(exact)].operand_bits; ++k) {
                    int ob = bit_at(p++);
                    if (ob < 0) return -1;
                    operand = operand * 2 + static_cast<unsigned>(ob);
                }
                len = p - pos;
                return exact;
            }
            if (!any_prefix) return -1;
        }
    };
    auto go_next = [&](std::size_t npc) -> bool {
        if (instr + 1 < starts.size()) {
            ++instr;
        } else {
            if (starts.size() >= memory) return false;
            starts.push_back(npc);
            instr = starts.size() - 1;
        }
        pc = npc;
        return true;
    };
    auto finish = [&](bool halted) {
        if (halted && prefix && !stream && consumed != prog.size()) halted = false;
        res.halted = halted;
        res.read = consumed;
        return res;
    };
    auto failed_read = [&]() {
        // Running off the end halts a plain program and breaks a prefix one.
        if (eof && !prefix) return finish(true);
        return finish(false);
    };

    while (steps < budget) {
        unsigned operand = 0;
        std::size_t len = 0;
        eof = false;
        int op = decode(pc, operand, len);
        if (op < 0) return failed_read();
        switch (m.opcodes()[static_cast<std::size_t>(op)].op) {
            case Opcode::out_bit:
                res.output.push_back(operand != 0);
                if (!go_next(pc + len)) return finish(false);
                break;
            case Opcode::halt:
                return finish(true);
            case Opcode::cond_copy:
                if (cpos >= cond.size()) return finish(false);
                res.output.push_back(cond[cpos++]);
                if (!go_next(pc + len)) return finish(false);
                break;
            case Opcode::jump_back:
                if (instr < operand + 1) return finish(false);
                instr -= operand + 1;
                pc = starts[instr];
                break;
            case Opcode::halt_if_cond_end:
                if (cpos >= cond.size()) return finish(true);
                if (!go_next(pc + len)) return finish(false);
                break;
            case Opcode::cond_push:
                if (stack.size() >= depth_cap || cpos >= cond.size()) return finish(false);
                stack.push_back(cond[cpos++] ? 1 : 0);
                if (!go_next(pc + len)) return finish(false);
                break;
            case Opcode::pop_out:
                if (stack.empty()) return finish(false);
                res.output.push_back(stack.back() != 0);
                stack.pop_back();
                if (!go_next(pc + len)) return finish(false);
                break;
            case Opcode::skip_if_zero: {
                if (stack.empty()) return finish(false);
                int top = stack.back();
                if (top == 1) {
                    stack.pop_back();
                    if (!go_next(pc + len)) return finish(false);
                    break;
                }
                unsigned skipped_operand = 0;
                std::size_t skipped_len = 0;
                eof = false;
                if (decode(pc + len, skipped_operand, skipped_len) < 0) return failed_read();
                stack.pop_back();
                std::size_t after = pc + len;
                if (!go_next(after)) return finish(false);
                if (!go_next(after + skipped_len)) return finish(false);
                break;
            }
            case Opcode::prog_push: {
                if (stack.size() >= depth_cap) return finish(false);
                eof = false;
                int b = bit_at(consumed);
                if (b < 0) return failed_read();
                stack.push_back(b);
                if (!go_next(pc + len)) return finish(false);
                break;
            }
            case Opcode::copy_rest: {
                eof = false;
                int b = bit_at(consumed);
                if (b < 0) return failed_read();
                res.output.push_back(b != 0);
                break;
            }
        }
        ++steps;
    }
    return finish(false);
}

/// Shortest (then lexicographically first) program per output, over all
/// programs of length <= max_bits.
struct Best {
    std::size_t length;
    BitString program;
};

inline std::map<BitString, Best> brute_force(const MachineDescriptor& m, const BitString& cond, unsigned max_bits,
                                             std::uint64_t budget) {
    std::map<BitString, Best> best;
    for (unsigned len = 0; len <= max_bits; ++len) {
        for (const auto& p : klab::all_strings_of_length(len)) {
            Result r = execute(m, p, cond, budget);
            if (!r.halted) continue;
            best.try_emplace(r.output, Best{len, p});
        }
    }
    return best;
}

}  // namespace oracle
