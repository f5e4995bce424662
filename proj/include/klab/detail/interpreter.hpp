#pragma once

// Resumable interpreter shared by direct runs and the enumerator.
//
// The tapes object supplies program bits, condition bits and the output sink.
// Any tape may answer "not known yet" (kNeed); the interpreter then returns a
// need_* event without having executed the current instruction, and the
// caller resumes after providing the answer. Bits already read stay read, so
// a restarted instruction re-decodes from the buffer.

#include <array>
#include <cstdint>

#include "klab/machine.hpp"

namespace klab::detail {

inline constexpr int kNeed = -1;
inline constexpr int kEof = -2;   // program tape: no more bits
inline constexpr int kEnd = -3;   // condition tape: exhausted
inline constexpr unsigned kMaxInstructions = 32;

enum class Event : std::uint8_t {
    halted,
    out_of_budget,
    stuck,
    pruned,  // the output sink rejected a bit
    need_program_bit,
    need_cond_bit,
    need_cond_end,
};

struct ExecState {
    std::uint32_t steps = 0;
    std::uint16_t pc = 0;
    std::uint16_t consumed = 0;  // program bits read so far; also the data head
    std::uint16_t stack = 0;     // top of stack at bit 0
    std::uint8_t depth = 0;
    std::uint8_t instr = 0;  // index of the instruction at pc in starts
    std::uint8_t nstarts = 1;
    std::array<std::uint16_t, kMaxInstructions> starts{};
};

namespace impl {

template <class Tapes>
inline int fetch(ExecState& s, Tapes& t, std::uint32_t pos) {
    int b = t.read_program(pos);
    if (b >= 0 && pos >= s.consumed) s.consumed = static_cast<std::uint16_t>(pos + 1);
    return b;
}

struct Decoded {
    std::uint8_t opcode = 0;
    std::uint8_t operand = 0;
    std::uint32_t length = 0;
};

inline constexpr int kUndefinedOpcode = -10;

template <class Tapes>
inline int decode(const MachineDescriptor& m, ExecState& s, Tapes& t, std::uint32_t pos, Decoded& d) {
    const auto& trie = m.decode_trie();
    std::uint32_t p = pos;
    int node = 0;
    for (;;) {
        int b = fetch(s, t, p);
        if (b < 0) return b;
        ++p;
        int next = trie[static_cast<std::size_t>(node)].next[static_cast<std::size_t>(b)];
        if (next == MachineDescriptor::kUndefined) return kUndefinedOpcode;
        if (next < 0) {
            d.opcode = static_cast<std::uint8_t>(-2 - next);
            break;
        }
        node = next;
    }
    unsigned operand = 0;
    for (unsigned i = 0; i < m.opcodes()[d.opcode].operand_bits; ++i) {
        int b = fetch(s, t, p);
        if (b < 0) return b;
        ++p;
        operand = (operand << 1) | static_cast<unsigned>(b);
    }
    d.operand = static_cast<std::uint8_t>(operand);
    d.length = p - pos;
    return 0;
}

// Moves to the instruction following the current one, which starts at next_pc.
inline bool advance(ExecState& s, std::uint32_t next_pc, unsigned memory) {
    if (static_cast<unsigned>(s.instr) + 1 < s.nstarts) {
        ++s.instr;
    } else {
        if (s.nstarts >= memory) return false;
        s.starts[s.nstarts] = static_cast<std::uint16_t>(next_pc);
        s.instr = s.nstarts++;
    }
    s.pc = static_cast<std::uint16_t>(next_pc);
    return true;
}

}  // namespace impl

/// Runs until halt, stuck, budget exhaustion, a rejected output bit, or a
/// tape answering kNeed.
template <class Tapes>
Event resume(const MachineDescriptor& m, ExecState& s, Tapes& t, std::uint32_t budget) {
    using impl::Decoded;
    const bool prefix = m.mode() == Mode::prefix;
    const unsigned memory = m.limits().instruction_memory < kMaxInstructions ? m.limits().instruction_memory
                                                                             : kMaxInstructions;
    const unsigned stack_depth = m.limits().stack_depth < 16 ? m.limits().stack_depth : 16;

    // A read past the program end: implicit halt (plain) or over-read (prefix).
    auto on_program_read_failure = [&](int code) -> Event {
        if (code == kNeed) return Event::need_program_bit;
        if (code == kEof && !prefix) {
            ++s.steps;
            return Event::halted;
        }
        return Event::stuck;
    };
    auto do_halt = [&]() -> Event {
        ++s.steps;
        if (prefix && !t.program_complete(s.consumed)) return Event::stuck;
        return Event::halted;
    };

    // Brent cycle detection over the complete machine state. A repeated state
    // never halts, which at any budget reads as out_of_budget.
    std::uint64_t saved_ctl = ~std::uint64_t{0};
    std::uint64_t saved_tape = ~std::uint64_t{0};
    std::uint32_t power = 1;
    std::uint32_t lam = 0;

    for (;;) {
        if (s.steps >= budget) return Event::out_of_budget;

        const std::uint64_t ctl = std::uint64_t{s.pc} | std::uint64_t{s.consumed} << 16 |
                                  std::uint64_t{s.stack} << 32 | std::uint64_t{s.depth} << 48 |
                                  std::uint64_t{s.nstarts} << 56;
        const std::uint64_t tape = t.progress();
        if (ctl == saved_ctl && tape == saved_tape) {
            s.steps = budget;
            return Event::out_of_budget;
        }
        if (++lam == power) {
            saved_ctl = ctl;
            saved_tape = tape;
            power <<= 1;
            lam = 0;
        }

        Decoded d;
        if (int r = impl::decode(m, s, t, s.pc, d); r != 0) {
            if (r == impl::kUndefinedOpcode) return Event::stuck;
            return on_program_read_failure(r);
        }
        const std::uint32_t next_pc = s.pc + d.length;

        switch (m.opcodes()[d.opcode].op) {
            case Opcode::out_bit:
                if (!t.emit(d.operand != 0)) return Event::pruned;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            case Opcode::halt:
                return do_halt();
            case Opcode::cond_copy: {
                int c = t.cond_peek();
                if (c == kNeed) return Event::need_cond_bit;
                if (c == kEnd) return Event::stuck;
                t.cond_advance();
                if (!t.emit(c != 0)) return Event::pruned;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            }
            case Opcode::jump_back: {
                int target = static_cast<int>(s.instr) - static_cast<int>(d.operand) - 1;
                if (target < 0) return Event::stuck;
                s.instr = static_cast<std::uint8_t>(target);
                s.pc = s.starts[static_cast<std::size_t>(target)];
                break;
            }
            case Opcode::halt_if_cond_end: {
                int e = t.cond_at_end();
                if (e == kNeed) return Event::need_cond_end;
                if (e == 1) return do_halt();
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            }
            case Opcode::cond_push: {
                if (s.depth >= stack_depth) return Event::stuck;
                int c = t.cond_peek();
                if (c == kNeed) return Event::need_cond_bit;
                if (c == kEnd) return Event::stuck;
                t.cond_advance();
                s.stack = static_cast<std::uint16_t>((s.stack << 1) | static_cast<unsigned>(c));
                ++s.depth;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            }
            case Opcode::pop_out: {
                if (s.depth == 0) return Event::stuck;
                bool bit = s.stack & 1U;
                if (!t.emit(bit)) return Event::pruned;
                s.stack = static_cast<std::uint16_t>(s.stack >> 1);
                --s.depth;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            }
            case Opcode::skip_if_zero: {
                if (s.depth == 0) return Event::stuck;
                if (s.stack & 1U) {
                    s.stack = static_cast<std::uint16_t>(s.stack >> 1);
                    --s.depth;
                    if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                    break;
                }
                // The skipped instruction is decoded, so its bits are read.
                Decoded skipped;
                if (int r = impl::decode(m, s, t, next_pc, skipped); r != 0) {
                    if (r == impl::kUndefinedOpcode) return Event::stuck;
                    return on_program_read_failure(r);
                }
                s.stack = static_cast<std::uint16_t>(s.stack >> 1);
                --s.depth;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                if (!impl::advance(s, next_pc + skipped.length, memory)) return Event::stuck;
                break;
            }
            case Opcode::prog_push: {
                if (s.depth >= stack_depth) return Event::stuck;
                int b = impl::fetch(s, t, s.consumed);
                if (b < 0) return on_program_read_failure(b);
                s.stack = static_cast<std::uint16_t>((s.stack << 1) | static_cast<unsigned>(b));
                ++s.depth;
                if (!impl::advance(s, next_pc, memory)) return Event::stuck;
                break;
            }
            case Opcode::copy_rest: {
                int b = impl::fetch(s, t, s.consumed);
                if (b < 0) return on_program_read_failure(b);
                if (!t.emit(b != 0)) return Event::pruned;
                break;
            }
        }
        ++s.steps;
    }
}

}  // namespace klab::detail
