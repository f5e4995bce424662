#include "klab/machine.hpp"

#include <sstream>
#include <stdexcept>

#include "klab/bitcodec.hpp"
#include "klab/detail/interpreter.hpp"

namespace klab {

std::string_view to_string(Mode mode) { return mode == Mode::plain ? "plain" : "prefix"; }

Mode mode_from_string(std::string_view text) {
    if (text == "plain") return Mode::plain;
    if (text == "prefix") return Mode::prefix;
    throw std::invalid_argument("unknown mode: " + std::string(text));
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::halted: return "halted";
        case RunStatus::out_of_budget: return "out_of_budget";
        case RunStatus::stuck: return "stuck";
    }
    return "?";
}

MachineDescriptor::MachineDescriptor(std::string name, unsigned version, Mode mode, std::vector<OpcodeSpec> opcodes,
                                     MachineLimits limits, MachineConstants constants)
    : name_(std::move(name)),
      version_(version),
      mode_(mode),
      opcodes_(std::move(opcodes)),
      limits_(limits),
      constants_(constants) {
    if (opcodes_.empty() || opcodes_.size() > 100) throw std::invalid_argument("machine: bad opcode count");
    if (limits_.stack_depth == 0 || limits_.stack_depth > 16) throw std::invalid_argument("machine: stack depth");
    if (limits_.instruction_memory == 0 || limits_.instruction_memory > detail::kMaxInstructions) {
        throw std::invalid_argument("machine: instruction memory");
    }
    trie_.emplace_back();
    for (std::size_t i = 0; i < opcodes_.size(); ++i) {
        const auto& spec = opcodes_[i];
        if (spec.pattern.empty()) throw std::invalid_argument("machine: empty opcode pattern");
        if (spec.operand_bits > 7) throw std::invalid_argument("machine: operand too wide");
        std::size_t node = 0;
        for (std::size_t j = 0; j < spec.pattern.size(); ++j) {
            char c = spec.pattern[j];
            if (c != '0' && c != '1') throw std::invalid_argument("machine: bad opcode pattern " + spec.pattern);
            auto b = static_cast<std::size_t>(c - '0');
            std::int16_t next = trie_[node].next[b];
            bool last = j + 1 == spec.pattern.size();
            if (next < kUndefined) throw std::invalid_argument("machine: opcode patterns not prefix-free");
            if (last) {
                if (next != kUndefined) throw std::invalid_argument("machine: opcode patterns not prefix-free");
                trie_[node].next[b] = static_cast<std::int16_t>(-2 - static_cast<int>(i));
            } else {
                if (next == kUndefined) {
                    trie_.emplace_back();
                    next = static_cast<std::int16_t>(trie_.size() - 1);
                    trie_[node].next[b] = next;
                }
                node = static_cast<std::size_t>(next);
            }
        }
    }
    fingerprint_ = sha256(describe());
}

std::string MachineDescriptor::describe() const {
    std::ostringstream out;
    out << "machine " << name_ << '\n'
        << "version " << version_ << '\n'
        << "mode " << to_string(mode_) << '\n'
        << "codec-version " << kCodecVersion << '\n'
        << "stack-depth " << limits_.stack_depth << '\n'
        << "instruction-memory " << limits_.instruction_memory << '\n'
        << "literal-alpha " << constants_.literal_alpha << '\n'
        << "literal-beta " << constants_.literal_beta << '\n'
        << "copy-gamma " << constants_.copy_gamma << '\n';
    for (const auto& spec : opcodes_) {
        out << "opcode " << spec.pattern << ' ' << spec.mnemonic << " operand-bits=" << spec.operand_bits << " : "
            << spec.semantics << '\n';
    }
    return out.str();
}

unsigned MachineDescriptor::shortest_opcode_length() const noexcept {
    std::size_t best = SIZE_MAX;
    for (const auto& spec : opcodes_) best = std::min(best, spec.pattern.size());
    return static_cast<unsigned>(best);
}

MachineDescriptor reference_machine(Mode mode) {
    std::vector<OpcodeSpec> table = {
        {Opcode::out_bit, "OUTP", "0", 1, "output the operand bit"},
        {Opcode::halt, "HALT", "100", 0, "halt"},
        {Opcode::cond_copy, "CCOPY", "101", 0, "copy next condition bit to output; stuck if exhausted"},
        {Opcode::jump_back, "JBACK", "1100", 2, "jump back operand+1 instructions; stuck before program start"},
        {Opcode::halt_if_cond_end, "HCE", "1101", 0, "halt if the condition tape is exhausted"},
        {Opcode::cond_push, "RCOND", "11100", 0, "push next condition bit; stuck if exhausted or stack full"},
        {Opcode::pop_out, "POPOUT", "11101", 0, "pop and output; stuck if stack empty"},
        {Opcode::skip_if_zero, "SKIPZ", "11110", 0, "pop; if 0 decode and skip the next instruction"},
        {Opcode::prog_push, "PREAD", "111110", 0, "push next unread program bit; stuck if stack full"},
        {Opcode::copy_rest, "COPYR", "111111", 0, "copy next unread program bit to output and repeat"},
    };
    MachineConstants constants;
    if (mode == Mode::plain) {
        constants = {2, 0, 13};
    } else {
        constants = {2, 3, 13};
    }
    return MachineDescriptor("klab-ref", 1, mode, std::move(table), MachineLimits{16, 32}, constants);
}

std::string lab_description(const MachineDescriptor& plain, const MachineDescriptor& prefix) {
    return plain.describe() + prefix.describe();
}

Digest lab_fingerprint(const MachineDescriptor& plain, const MachineDescriptor& prefix) {
    return sha256(lab_description(plain, prefix));
}

namespace {

struct DirectTapes {
    const BitString* program;
    const BitString* condition;
    bool stream = false;
    std::size_t cond_pos = 0;
    BitString output;

    int read_program(std::uint32_t pos) const {
        return pos < program->size() ? static_cast<int>((*program)[pos]) : detail::kEof;
    }
    bool program_complete(std::uint32_t consumed) const { return stream || consumed == program->size(); }
    int cond_peek() const {
        return cond_pos < condition->size() ? static_cast<int>((*condition)[cond_pos]) : detail::kEnd;
    }
    int cond_at_end() const { return cond_pos >= condition->size() ? 1 : 0; }
    void cond_advance() { ++cond_pos; }
    bool emit(bool bit) {
        output.push_back(bit);
        return true;
    }
    std::uint64_t progress() const { return static_cast<std::uint64_t>(cond_pos) << 32 | output.size(); }
};

RunResult run_impl(const MachineDescriptor& machine, const BitString& program, const BitString& condition,
                   std::uint64_t budget, bool stream) {
    if (program.size() >= 0xFFFF) throw std::invalid_argument("run: program longer than 65534 bits");
    detail::ExecState state;
    DirectTapes tapes{&program, &condition, stream, 0, {}};
    auto capped = static_cast<std::uint32_t>(budget > 0xFFFFFFFFULL ? 0xFFFFFFFFULL : budget);
    detail::Event ev = detail::resume(machine, state, tapes, capped);
    RunResult result;
    result.program_bits_read = state.consumed;
    result.steps_used = state.steps;
    switch (ev) {
        case detail::Event::halted:
            result.status = RunStatus::halted;
            result.output = std::move(tapes.output);
            break;
        case detail::Event::out_of_budget: result.status = RunStatus::out_of_budget; break;
        default: result.status = RunStatus::stuck; break;
    }
    return result;
}

}  // namespace

RunResult run(const MachineDescriptor& machine, const BitString& program, const BitString& condition,
              std::uint64_t budget) {
    return run_impl(machine, program, condition, budget, false);
}

RunResult run_stream(const MachineDescriptor& machine, const BitString& stream, const BitString& condition,
                     std::uint64_t budget) {
    if (machine.mode() != Mode::prefix) throw std::invalid_argument("run_stream: requires a prefix-mode machine");
    return run_impl(machine, stream, condition, budget, true);
}

}  // namespace klab
