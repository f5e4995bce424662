#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "klab/bitstring.hpp"
#include "klab/digest.hpp"

namespace klab {

/// Plain: the whole program is given and reading past its end halts the
/// machine. Prefix: program bits are fetched on demand, a read past the end
/// is Stuck, and a halt only counts when every program bit was read.
enum class Mode : std::uint8_t { plain = 0, prefix = 1 };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

enum class Opcode : std::uint8_t {
    out_bit,           // output the inline operand bit
    halt,
    cond_copy,         // copy the next condition bit to the output
    jump_back,         // jump back operand+1 instructions
    halt_if_cond_end,  // halt when the condition tape is exhausted
    cond_push,         // push the next condition bit
    pop_out,           // pop and output
    skip_if_zero,      // pop; skip the next instruction when the bit was 0
    prog_push,         // push the next unread program bit
    copy_rest,         // copy the next unread program bit to the output, repeat
};

struct OpcodeSpec {
    Opcode op;
    std::string mnemonic;
    std::string pattern;  // '0'/'1'
    unsigned operand_bits;
    std::string semantics;
};

struct MachineLimits {
    unsigned stack_depth = 16;
    unsigned instruction_memory = 32;
};

/// Documented capability constants; tests re-establish them by exhaustive search.
struct MachineConstants {
    unsigned literal_alpha = 0;  // shortest program for x has length <= alpha*|x| + beta, |x| <= 10
    unsigned literal_beta = 0;
    unsigned copy_gamma = 0;     // C(x|x) <= gamma, |x| <= 10
};

/// A frozen machine definition. Immutable once constructed; its fingerprint is
/// the SHA-256 of describe().
class MachineDescriptor {
public:
    static constexpr std::int16_t kUndefined = -1;

    MachineDescriptor(std::string name, unsigned version, Mode mode, std::vector<OpcodeSpec> opcodes,
                      MachineLimits limits, MachineConstants constants);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] unsigned version() const noexcept { return version_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] const std::vector<OpcodeSpec>& opcodes() const noexcept { return opcodes_; }
    [[nodiscard]] const MachineLimits& limits() const noexcept { return limits_; }
    [[nodiscard]] const MachineConstants& constants() const noexcept { return constants_; }
    [[nodiscard]] const Digest& fingerprint() const noexcept { return fingerprint_; }

    /// Canonical text serialization; sha256(describe()) == fingerprint().
    [[nodiscard]] std::string describe() const;

    // Opcode decoding trie. next[b] >= 0: internal node; kUndefined: no
    // opcode; otherwise -2 - opcode index.
    struct DecodeNode {
        std::array<std::int16_t, 2> next{kUndefined, kUndefined};
    };
    [[nodiscard]] const std::vector<DecodeNode>& decode_trie() const noexcept { return trie_; }

    [[nodiscard]] unsigned shortest_opcode_length() const noexcept;

private:
    std::string name_;
    unsigned version_;
    Mode mode_;
    std::vector<OpcodeSpec> opcodes_;
    MachineLimits limits_;
    MachineConstants constants_;
    std::vector<DecodeNode> trie_;
    Digest fingerprint_;
};

/// The frozen reference machine.
MachineDescriptor reference_machine(Mode mode);

/// Both mode descriptions back to back.
std::string lab_description(const MachineDescriptor& plain, const MachineDescriptor& prefix);
/// sha256(lab_description); carried by reports.
Digest lab_fingerprint(const MachineDescriptor& plain, const MachineDescriptor& prefix);

enum class RunStatus : std::uint8_t { halted, out_of_budget, stuck };
std::string_view to_string(RunStatus status);

struct RunResult {
    RunStatus status = RunStatus::stuck;
    BitString output;  // meaningful only when halted
    std::uint64_t program_bits_read = 0;
    std::uint64_t steps_used = 0;

    bool operator==(const RunResult&) const = default;
};

/// Runs `program` on `condition` for at most `budget` steps.
RunResult run(const MachineDescriptor& machine, const BitString& program, const BitString& condition,
              std::uint64_t budget);

/// Prefix-mode run over a longer bit stream: halting is accepted wherever it
/// happens and program_bits_read says where the self-delimited program ended.
RunResult run_stream(const MachineDescriptor& machine, const BitString& stream, const BitString& condition,
                     std::uint64_t budget);

}  // namespace klab
