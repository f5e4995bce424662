// Binary cache file for ComplexityTable.
//
// Layout (integers little-endian):
//   "KLAB1" | u16 format version | 32-byte machine fingerprint | u8 mode |
//   u32 P | u32 T | u64 entry count |
//   entries: u16 cond len, cond bits, u16 target len, target bits,
//            u16 value (0xFFFF = Infinity), u16 witness len, witness bits |
//   32-byte SHA-256 of everything before it.
// Bit fields are MSB-first, zero-padded to whole bytes.

#include <cstring>
#include <fstream>
#include <iterator>

#include "klab/enumerator.hpp"

namespace klab {

namespace {

constexpr char kMagic[5] = {'K', 'L', 'A', 'B', '1'};
constexpr std::uint16_t kFormatVersion = 1;
constexpr std::size_t kHeaderSize = 5 + 2 + 32 + 1 + 4 + 4 + 8;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void bits(const BitString& s) {
        if (s.size() > 0xFFFF) throw std::length_error("cache: bit field too long");
        u16(static_cast<std::uint16_t>(s.size()));
        std::uint8_t acc = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            acc = static_cast<std::uint8_t>(acc | (s[i] ? 0x80U >> (i & 7) : 0U));
            if ((i & 7) == 7) {
                out_.push_back(acc);
                acc = 0;
            }
        }
        if (s.size() & 7) out_.push_back(acc);
    }
    std::vector<std::uint8_t>& bytes() { return out_; }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& in, std::size_t end) : in_(in), end_(end) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    BitString bits() {
        std::size_t len = u16();
        std::size_t nbytes = (len + 7) / 8;
        need(nbytes);
        BitString s;
        for (std::size_t i = 0; i < len; ++i) s.push_back((in_[pos_ + i / 8] >> (7 - (i & 7))) & 1U);
        pos_ += nbytes;
        return s;
    }
    [[nodiscard]] std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > end_) throw CacheError(CacheError::Kind::corrupt, "cache: truncated");
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{in_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::vector<std::uint8_t>& in_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

struct Header {
    Digest fingerprint;
    Mode mode;
    unsigned p;
    unsigned t;
    std::uint64_t entries;
};

Header read_header(Reader& r) {
    char magic[5];
    r.raw(magic, 5);
    if (std::memcmp(magic, kMagic, 5) != 0) throw CacheError(CacheError::Kind::corrupt, "cache: bad magic");
    if (r.u16() != kFormatVersion) throw CacheError(CacheError::Kind::corrupt, "cache: unsupported format version");
    Header h{};
    r.raw(h.fingerprint.bytes.data(), 32);
    std::uint8_t mode = r.u8();
    if (mode > 1) throw CacheError(CacheError::Kind::corrupt, "cache: bad mode byte");
    h.mode = static_cast<Mode>(mode);
    h.p = r.u32();
    h.t = r.u32();
    h.entries = r.u64();
    return h;
}

ComplexityTable parse_body(const std::vector<std::uint8_t>& bytes, Reader& r, const Header& h) {
    std::vector<BitString> conds;
    std::vector<BitString> targets;
    struct Raw {
        BitString cond, target;
        std::uint16_t value;
        BitString witness;
    };
    std::vector<Raw> raw;
    raw.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.entries, bytes.size())));
    for (std::uint64_t i = 0; i < h.entries; ++i) {
        Raw e;
        e.cond = r.bits();
        e.target = r.bits();
        e.value = r.u16();
        e.witness = r.bits();
        raw.push_back(std::move(e));
    }
    for (const auto& e : raw) {
        if (conds.empty() || !(conds.back() == e.cond)) conds.push_back(e.cond);
    }
    std::vector<BitString> all_targets;
    for (const auto& e : raw) all_targets.push_back(e.target);
    ComplexityTable table(h.fingerprint, h.mode, h.p, h.t, conds, all_targets);
    if (static_cast<std::uint64_t>(table.conditions().size()) * table.targets().size() != h.entries) {
        throw CacheError(CacheError::Kind::corrupt, "cache: entry grid is not rectangular");
    }
    for (const auto& e : raw) {
        auto row = table.condition_row(e.cond);
        auto col = table.target_column(e.target);
        if (e.value == 0xFFFF) {
            if (!e.witness.empty()) throw CacheError(CacheError::Kind::corrupt, "cache: witness on Infinity entry");
            table.set_cell(*row, *col, kNoWitness);
        } else {
            if (e.witness.size() != e.value || e.value > 32) {
                throw CacheError(CacheError::Kind::corrupt, "cache: witness length disagrees with value");
            }
            table.set_cell(*row, *col, make_witness_key(e.value, static_cast<std::uint32_t>(e.witness.to_uint())));
        }
    }
    return table;
}

}  // namespace

std::vector<std::uint8_t> serialize_table(const ComplexityTable& table) {
    Writer w;
    w.raw(kMagic, 5);
    w.u16(kFormatVersion);
    w.raw(table.machine_fingerprint().bytes.data(), 32);
    w.u8(static_cast<std::uint8_t>(table.mode()));
    w.u32(table.max_program_bits());
    w.u32(table.budget());
    w.u64(static_cast<std::uint64_t>(table.conditions().size()) * table.targets().size());
    for (std::size_t row = 0; row < table.conditions().size(); ++row) {
        for (std::size_t col = 0; col < table.targets().size(); ++col) {
            WitnessKey key = table.cell(row, col);
            w.bits(table.conditions()[row]);
            w.bits(table.targets()[col]);
            if (key == kNoWitness) {
                w.u16(0xFFFF);
                w.bits(BitString{});
            } else {
                w.u16(static_cast<std::uint16_t>(witness_length(key)));
                w.bits(witness_bits(key));
            }
        }
    }
    Digest d = sha256(w.bytes());
    w.raw(d.bytes.data(), 32);
    return std::move(w.bytes());
}

ComplexityTable deserialize_table(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderSize + 32) throw CacheError(CacheError::Kind::corrupt, "cache: truncated");
    const std::size_t body_end = bytes.size() - 32;
    Digest stored;
    std::memcpy(stored.bytes.data(), bytes.data() + body_end, 32);
    if (!(sha256(std::span<const std::uint8_t>(bytes.data(), body_end)) == stored)) {
        throw CacheError(CacheError::Kind::corrupt, "cache: digest mismatch");
    }
    Reader r(bytes, body_end);
    Header h = read_header(r);
    ComplexityTable t = parse_body(bytes, r, h);
    if (r.pos() != body_end) throw CacheError(CacheError::Kind::corrupt, "cache: trailing bytes");
    return t;
}

void save_cache(const ComplexityTable& table, const std::string& path) {
    auto bytes = serialize_table(table);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CacheError(CacheError::Kind::io_failure, "cache: cannot open " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw CacheError(CacheError::Kind::io_failure, "cache: write failed " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw CacheError(CacheError::Kind::io_failure, "cache: cannot rename to " + path);
    }
}

ComplexityTable load_cache(const std::string& path, const Digest& expected_fingerprint, unsigned max_program_bits,
                           unsigned budget) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CacheError(CacheError::Kind::io_failure, "cache: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderSize + 32) throw CacheError(CacheError::Kind::corrupt, "cache: truncated " + path);

    Reader header_reader(bytes, bytes.size() - 32);
    Header h = read_header(header_reader);
    if (!(h.fingerprint == expected_fingerprint)) {
        throw CacheError(CacheError::Kind::fingerprint_mismatch,
                         "cache: machine fingerprint " + h.fingerprint.to_hex() + " does not match active machine");
    }
    ComplexityTable table = deserialize_table(bytes);
    if (table.max_program_bits() != max_program_bits || table.budget() != budget) {
        throw CacheError(CacheError::Kind::config_mismatch, "cache: P/T differ from the requested configuration");
    }
    return table;
}

}  // namespace klab
