// klab: build complexity tables, verify identities, merge reports.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "klab/pinned_bounds.hpp"
#include "klab/report.hpp"
#include "klab/tableset.hpp"
#include "klab/theorems.hpp"

namespace {

using nlohmann::json;
using namespace klab;

enum Exit : int {
    kOk = 0,
    kRegression = 1,
    kCapacity = 2,
    kIo = 3,
    kMissingCondition = 4,
    kFingerprint = 5,
    kLockHeld = 6,
    kUsage = 64,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    unsigned machine_version = 1;
    unsigned L = 4;
    unsigned P = 24;
    unsigned T = 1024;
    unsigned workers = 0;
    std::string cache_dir = ".klab-cache";
    std::string output_format = "json";
};

constexpr unsigned kMaxL = 10;
constexpr unsigned kMaxT = 1U << 20;

unsigned parse_unsigned(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        unsigned long v = std::stoul(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<unsigned>(v);
    } catch (const std::exception&) {
        throw UsageError("config: " + key + " expects a number, got \"" + value + "\"");
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void load_config_file(const std::string& path, Config& cfg) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config: expected key = value, got \"" + line + "\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "machine_version") {
            cfg.machine_version = parse_unsigned(key, value);
        } else if (key == "L") {
            cfg.L = parse_unsigned(key, value);
        } else if (key == "P") {
            cfg.P = parse_unsigned(key, value);
        } else if (key == "T") {
            cfg.T = parse_unsigned(key, value);
        } else if (key == "workers") {
            cfg.workers = parse_unsigned(key, value);
        } else if (key == "cache_dir") {
            cfg.cache_dir = value;
        } else if (key == "output_format") {
            cfg.output_format = value;
        } else {
            throw UsageError("config: unknown key " + key);
        }
    }
}

void validate(const Config& cfg) {
    if (cfg.machine_version != 1) throw UsageError("only machine_version 1 exists");
    if (cfg.output_format != "json" && cfg.output_format != "csv") throw UsageError("format must be csv or json");
    if (cfg.L > kMaxL) throw CapacityExceeded("L exceeds the hard cap of " + std::to_string(kMaxL));
    if (cfg.P > kMaxProgramBitsCap) {
        throw CapacityExceeded("P exceeds the hard cap of " + std::to_string(kMaxProgramBitsCap));
    }
    if (cfg.T > kMaxT) throw CapacityExceeded("T exceeds the hard cap of 2^20");
}

/// Advisory lock on the cache directory, released on destruction.
class CacheLock {
public:
    explicit CacheLock(const std::string& dir) {
        std::filesystem::create_directories(dir);
        std::string path = (std::filesystem::path(dir) / ".klab.lock").string();
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw CacheError(CacheError::Kind::io_failure, "cannot open lock file " + path);
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            held_ = true;
        }
    }
    ~CacheLock() {
        if (fd_ >= 0) ::close(fd_);
    }
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;
    [[nodiscard]] bool held_elsewhere() const { return held_; }

private:
    int fd_ = -1;
    bool held_ = false;
};

void write_payload(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw CacheError(CacheError::Kind::io_failure, "cannot write " + out_path);
    out << payload;
    if (!out) throw CacheError(CacheError::Kind::io_failure, "write failed " + out_path);
}

Scale scale_of(const Config& cfg) { return {cfg.L, cfg.P, cfg.T}; }

TableSet open_tables(const Config& cfg) {
    WorkbenchOptions opts;
    opts.workers = cfg.workers;
    opts.cache_dir = cfg.cache_dir;
    opts.log = &std::cerr;
    return build_tableset(scale_of(cfg), opts);
}

int cmd_machine_describe() {
    auto plain = reference_machine(Mode::plain);
    auto prefix = reference_machine(Mode::prefix);
    std::cout << lab_description(plain, prefix) << "fingerprint " << lab_fingerprint(plain, prefix).to_hex() << '\n';
    return kOk;
}

int cmd_tables_build(const Config& cfg) {
    CacheLock lock(cfg.cache_dir);
    if (lock.held_elsewhere()) {
        std::cerr << "klab: cache directory " << cfg.cache_dir << " is locked by another process\n";
        return kLockHeld;
    }
    TableSet tables = open_tables(cfg);
    std::cerr << "tables ready: " << tables.tables().size() << " blocks in " << cfg.cache_dir << '\n';
    return kOk;
}

std::string render(const std::vector<DeviationReport>& reports, const Config& cfg) {
    if (cfg.output_format == "csv") return to_csv(reports);
    json doc;
    doc["config"] = {{"machine_version", cfg.machine_version}, {"L", cfg.L}, {"P", cfg.P}, {"T", cfg.T}};
    doc["reports"] = json::array();
    for (const auto& r : reports) doc["reports"].push_back(to_json(r));
    return doc.dump(1) + "\n";
}

int cmd_verify(const std::string& which, const Config& cfg, const std::string& out_path) {
    std::optional<IdentityId> id;
    if (which != "all") {
        id = identity_from_string(which);
        if (!id) throw UsageError("unknown identity id " + which);
    }
    CacheLock lock(cfg.cache_dir);
    if (lock.held_elsewhere()) {
        std::cerr << "klab: cache directory " << cfg.cache_dir << " is locked by another process\n";
        return kLockHeld;
    }
    TableSet tables = open_tables(cfg);
    auto reports = id ? verify_identity(tables, *id, cfg.L) : verify_all(tables, cfg.L);
    write_payload(render(reports, cfg), out_path);
    int code = kOk;
    for (const auto& r : reports) {
        const PinnedBound* b = pinned_bound(r.identity, r.variant);
        if (!b) continue;
        std::int64_t q = bounded_quantity(r, *b);
        if (q > b->bound) {
            std::cerr << "regression: " << r.key() << " reaches " << q << ", pinned bound " << b->bound << '\n';
            code = kRegression;
        }
    }
    return code;
}

struct FingerprintMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<DeviationReport> read_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CacheError(CacheError::Kind::io_failure, "cannot read " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw CacheError(CacheError::Kind::corrupt, path + ": " + e.what());
    }
    std::vector<DeviationReport> out;
    try {
        const json& list = doc.is_array() ? doc : doc.at("reports");
        for (const auto& j : list) out.push_back(report_from_json(j));
    } catch (const std::exception& e) {
        throw CacheError(CacheError::Kind::corrupt, path + ": not a report file (" + e.what() + ")");
    }
    return out;
}

/// Built-in function variants keep their emission order; others sort after them.
std::size_t variant_rank(const std::string& variant) {
    auto fs = builtin_functions();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].first == variant) return i;
    }
    return fs.size();
}

json merge_reports(const std::vector<std::string>& paths) {
    std::map<std::tuple<std::size_t, std::size_t, std::string, unsigned, unsigned, unsigned>, DeviationReport> merged;
    std::optional<Digest> fingerprint;
    for (const auto& path : paths) {
        for (auto& r : read_report_file(path)) {
            if (!fingerprint) fingerprint = r.machine_fingerprint;
            if (!(*fingerprint == r.machine_fingerprint)) {
                throw FingerprintMismatch(path + ": machine fingerprint " + r.machine_fingerprint.to_hex() +
                                          " differs from " + fingerprint->to_hex());
            }
            auto pos = static_cast<std::size_t>(r.identity);
            merged[{pos, variant_rank(r.variant), r.variant, r.scale.L, r.scale.P, r.scale.T}] = std::move(r);
        }
    }
    json doc;
    doc["reports"] = json::array();
    std::map<std::uint64_t, json> trend;
    for (const auto& [key, r] : merged) {
        doc["reports"].push_back(to_json(r));
        if (r.identity != IdentityId::COUNTEREX) continue;
        for (const auto& item : r.items) {
            if (!item.detail.is_object() || !item.detail.contains("n")) continue;
            auto n = item.detail["n"].get<std::uint64_t>();
            json& row = trend[n];
            if (row.is_null()) {
                row = {{"n", n},
                       {"reference", counterexample_reference(static_cast<unsigned>(n))},
                       {"by_scale", json::array()}};
            }
            json entry = {{"L", r.scale.L}, {"P", r.scale.P}, {"T", r.scale.T}};
            entry["gap"] = item.deviation ? json(*item.deviation) : json(nullptr);
            row["by_scale"].push_back(std::move(entry));
        }
    }
    doc["counterexample_trend"] = json::array();
    for (auto& [n, row] : trend) doc["counterexample_trend"].push_back(std::move(row));
    return doc;
}

int cmd_report_merge(const std::vector<std::string>& paths, const std::string& out_path) {
    write_payload(merge_reports(paths).dump(1) + "\n", out_path);
    return kOk;
}

int run(int argc, char** argv) {
    CLI::App app{"klab: exact desk-scale complexity lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<unsigned> flag_L, flag_P, flag_T, flag_workers;
    std::optional<std::string> flag_format, flag_cache;
    std::string out_path;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--scale-L", flag_L, "max total length of a pair (default 4)");
    app.add_option("--prog-bits", flag_P, "max program bits P (default 24)");
    app.add_option("--budget", flag_T, "step budget T (default 1024)");
    app.add_option("--workers", flag_workers, "worker threads, 0 = all cores");
    app.add_option("--format", flag_format, "csv or json");
    app.add_option("--cache-dir", flag_cache, "table cache directory (env KLAB_CACHE_DIR)");
    app.add_option("--out", out_path, "write the payload here instead of standard output");

    auto* machine = app.add_subcommand("machine", "machine description");
    machine->require_subcommand(1);
    machine->fallthrough();
    auto* describe = machine->add_subcommand("describe", "print canonical serialization and fingerprint");
    describe->fallthrough();

    auto* tables = app.add_subcommand("tables", "complexity tables");
    tables->require_subcommand(1);
    tables->fallthrough();
    auto* build = tables->add_subcommand("build", "build or load every table for the scale");
    build->fallthrough();

    std::string which;
    auto* verify = app.add_subcommand("verify", "emit deviation reports");
    verify->add_option("identity", which, "identity id or all")->required();
    verify->fallthrough();

    auto* report = app.add_subcommand("report", "report files");
    report->require_subcommand(1);
    report->fallthrough();
    std::vector<std::string> paths;
    auto* merge = report->add_subcommand("merge", "merge report files");
    merge->add_option("paths", paths, "report files")->required();
    merge->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        Config cfg;
        if (const char* env = std::getenv("KLAB_CACHE_DIR"); env && *env) cfg.cache_dir = env;
        if (!config_path.empty()) load_config_file(config_path, cfg);
        if (flag_L) cfg.L = *flag_L;
        if (flag_P) cfg.P = *flag_P;
        if (flag_T) cfg.T = *flag_T;
        if (flag_workers) cfg.workers = *flag_workers;
        if (flag_format) cfg.output_format = *flag_format;
        if (flag_cache) cfg.cache_dir = *flag_cache;
        validate(cfg);

        if (describe->parsed()) return cmd_machine_describe();
        if (build->parsed()) return cmd_tables_build(cfg);
        if (verify->parsed()) return cmd_verify(which, cfg, out_path);
        if (merge->parsed()) return cmd_report_merge(paths, out_path);
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "klab: " << e.what() << '\n';
        return kUsage;
    } catch (const CapacityExceeded& e) {
        std::cerr << "klab: capacity exceeded: " << e.what() << '\n';
        return kCapacity;
    } catch (const MissingCondition& e) {
        std::cerr << "klab: missing condition: " << e.what() << '\n';
        return kMissingCondition;
    } catch (const FingerprintMismatch& e) {
        std::cerr << "klab: " << e.what() << '\n';
        return kFingerprint;
    } catch (const CacheError& e) {
        std::cerr << "klab: " << e.what() << '\n';
        return e.kind == CacheError::Kind::fingerprint_mismatch ? kFingerprint : kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "klab: " << e.what() << '\n';
        return kIo;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
