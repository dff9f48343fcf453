#pragma once

// Helpers for driving the kanhead executable from tests.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace kanhead::testing {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

/// Runs the CLI with `args` (already shell-quoted where needed).
inline CliResult run_cli(const std::string& args, const fs::path& scratch) {
    fs::create_directories(scratch);
    const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd = std::string("'") + KANHEAD_CLI + "' " + args + " > '" + out.string() + "' 2> '" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// Fresh scratch directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kanhead_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline std::string source_path(const std::string& rel) { return (fs::path(KANHEAD_SOURCE_DIR) / rel).string(); }

/// Run-record fields that must match between runs with the same seed
/// (everything except wall-clock timings).
inline nlohmann::json metrics_fields(nlohmann::json rec) {
    for (const char* k : {"train_seconds", "fwd_ms_mean", "bwd_ms_mean"}) rec.erase(k);
    return rec;
}

} // namespace kanhead::testing
