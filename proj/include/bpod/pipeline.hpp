#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpod/config.hpp"

namespace bpod::pipeline {

inline constexpr int kWorkdirFormatVersion = 1;

// Text key: value run record; holds the config hash, stage hashes/status and
// one checksum line per artifact.
struct Manifest {
    std::map<std::string, std::string> kv;

    static Manifest load(const std::string& workdir);
    void save(const std::string& workdir) const;

    std::string get(const std::string& key) const;
    bool has(const std::string& key) const { return kv.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { kv[key] = value; }
};

// Stage names in execution order.
const std::vector<std::string>& stage_names();

// Run all stages (or a single named stage, when `only` is non-empty) into the
// working directory, skipping stages whose inputs have not changed.  Returns
// the process exit code (0 ok, 1 numerical failure, 2 usage).
int run_pipeline(const config::CaseConfig& cfg, const std::string& workdir,
                 std::ostream& log, const std::string& only = "");

struct VerifyItem {
    std::string name;
    bool pass = false;
    std::string detail;  // measured values
};

struct VerifyReport {
    std::vector<VerifyItem> items;
    std::vector<std::string> missing;  // artifacts absent or corrupt
    bool ok() const;
};

// Check artifact integrity against the manifest and evaluate every acceptance
// criterion applicable to the case recorded in the working directory.
VerifyReport verify(const std::string& workdir, std::ostream& log);

}  // namespace bpod::pipeline
