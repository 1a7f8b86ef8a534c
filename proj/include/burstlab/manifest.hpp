#pragma once

// Run manifest: the reproducibility record every command drops next to its
// outputs. Re-running a command with the flags recorded here reproduces its
// CSV/JSONL outputs byte for byte.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/error.hpp"

namespace burstlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    nlohmann::json config;  // resolved flag values
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string started;
    std::string finished;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::filesystem::path write_manifest(const std::filesystem::path& out_dir,
                                            const RunManifest& m) {
    nlohmann::json j;
    j["format"] = "burstlab-manifest";
    j["version"] = 1;
    j["tool_version"] = kToolVersion;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["started"] = m.started;
    j["finished"] = m.finished;

    const std::filesystem::path path = out_dir / "manifest.json";
    std::ofstream f(path);
    if (!f) throw DataError("cannot write manifest: " + path.string());
    f << j.dump(2) << '\n';
    return path;
}

}  // namespace burstlab
