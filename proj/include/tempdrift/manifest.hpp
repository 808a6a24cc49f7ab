#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "tempdrift/selflabel.hpp"

namespace tempdrift {

constexpr std::string_view kToolVersion = "tempdrift 0.1.0";

struct InputDigest {
    std::string path;
    std::string fnv64;
};

// Everything needed to re-execute a run bit-identically: config snapshot,
// seed, tool version, input digests, output paths. Written atomically at the
// end of every command.
struct RunManifest {
    std::string command;
    uint64_t seed = 0;
    nlohmann::json config;
    std::vector<InputDigest> inputs;
    std::vector<std::string> outputs;
    std::vector<StageRecord> timings;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::string& dir);

}  // namespace tempdrift
