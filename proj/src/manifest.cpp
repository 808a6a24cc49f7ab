#include "tempdrift/manifest.hpp"

#include "tempdrift/io.hpp"

namespace tempdrift {

using nlohmann::json;

json manifest_to_json(const RunManifest& manifest) {
    json inputs = json::array();
    for (const auto& in : manifest.inputs) {
        inputs.push_back({{"path", in.path}, {"fnv64", in.fnv64}});
    }
    json timings = json::array();
    for (const auto& stage : manifest.timings) {
        json t = {{"stage", stage.stage}, {"steps", stage.steps}, {"wall_ms", stage.wall_ms}};
        t["final_loss"] = stage.final_loss ? json(*stage.final_loss) : json(nullptr);
        timings.push_back(std::move(t));
    }
    return json{{"schema", "tempdrift.manifest.v1"},
                {"tool_version", std::string(kToolVersion)},
                {"command", manifest.command},
                {"seed", manifest.seed},
                {"config", manifest.config},
                {"inputs", std::move(inputs)},
                {"outputs", manifest.outputs},
                {"timings", std::move(timings)}};
}

void write_manifest(const RunManifest& manifest, const std::string& dir) {
    write_file_atomic(dir + "/manifest.json", manifest_to_json(manifest).dump(2) + "\n");
}

}  // namespace tempdrift
