#pragma once

#include <dsurf/config.hpp>

#include <functional>
#include <map>

namespace dsurf {

inline constexpr std::array<const char*, 5> pipeline_stages{"fit", "taubin", "inflate", "features", "project"};

struct PipelineRun
{
    nlohmann::json manifest;
    /// Output path relative to the run directory -> SHA-256.
    std::map<std::string, std::string> output_hashes;
};

/// Runs fit -> taubin -> inflate -> features -> project into out_dir, writing
/// manifest.json after every stage. Without target paths, white-matter and
/// pial targets are generated from the synthetic section and seed. A stage
/// failure leaves a FAILED manifest and rethrows with the stage name prefixed
/// and the original error kind.
PipelineRun run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                         const std::function<void(const std::string&)>& log = {});

} // namespace dsurf
