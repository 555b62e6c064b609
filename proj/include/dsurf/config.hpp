#pragma once

#include <dsurf/features.hpp>
#include <dsurf/fit.hpp>
#include <dsurf/smoothing.hpp>
#include <dsurf/sphere.hpp>
#include <dsurf/synthetic.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>

namespace dsurf {

/// Reads one JSON object, remembering which keys were consumed so that
/// finish() can reject anything unrecognised (config-error).
class ObjectReader
{
public:
    ObjectReader(const nlohmann::json& j, std::string where);

    bool has(const char* key) const { return m_json.contains(key); }
    bool has_null(const char* key) const { return m_json.contains(key) && m_json.at(key).is_null(); }

    template <typename T>
    bool read(const char* key, T& out)
    {
        m_seen.insert(key);
        if (!m_json.contains(key) || m_json.at(key).is_null()) return false;
        try {
            out = m_json.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::Config, m_where + "." + key + ": " + e.what());
        }
        return true;
    }

    bool read(const char* key, Vec3& out);
    bool read(const char* key, std::array<int, 3>& out);

    /// Nested object; nullptr when absent.
    std::optional<ObjectReader> object(const char* key);

    void finish() const;
    const std::string& where() const { return m_where; }

private:
    const nlohmann::json& m_json;
    std::string m_where;
    std::set<std::string> m_seen;
};

/// Grid over the working volume. Without spacing and origin the grid is a
/// cube fitted to the bounding box of every input surface plus the margin.
struct GridSpec
{
    std::array<int, 3> dims{16, 16, 16};
    std::optional<Vec3> spacing;
    std::optional<Vec3> origin;
    double margin_mm = 0.4;

    GridGeometry resolve(std::span<const Vec3> points) const;
};

struct SyntheticSpec
{
    SyntheticParams params{SyntheticKind::Ellipsoid, 4, 1.0, Vec3(1.0, 0.8, 1.2), 0.1, 3, 0.0};
    /// Pial target = white-matter target scaled by this factor about the origin.
    double pial_scale = 1.15;
};

struct PipelineConfig
{
    std::uint64_t seed = 42;
    std::optional<std::filesystem::path> template_mesh;
    std::optional<std::filesystem::path> wm_target;
    std::optional<std::filesystem::path> pial_target;
    std::optional<std::filesystem::path> volume;
    std::optional<std::filesystem::path> ribbon_mask;
    int template_level = 3;
    SyntheticSpec synthetic;
    GridSpec grid;
    int levels = 2;
    /// Without an explicit deformation.sigma_mm the smoothing sigma is one
    /// voxel of the resolved full-resolution grid.
    bool sigma_explicit = false;
    IntegrationConfig integration;
    LossWeights loss;
    FitConfig optimizer;
    TaubinParams taubin;
    InflationConfig inflation;
    ProjectionConfig projection;
    int resample_level = 4;

    /// Integration parameters with sigma resolved against the grid.
    IntegrationConfig resolved_integration(const GridGeometry& full) const;

    void validate() const;
};

/// Strict parser: unknown keys anywhere raise config-error. Relative paths
/// are resolved against base_dir.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Canonical JSON form (every field, defaults included); hashed into manifests.
nlohmann::json to_json(const PipelineConfig& config);

/// Section parsers shared by the single-stage CLI commands.
void parse_section(ObjectReader& r, IntegrationConfig& c);
void parse_section(ObjectReader& r, LossWeights& c);
void parse_section(ObjectReader& r, FitConfig& c);
void parse_section(ObjectReader& r, TaubinParams& c);
void parse_section(ObjectReader& r, InflationConfig& c);
void parse_section(ObjectReader& r, ProjectionConfig& c);
void parse_section(ObjectReader& r, GridSpec& c);
void parse_section(ObjectReader& r, SyntheticSpec& c);

std::string to_string(IntegrationMethod m);
IntegrationMethod parse_integration_method(const std::string& s);

} // namespace dsurf
