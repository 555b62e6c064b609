#pragma once

#include <dsurf/mesh.hpp>

#include <map>
#include <mutex>
#include <nlohmann/json_fwd.hpp>

namespace dsurf {

/// Triangle mesh whose vertices lie on a sphere centred at the origin.
class SphereMesh
{
public:
    SphereMesh() = default;

    /// Validates: every |v| within 1e-6 relative of radius, chi = 2, no face
    /// with non-positive signed volume about the origin. Throws argument-error.
    SphereMesh(TriangleMesh mesh, double radius);

    /// Radius taken as the mean vertex norm; vertices are not moved.
    static SphereMesh from_mesh(TriangleMesh mesh);

    /// Radial projection of an arbitrary star-shaped mesh onto a sphere.
    static SphereMesh radial_projection(const TriangleMesh& mesh, double radius);

    const TriangleMesh& mesh() const { return m_mesh; }
    double radius() const { return m_radius; }

private:
    TriangleMesh m_mesh;
    double m_radius = 1.0;
};

/// Faces whose signed volume a.(b x c) about the origin is <= 0.
std::size_t count_inverted_faces(const TriangleMesh& mesh);

/// Icosahedron subdivided `level` times; V = 10 * 4^level + 2, outward winding.
SphereMesh icosphere(int level, double radius = 1.0);

/// Per-query source triangle and barycentric weights.
struct BarycentricTable
{
    std::vector<std::uint32_t> face;
    std::vector<std::array<double, 3>> weights;
    std::size_t n_fallback_queries = 0;
};

/// Locates every query vertex in a source triangle by central projection.
/// Queries that fall in no triangle (within 1e-12) use the closest triangle.
BarycentricTable barycentric_table(const SphereMesh& source, const SphereMesh& query);

/// Thread-safe cache of tables keyed by content hashes of the two meshes.
class BarycentricCache
{
public:
    const BarycentricTable& get(const SphereMesh& source, const SphereMesh& query);
    std::size_t size() const;

private:
    mutable std::mutex m_mutex;
    std::map<std::pair<std::uint64_t, std::uint64_t>, BarycentricTable> m_tables;
};

std::vector<double> barycentric_resample(std::span<const double> values, const SphereMesh& source,
                                         const SphereMesh& query, BarycentricCache* cache = nullptr);
std::vector<Vec3> barycentric_resample(std::span<const Vec3> values, const SphereMesh& source,
                                       const SphereMesh& query, BarycentricCache* cache = nullptr);

/// beta = sum(xs * xf) / sum(xs^2). Throws argument-error on length mismatch
/// or all-zero xs.
double optimal_beta(std::span<const double> sphere_metrics, std::span<const double> surf_metrics);

/// sqrt(mean((beta * xs - xf)^2)).
double rmsd_at(double beta, std::span<const double> sphere_metrics, std::span<const double> surf_metrics);

enum class DistortionMetric { Edge, Area };

struct DistortionEntry
{
    double rmsd = 0.0;
    double beta = 1.0;
    std::vector<double> residuals; ///< beta * xs - xf per edge or face
};

/// Per-edge chord lengths or per-face flat areas.
std::vector<double> mesh_metrics(const TriangleMesh& mesh, DistortionMetric metric);

/// Minimum RMSD over beta between the sphere and surface metrics. Throws
/// argument-error when the connectivity differs.
DistortionEntry metric_distortion(const TriangleMesh& sphere, const TriangleMesh& surface, DistortionMetric metric);

struct DistortionReport
{
    double edge_rmsd = 0.0;
    double area_rmsd = 0.0;
    double beta_edge = 1.0;
    double beta_area = 1.0;
    std::size_t n_fallback_queries = 0;
    std::vector<double> edge_residuals;
    std::vector<double> area_residuals;

    double weighted(double lambda_e, double lambda_a) const { return lambda_e * edge_rmsd + lambda_a * area_rmsd; }
};

DistortionReport distortion_report(const TriangleMesh& sphere, const TriangleMesh& surface);

/// {edge_rmsd, area_rmsd, beta_edge, beta_area, n_fallback_queries}.
nlohmann::json to_json(const DistortionReport& report);

struct ProjectionConfig
{
    double lambda_e = 1.0;
    double lambda_a = 0.5;
    int iterations = 300;
    /// Largest per-step vertex displacement as a fraction of the mean sphere edge length.
    double step_size = 0.5;
    int smoothing_passes = 5;
    /// Stop once the relative loss decrease of an accepted step falls below this.
    double tolerance = 1e-7;

    void validate() const;
};

struct ProjectionStep
{
    int iteration = 0;
    double loss = 0.0;
    double edge_rmsd = 0.0;
    double area_rmsd = 0.0;
    double step = 0.0;
};

struct ProjectionResult
{
    SphereMesh sphere;
    DistortionReport initial;
    DistortionReport final;
    std::vector<ProjectionStep> history; ///< accepted steps, entry 0 is the start
};

/// Value and per-vertex gradient of lambda_e * L_e + lambda_a * L_a with
/// respect to the sphere vertex positions.
double distortion_loss_gradient(const TriangleMesh& sphere, std::span<const double> surf_edges,
                                std::span<const double> surf_areas, double lambda_e, double lambda_a,
                                std::vector<Vec3>& grad);

/// Gradient descent on the weighted distortion over sphere vertex positions
/// with tangent projection, displacement smoothing, renormalization and
/// backtracking. Throws projection-failure when every trial step in an
/// iteration inverts a triangle.
ProjectionResult project_to_sphere(const TriangleMesh& surface, const SphereMesh& initial,
                                   const ProjectionConfig& config = {});

} // namespace dsurf
