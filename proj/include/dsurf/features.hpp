#pragma once

#include <dsurf/field.hpp>
#include <dsurf/mesh.hpp>

#include <optional>

namespace dsurf {

enum class InflationMode { Inflated, VeryInflated };

struct InflationConfig
{
    InflationMode mode = InflationMode::Inflated;
    /// 0 selects the mode default (200 inflated, 1000 very inflated).
    int iterations = 0;
    /// Fraction of the base curvature-flow step taken per iteration, in (0, 1].
    double smoothing_weight = 1.0;
    /// Base step as a fraction of the squared equivalent-sphere radius A / (4 pi).
    double diffusion_scale = 5e-4;

    int resolved_iterations() const;
    void validate() const;
};

struct InflationResult
{
    TriangleMesh inflated;
    VertexScalarField sulcal_depth; ///< mm, positive where vertices moved outward
    int substeps_per_iteration = 1;
    std::size_t curvature_fallbacks = 0;
};

/// Inflation by curvature-normal flow with global area restoration. Each
/// iteration moves every vertex along its osculating-sphere curvature vector,
/// then rescales about the centroid so the total area equals the input area.
/// Sulcal depth accumulates the displacement projected on the pre-step outward
/// vertex normal. Throws numeric-error when the area collapses.
InflationResult inflate(const TriangleMesh& mesh, const InflationConfig& config = {});

/// Per wm vertex v: 0.5 * (|v - p| + |p - w|), p the nearest pial vertex to v
/// and w the nearest wm vertex to p.
VertexScalarField cortical_thickness(const TriangleMesh& wm, const TriangleMesh& pial);

struct CurvatureResult
{
    VertexScalarField mean_curvature; ///< 1/mm, positive on convex regions
    /// 1 where an obtuse incident triangle contributed barycentric area instead of Voronoi area.
    std::vector<char> barycentric_fallback;
};

/// Cotangent-Laplacian mean curvature H = |Delta v| / 2, Voronoi area
/// normalized, signed positive where Delta v points against the outward normal.
CurvatureResult mean_curvature(const TriangleMesh& mesh);

/// (wm + pial) / 2 per vertex. Throws argument-error on connectivity mismatch.
TriangleMesh midthickness(const TriangleMesh& wm, const TriangleMesh& pial);

/// Gaussian-weighted mean of voxel values within distance thickness[v] of each
/// vertex (sigma = thickness / 2), skipping voxels where the mask is 0. Falls
/// back to trilinear sampling when no voxel qualifies.
VertexScalarField volume_to_surface(const ScalarVolume& volume, const TriangleMesh& mesh,
                                    const VertexScalarField& thickness, const ScalarVolume* ribbon_mask = nullptr);

} // namespace dsurf
