#pragma once

#include <dsurf/integration.hpp>
#include <dsurf/mesh.hpp>

#include <filesystem>

namespace dsurf {

/// Full-resolution grid plus the number of scales. Scale l (1-based) is
/// downsampled by 2^(L-l-1) for l < L; scale L is full resolution.
struct StackGeometry
{
    GridGeometry full;
    int levels = 4;

    int factor(int scale) const;
    GridGeometry scale_geometry(int scale) const;
    void validate() const;
};

/// Ordered multiscale stationary velocity fields, coarse first.
struct SvfStack
{
    std::vector<VectorField3> svfs;
    IntegrationConfig integration;

    int levels() const { return static_cast<int>(svfs.size()); }

    /// All-zero stack over the geometry.
    static SvfStack zeros(const StackGeometry& geometry, const IntegrationConfig& integration);

    /// Full-resolution grid implied by the finest field.
    StackGeometry geometry() const;

    /// L >= 1, every field finite, dyadic factors consistent, shared origin.
    void validate() const;
};

/// v <- v + u(v) with trilinear sampling. Throws numeric-error naming the first
/// non-finite vertex.
TriangleMesh apply_deformation(const TriangleMesh& mesh, const VectorField3& deformation);

/// Integrated (and smoothed) deformation for one scale.
VectorField3 scale_deformation(const VectorField3& svf, const IntegrationConfig& integration);

struct MultiscaleResult
{
    std::vector<TriangleMesh> surfaces;     ///< S^0 .. S^L
    std::vector<VectorField3> deformations; ///< smoothed phi^1 .. phi^L
};

MultiscaleResult multiscale_deform_detailed(const TriangleMesh& surface, const SvfStack& stack);

/// S^l = phi^l(S^(l-1)); returns the full trajectory S^0 .. S^L.
std::vector<TriangleMesh> multiscale_deform(const TriangleMesh& surface, const SvfStack& stack);

namespace io {

/// Manifest JSON: {"levels", "steps_K", "sigma_mm", "method", "scale_factors", "fields"}.
/// Field paths are relative to the manifest directory.
void write_stack(const std::filesystem::path& manifest, const SvfStack& stack);
SvfStack read_stack(const std::filesystem::path& manifest);

} // namespace io

} // namespace dsurf
