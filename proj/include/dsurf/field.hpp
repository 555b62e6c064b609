#pragma once

#include <dsurf/common.hpp>

#include <filesystem>

namespace dsurf {

/// Uniform axis-aligned grid: voxel (i, j, k) sits at origin + (i, j, k) * spacing.
/// Linear index is x fastest.
struct GridGeometry
{
    std::array<int, 3> dims{2, 2, 2};
    Vec3 spacing = Vec3::Ones();
    Vec3 origin = Vec3::Zero();

    std::size_t size() const
    {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
    }
    std::array<int, 3> coords(std::size_t linear) const
    {
        const auto nx = static_cast<std::size_t>(dims[0]);
        const auto ny = static_cast<std::size_t>(dims[1]);
        return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny), static_cast<int>(linear / (nx * ny))};
    }
    Vec3 world(int i, int j, int k) const { return origin + spacing.cwiseProduct(Vec3(i, j, k)); }
    Vec3 world(std::size_t linear) const
    {
        const auto c = coords(linear);
        return world(c[0], c[1], c[2]);
    }
    Vec3 extent_max() const { return world(dims[0] - 1, dims[1] - 1, dims[2] - 1); }

    /// Voxel-unit distance along axis 0 (the grid is usually isotropic).
    double mean_spacing() const { return spacing.mean(); }

    /// dims >= 2 per axis, positive finite spacing and finite origin.
    void validate() const;

    bool operator==(const GridGeometry& other) const
    {
        return dims == other.dims && spacing == other.spacing && origin == other.origin;
    }
};

/// Grid of 3-vectors. Holds either a velocity (mm per unit time) or a
/// displacement from identity (mm).
struct VectorField3
{
    GridGeometry geometry;
    std::vector<Vec3> data;

    VectorField3() = default;
    explicit VectorField3(const GridGeometry& g, const Vec3& fill = Vec3::Zero())
        : geometry(g)
        , data(g.size(), fill)
    {}

    Vec3& at(int i, int j, int k) { return data[geometry.index(i, j, k)]; }
    const Vec3& at(int i, int j, int k) const { return data[geometry.index(i, j, k)]; }

    /// Throws numeric-error on a non-finite component, structural-error on size mismatch.
    void validate() const;

    /// Largest vector norm, in mm.
    double max_norm() const;
};

/// Scalar grid used for volume-to-surface sampling and ribbon masks.
struct ScalarVolume
{
    GridGeometry geometry;
    std::vector<double> data;

    ScalarVolume() = default;
    explicit ScalarVolume(const GridGeometry& g, double fill = 0.0)
        : geometry(g)
        , data(g.size(), fill)
    {}

    double& at(int i, int j, int k) { return data[geometry.index(i, j, k)]; }
    double at(int i, int j, int k) const { return data[geometry.index(i, j, k)]; }
};

/// Eight-corner trilinear stencil for a world point. Out-of-grid points are
/// clamped to the boundary; position derivatives vanish on clamped axes.
struct TrilinearStencil
{
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    /// d weight / d world position.
    std::array<Vec3, 8> weight_gradient{};
};

TrilinearStencil trilinear_stencil(const GridGeometry& grid, const Vec3& point, bool with_gradient = false);

Vec3 sample_trilinear(const VectorField3& field, const Vec3& point);

/// Value plus the 3x3 spatial Jacobian J(c, d) = d value_c / d point_d.
Vec3 sample_trilinear(const VectorField3& field, const Vec3& point, Mat3& jacobian);

double sample_trilinear(const ScalarVolume& volume, const Vec3& point);

/// Separable Gaussian, sigma in mm (converted per axis), kernel truncated at
/// +-3 sigma and renormalized, edge replication at the border. sigma 0 is the
/// identity.
VectorField3 gaussian_smooth(const VectorField3& field, double sigma_mm);

/// Exact transpose of gaussian_smooth as a linear map on the grid values.
VectorField3 gaussian_smooth_adjoint(const VectorField3& field, double sigma_mm);

/// Normalized 1-D kernel used along an axis for sigma in voxels; index 0 is the centre.
std::vector<double> gaussian_kernel(double sigma_voxels);

namespace io {

/// Raw little-endian f32 array (voxel-major, x fastest, components interleaved)
/// at `<stem>.raw` plus JSON sidecar `<stem>.json` with
/// {dims, spacing_mm, origin_mm, components}. `sidecar` is the .json path.
void write_vector_field(const std::filesystem::path& sidecar, const VectorField3& field);
VectorField3 read_vector_field(const std::filesystem::path& sidecar);
void write_scalar_volume(const std::filesystem::path& sidecar, const ScalarVolume& volume);
ScalarVolume read_scalar_volume(const std::filesystem::path& sidecar);

} // namespace io

} // namespace dsurf
