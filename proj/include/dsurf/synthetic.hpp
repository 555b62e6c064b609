#pragma once

#include <dsurf/multiscale.hpp>

#include <optional>
#include <random>

namespace dsurf {

/// Seeded generator with a fixed double mapping, so sequences do not depend on
/// the standard library's distribution implementations.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
        : m_engine(seed)
    {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    std::uint64_t next() { return m_engine(); }

private:
    std::mt19937_64 m_engine;
    std::optional<double> m_spare;
};

enum class SyntheticKind { Sphere, Ellipsoid, BumpySphere };

struct SyntheticParams
{
    SyntheticKind kind = SyntheticKind::Sphere;
    int level = 3;
    double radius = 1.0;
    Vec3 axes{1.0, 1.0, 1.0};  ///< ellipsoid semi-axes
    double amplitude = 0.1;    ///< bumpy radial offset, fraction of radius
    int lobes = 3;
    /// When > 0, also emit the surface scaled by this factor (inner companion).
    double inner_scale = 0.0;
};

struct SyntheticSurface
{
    TriangleMesh surface;
    std::optional<TriangleMesh> inner;
};

/// Radial perturbation in [-1, 1] for the bumpy sphere at unit direction p.
struct BumpField
{
    int lobes = 3;
    std::array<double, 3> coeff{};
    std::array<double, 2> phase{};

    static BumpField random(int lobes, std::uint64_t seed);
    double operator()(const Vec3& unit) const;
};

/// sphere | ellipsoid | bumpy_sphere on an icosphere of the given level.
/// Throws argument-error for non-positive axes or amplitude >= 1.
SyntheticSurface gen_synthetic(const SyntheticParams& params, std::uint64_t seed);

SyntheticKind parse_synthetic_kind(const std::string& name);

/// value(x) = offset + gradient . x at every voxel centre.
ScalarVolume ramp_volume(const GridGeometry& grid, const Vec3& gradient, double offset = 0.0);

/// 1 where r_inner <= |x - centre| <= r_outer, else 0.
ScalarVolume shell_mask(const GridGeometry& grid, const Vec3& centre, double r_inner, double r_outer);

/// Gaussian-filtered white noise rescaled so max |v| = max_norm_mm.
VectorField3 random_smooth_field(const GridGeometry& grid, double sigma_voxels, double max_norm_mm, Rng& rng);

/// Random stack: scale l gets max |v| = max_voxels * spacing_l * decay^(l-1),
/// smoothness sigma_voxels on its own grid.
SvfStack random_svf_stack(const StackGeometry& geometry, const IntegrationConfig& integration, double max_voxels,
                          double sigma_voxels, double decay, Rng& rng);

} // namespace dsurf
