#pragma once

#include <dsurf/geometry.hpp>
#include <dsurf/sphere.hpp>
#include <dsurf/svf_gradient.hpp>
#include <dsurf/synthetic.hpp>

#include <functional>
#include <numbers>

namespace fixtures {

using namespace dsurf;

/// Cubic grid of n^3 voxels spanning [-half, half]^3.
inline GridGeometry cube_grid(int n, double half)
{
    GridGeometry g;
    g.dims = {n, n, n};
    g.spacing = Vec3::Constant(2.0 * half / (n - 1));
    g.origin = Vec3::Constant(-half);
    return g;
}

/// Regular tetrahedron with unit edges, outward winding.
inline TriangleMesh tetrahedron()
{
    const double a = 1.0 / std::sqrt(8.0);
    std::vector<Vec3> v{{a, a, a}, {a, -a, -a}, {-a, a, -a}, {-a, -a, a}};
    return TriangleMesh(std::move(v), {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

/// n x n vertex grid with opposite sides identified (genus 1), embedded as a torus.
inline TriangleMesh flat_torus(int n = 3)
{
    std::vector<Vec3> v;
    std::vector<Face> f;
    auto id = [n](int i, int j) { return static_cast<std::uint32_t>(((i + n) % n) * n + (j + n) % n); };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double u = 2.0 * std::numbers::pi * i / n, w = 2.0 * std::numbers::pi * j / n;
            v.emplace_back((2.0 + std::cos(w)) * std::cos(u), (2.0 + std::cos(w)) * std::sin(u), std::sin(w));
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriangleMesh(std::move(v), std::move(f));
}

/// Nearest single-precision point, rounded per component.
inline Vec3 float_rounded(const Vec3& p)
{
    return Vec3(static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()));
}

/// Uniformly random rotation from a normalized Gaussian quaternion.
inline Mat3 random_rotation(Rng& rng)
{
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return q.toRotationMatrix();
}

inline TriangleMesh bumpy(int level, double amplitude, std::uint64_t seed, int lobes = 3)
{
    SyntheticParams p;
    p.kind = SyntheticKind::BumpySphere;
    p.level = level;
    p.amplitude = amplitude;
    p.lobes = lobes;
    return gen_synthetic(p, seed).surface;
}

struct GradientInstance
{
    TriangleMesh surface;
    PointIndex targets;
    SvfStack stack;
    LossWeights weights;
};

/// 8^3 grid, 162-vertex icosphere, 100 noisy targets, two-scale random stack.
inline GradientInstance gradient_instance(std::uint64_t seed)
{
    Rng rng(seed);
    GradientInstance inst;
    inst.surface = icosphere(2, 1.0).mesh();
    std::vector<Vec3> targets;
    for (int i = 0; i < 100; ++i) {
        Vec3 d(rng.normal(), rng.normal(), rng.normal());
        d.normalize();
        targets.push_back(d * rng.uniform(0.8, 1.2));
    }
    inst.targets = PointIndex(std::move(targets));
    StackGeometry geom{cube_grid(8, 1.6), 2};
    IntegrationConfig integ;
    integ.steps_K = 7;
    integ.smoothing_sigma = geom.full.mean_spacing();
    inst.stack = random_svf_stack(geom, integ, 0.3, 1.0, 0.7, rng);
    return inst;
}

struct GradientCheck
{
    std::size_t checked = 0;
    std::size_t failures = 0;
    double worst_excess = 0.0; ///< max |a - fd| / tolerance
    /// Failures whose one-sided differences disagree (a trilinear cell or
    /// nearest-neighbour switch lies within h) and whose refined central
    /// difference at h / 10, h / 100 or h / 1000 matches the analytic value.
    std::size_t kink_explained = 0;
};

/// Compares every SVF component with a central difference of step h_voxels.
/// Stages other than the perturbed one reuse their cached deformations.
inline GradientCheck check_stack_gradient(const GradientInstance& inst, double h_voxels, double rtol, double atol)
{
    const auto analytic = loss_gradient_wrt_svf(inst.surface, inst.stack, inst.targets, inst.weights);
    const auto base = multiscale_deform_detailed(inst.surface, inst.stack);
    GradientCheck r;
    SvfStack probe = inst.stack;
    const std::size_t L = probe.svfs.size();
    for (std::size_t l = 0; l < L; ++l) {
        auto& field = probe.svfs[l];
        const double h = h_voxels * field.geometry.mean_spacing();
        auto loss_at = [&]() {
            TriangleMesh m = apply_deformation(base.surfaces[l], scale_deformation(field, probe.integration));
            for (std::size_t k = l + 1; k < L; ++k) m = apply_deformation(m, base.deformations[k]);
            return total_loss(m, inst.targets, inst.weights).total;
        };
        for (std::size_t i = 0; i < field.data.size(); ++i) {
            for (int c = 0; c < 3; ++c) {
                const double saved = field.data[i][c];
                field.data[i][c] = saved + h;
                const double fp = loss_at();
                field.data[i][c] = saved - h;
                const double fm = loss_at();
                field.data[i][c] = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double a = analytic.gradients[l].data[i][c];
                const double tol = std::max(rtol * std::abs(fd), atol);
                const double excess = std::abs(a - fd) / tol;
                r.worst_excess = std::max(r.worst_excess, excess);
                if (excess > 1.0) {
                    ++r.failures;
                    field.data[i][c] = saved;
                    const double f0 = loss_at();
                    const double forward = (fp - f0) / h, backward = (f0 - fm) / h;
                    const bool one_sided_split = std::abs(forward - backward) > std::max(rtol * std::abs(fd), atol);
                    bool refined_ok = false;
                    for (double shrink : {10.0, 100.0, 1000.0}) {
                        const double h2 = h / shrink;
                        field.data[i][c] = saved + h2;
                        const double gp = loss_at();
                        field.data[i][c] = saved - h2;
                        const double gm = loss_at();
                        field.data[i][c] = saved;
                        const double fine = (gp - gm) / (2.0 * h2);
                        refined_ok = refined_ok || std::abs(a - fine) <= std::max(rtol * std::abs(fine), atol);
                    }
                    if (one_sided_split && refined_ok) ++r.kink_explained;
                }
                ++r.checked;
            }
        }
    }
    return r;
}

} // namespace fixtures
