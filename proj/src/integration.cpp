#include <dsurf/integration.hpp>
#include <dsurf/parallel.hpp>

#include <limits>
#include <string>

namespace dsurf {

void IntegrationConfig::validate() const
{
    if (steps_K < 1 || steps_K > 16) fail(ErrorKind::Argument, "steps_K must be in [1, 16]");
    if (!(smoothing_sigma >= 0.0)) fail(ErrorKind::Argument, "smoothing_sigma must be >= 0");
}

namespace {

void require_finite(const VectorField3& f, const std::string& stage)
{
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        if (!is_finite(f.data[i])) fail(ErrorKind::Numeric, stage + ": non-finite displacement at voxel " + std::to_string(i));
    }
}

} // namespace

VectorField3 compose(const VectorField3& outer, const VectorField3& inner)
{
    if (!(outer.geometry == inner.geometry)) fail(ErrorKind::Shape, "compose: grid geometries differ");
    VectorField3 out(inner.geometry);
    const auto& g = inner.geometry;
    parallel_for(g.size(), [&](std::size_t i) {
        const Vec3& u = inner.data[i];
        out.data[i] = u + sample_trilinear(outer, g.world(i) + u);
    });
    return out;
}

std::vector<VectorField3> scaling_squaring_trajectory(const VectorField3& svf, int steps_K)
{
    if (steps_K < 1 || steps_K > 16) fail(ErrorKind::Argument, "steps_K must be in [1, 16]");
    svf.validate();
    std::vector<VectorField3> traj;
    traj.reserve(static_cast<std::size_t>(steps_K) + 1);
    VectorField3 u(svf.geometry);
    const double scale = std::ldexp(1.0, -steps_K);
    for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] = scale * svf.data[i];
    traj.push_back(std::move(u));
    for (int k = 0; k < steps_K; ++k) {
        traj.push_back(compose(traj.back(), traj.back()));
        require_finite(traj.back(), "scaling-squaring step " + std::to_string(k + 1));
    }
    return traj;
}

VectorField3 integrate_scaling_squaring(const VectorField3& svf, const IntegrationConfig& config)
{
    config.validate();
    return std::move(scaling_squaring_trajectory(svf, config.steps_K).back());
}

VectorField3 integrate_forward_euler(const VectorField3& svf, int steps)
{
    if (steps < 1) fail(ErrorKind::Argument, "forward Euler needs at least one step");
    svf.validate();
    const auto& g = svf.geometry;
    const double dt = 1.0 / steps;
    VectorField3 u(g);
    parallel_for(g.size(), [&](std::size_t i) {
        const Vec3 x0 = g.world(i);
        Vec3 x = x0;
        for (int s = 0; s < steps; ++s) x += dt * sample_trilinear(svf, x);
        u.data[i] = x - x0;
    });
    require_finite(u, "forward Euler");
    return u;
}

VectorField3 integrate(const VectorField3& svf, const IntegrationConfig& config)
{
    config.validate();
    if (config.method == IntegrationMethod::ForwardEuler) return integrate_forward_euler(svf, 1 << config.steps_K);
    return integrate_scaling_squaring(svf, config);
}

double jacobian_min_determinant(const VectorField3& deformation)
{
    const auto& g = deformation.geometry;
    // interior voxels only; an axis too short for a central difference uses a forward one
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = g.dims[a] >= 3 ? 1 : 0;
        hi[a] = g.dims[a] >= 3 ? g.dims[a] - 2 : 0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                Mat3 jac = Mat3::Identity();
                const std::array<int, 3> c{i, j, k};
                for (int a = 0; a < 3; ++a) {
                    std::array<int, 3> p = c, m = c;
                    double h;
                    if (g.dims[a] >= 3) {
                        ++p[a];
                        --m[a];
                        h = 2.0 * g.spacing[a];
                    } else {
                        p[a] = 1;
                        m[a] = 0;
                        h = g.spacing[a];
                    }
                    jac.col(a) += (deformation.at(p[0], p[1], p[2]) - deformation.at(m[0], m[1], m[2])) / h;
                }
                best = std::min(best, jac.determinant());
            }
    return best;
}

double interior_sup_distance(const VectorField3& a, const VectorField3& b, int margin)
{
    if (!(a.geometry == b.geometry)) fail(ErrorKind::Shape, "interior_sup_distance: grid geometries differ");
    const auto& g = a.geometry;
    double best = 0.0;
    for (int k = margin; k < g.dims[2] - margin; ++k)
        for (int j = margin; j < g.dims[1] - margin; ++j)
            for (int i = margin; i < g.dims[0] - margin; ++i) best = std::max(best, (a.at(i, j, k) - b.at(i, j, k)).norm());
    return best;
}

} // namespace dsurf
