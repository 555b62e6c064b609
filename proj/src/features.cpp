#include <dsurf/features.hpp>
#include <dsurf/geometry.hpp>
#include <dsurf/nearest.hpp>
#include <dsurf/parallel.hpp>

#include <Eigen/Cholesky>

#include <numbers>

namespace dsurf {

int InflationConfig::resolved_iterations() const
{
    if (iterations > 0) return iterations;
    return mode == InflationMode::VeryInflated ? 1000 : 200;
}

void InflationConfig::validate() const
{
    if (iterations < 0) fail(ErrorKind::Argument, "inflation iterations must be >= 1 (0 selects the mode default)");
    if (!(smoothing_weight > 0.0 && smoothing_weight <= 1.0)) {
        fail(ErrorKind::Argument, "inflation smoothing weight must lie in (0, 1]");
    }
    if (!(diffusion_scale > 0.0)) fail(ErrorKind::Argument, "inflation diffusion scale must be > 0");
}

namespace {

/// Vector from v toward the centre of the least-squares sphere through v and
/// its neighbours, with length 1 / radius. Zero when the fit is ill-posed.
Vec3 curvature_vector(const TriangleMesh& mesh, std::size_t v, bool& fallback)
{
    Mat3 M = Mat3::Zero();
    Vec3 r = Vec3::Zero();
    const Vec3& p = mesh.vertex(v);
    double scale2 = 0.0;
    for (const auto j : mesh.neighbors(v)) {
        const Vec3 d = mesh.vertex(j) - p;
        const double l2 = d.squaredNorm();
        M += d * d.transpose();
        r += d * (0.5 * l2);
        scale2 = std::max(scale2, l2);
    }
    fallback = false;
    const Eigen::LDLT<Mat3> ldlt(M);
    if (ldlt.info() == Eigen::Success) {
        const Vec3 c = ldlt.solve(r);
        const double c2 = c.squaredNorm();
        // radius beyond 1e6 neighbourhood sizes is treated as flat
        if (is_finite(c) && c2 > 0.0 && c2 < 1e12 * scale2) return c / c2;
        if (is_finite(c) && c2 >= 1e12 * scale2) return Vec3::Zero();
    }
    fallback = true;
    return Vec3::Zero();
}

} // namespace

InflationResult inflate(const TriangleMesh& mesh, const InflationConfig& config)
{
    config.validate();
    if (!mesh.is_closed()) fail(ErrorKind::Argument, "inflate: mesh must be closed");
    const double a0 = total_area(mesh);
    if (!(a0 > 0.0)) fail(ErrorKind::Numeric, "inflate: input mesh has zero area");

    const double tau = config.smoothing_weight * config.diffusion_scale * a0 / (4.0 * std::numbers::pi);
    double lmin = std::numeric_limits<double>::infinity();
    for (double l : edge_lengths(mesh)) lmin = std::min(lmin, l);
    // explicit curvature flow is stable below ~ l^2 / 4 per step
    const int substeps = std::max(1, static_cast<int>(std::ceil(tau / (0.25 * lmin * lmin))));
    const double step = tau / substeps;

    InflationResult result;
    result.substeps_per_iteration = substeps;
    std::vector<double> depth(mesh.num_vertices(), 0.0);
    TriangleMesh current = mesh;
    std::vector<char> fallback(mesh.num_vertices());
    const int total = config.resolved_iterations() * substeps;
    for (int it = 0; it < total; ++it) {
        const auto normals = vertex_normals(current);
        std::vector<Vec3> moved(current.num_vertices());
        parallel_for(moved.size(), [&](std::size_t i) {
            bool fb = false;
            moved[i] = current.vertex(i) + step * curvature_vector(current, i, fb);
            fallback[i] = fb;
        });
        for (char c : fallback) result.curvature_fallbacks += static_cast<std::size_t>(c);
        TriangleMesh trial = current.with_vertices(moved);
        const double a = total_area(trial);
        if (!(a > 0.0) || !std::isfinite(a)) {
            fail(ErrorKind::Numeric, "inflate: surface area collapsed at step " + std::to_string(it + 1));
        }
        const Vec3 c = centroid(trial);
        const double s = std::sqrt(a0 / a);
        for (std::size_t i = 0; i < moved.size(); ++i) {
            moved[i] = c + (moved[i] - c) * s;
            depth[i] += (moved[i] - current.vertex(i)).dot(normals[i]);
        }
        current = current.with_vertices(std::move(moved));
    }
    result.inflated = std::move(current);
    result.sulcal_depth = VertexScalarField(std::move(depth));
    return result;
}

VertexScalarField cortical_thickness(const TriangleMesh& wm, const TriangleMesh& pial)
{
    if (wm.num_vertices() == 0 || pial.num_vertices() == 0) fail(ErrorKind::Argument, "cortical_thickness: empty mesh");
    const PointIndex pial_index(pial.vertices());
    const PointIndex wm_index(wm.vertices());
    std::vector<double> t(wm.num_vertices());
    parallel_for(t.size(), [&](std::size_t i) {
        const auto to_pial = pial_index.nearest(wm.vertex(i));
        const auto back = wm_index.nearest(pial.vertex(to_pial.index));
        t[i] = 0.5 * (std::sqrt(to_pial.distance2) + std::sqrt(back.distance2));
    });
    return VertexScalarField(std::move(t));
}

CurvatureResult mean_curvature(const TriangleMesh& mesh)
{
    const auto& v = mesh.vertices();
    const std::size_t n = v.size();
    std::vector<Vec3> lap(n, Vec3::Zero());
    std::vector<double> area(n, 0.0);
    CurvatureResult out;
    out.barycentric_fallback.assign(n, 0);
    for (const Face& f : mesh.faces()) {
        const Vec3 e[3] = {v[f[2]] - v[f[1]], v[f[0]] - v[f[2]], v[f[1]] - v[f[0]]}; // opposite each corner
        const double twice_area = e[2].cross(-e[1]).norm();
        if (!(twice_area > 0.0)) fail(ErrorKind::DegenerateGeometry, "mean_curvature: zero-area face");
        double cot[3];
        bool obtuse = false;
        for (int k = 0; k < 3; ++k) {
            // angle at corner k between the two edges leaving it
            const Vec3 u = -e[(k + 2) % 3];
            const Vec3 w = e[(k + 1) % 3];
            const double dot = u.dot(w);
            cot[k] = dot / twice_area;
            if (dot < 0.0) obtuse = true;
        }
        for (int k = 0; k < 3; ++k) {
            const auto b = f[(k + 1) % 3], c = f[(k + 2) % 3];
            lap[b] += cot[k] * (v[c] - v[b]);
            lap[c] += cot[k] * (v[b] - v[c]);
        }
        if (obtuse) {
            for (int k = 0; k < 3; ++k) {
                area[f[k]] += twice_area / 6.0;
                out.barycentric_fallback[f[k]] = 1;
            }
        } else {
            for (int k = 0; k < 3; ++k) {
                // Voronoi region: (|e_next|^2 cot(prev) + |e_prev|^2 cot(next)) / 8
                const int kn = (k + 1) % 3, kp = (k + 2) % 3;
                area[f[k]] += (e[kp].squaredNorm() * cot[kp] + e[kn].squaredNorm() * cot[kn]) / 8.0;
            }
        }
    }
    const auto normals = vertex_normals(mesh);
    std::vector<double> h(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(area[i] > 0.0)) continue;
        const Vec3 delta = lap[i] / (2.0 * area[i]);
        const double mag = 0.5 * delta.norm();
        h[i] = delta.dot(normals[i]) < 0.0 ? mag : -mag;
    }
    out.mean_curvature = VertexScalarField(std::move(h));
    return out;
}

TriangleMesh midthickness(const TriangleMesh& wm, const TriangleMesh& pial)
{
    if (!wm.same_connectivity(pial)) fail(ErrorKind::Argument, "midthickness: wm and pial connectivity differ");
    std::vector<Vec3> mid(wm.num_vertices());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (wm.vertex(i) + pial.vertex(i));
    return wm.with_vertices(std::move(mid));
}

VertexScalarField volume_to_surface(const ScalarVolume& volume, const TriangleMesh& mesh,
                                    const VertexScalarField& thickness, const ScalarVolume* mask)
{
    volume.geometry.validate();
    if (thickness.size() != mesh.num_vertices()) fail(ErrorKind::Argument, "volume_to_surface: one thickness per vertex");
    if (mask && !(mask->geometry == volume.geometry)) fail(ErrorKind::Shape, "ribbon mask grid differs from volume grid");
    const auto& g = volume.geometry;
    std::vector<double> out(mesh.num_vertices());
    parallel_for(out.size(), [&](std::size_t vi) {
        const Vec3& p = mesh.vertex(vi);
        const double radius = thickness[vi];
        double wsum = 0.0, vsum = 0.0;
        if (radius > 0.0) {
            const double sigma = 0.5 * radius;
            const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
            int lo[3], hi[3];
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::max(0, static_cast<int>(std::ceil((p[a] - radius - g.origin[a]) / g.spacing[a])));
                hi[a] = std::min(g.dims[a] - 1, static_cast<int>(std::floor((p[a] + radius - g.origin[a]) / g.spacing[a])));
            }
            for (int k = lo[2]; k <= hi[2]; ++k)
                for (int j = lo[1]; j <= hi[1]; ++j)
                    for (int i = lo[0]; i <= hi[0]; ++i) {
                        const std::size_t idx = g.index(i, j, k);
                        if (mask && mask->data[idx] == 0.0) continue;
                        const double d2 = (g.world(i, j, k) - p).squaredNorm();
                        if (d2 > radius * radius) continue;
                        const double w = std::exp(-d2 * inv2s2);
                        wsum += w;
                        vsum += w * volume.data[idx];
                    }
        }
        out[vi] = wsum > 0.0 ? vsum / wsum : sample_trilinear(volume, p);
    });
    return VertexScalarField(std::move(out));
}

} // namespace dsurf
