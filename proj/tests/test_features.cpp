#include "fixtures.hpp"

#include <dsurf/features.hpp>

#include <doctest.h>

using namespace dsurf;
using fixtures::cube_grid;

namespace {

double mean_abs(const VertexScalarField& f)
{
    double s = 0.0;
    for (double x : f.values) s += std::abs(x);
    return s / static_cast<double>(f.size());
}

double max_abs(const VertexScalarField& f)
{
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(x));
    return m;
}

/// All-pairs nearest index with lowest-index ties.
std::uint32_t brute_nearest(const std::vector<Vec3>& pts, const Vec3& q)
{
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < pts.size(); ++i) {
        if (squared_distance(q, pts[i]) < squared_distance(q, pts[best])) best = i;
    }
    return best;
}

/// Voxel-by-voxel recomputation over the whole grid.
std::vector<double> brute_volume_sample(const ScalarVolume& vol, const TriangleMesh& mesh,
                                        const VertexScalarField& thickness, const ScalarVolume* mask)
{
    const auto& g = vol.geometry;
    std::vector<double> out(mesh.num_vertices());
    for (std::size_t vi = 0; vi < out.size(); ++vi) {
        const Vec3& p = mesh.vertex(vi);
        const double r = thickness[vi], sigma = 0.5 * r;
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        double ws = 0.0, vs = 0.0;
        for (int k = 0; k < g.dims[2]; ++k)
            for (int j = 0; j < g.dims[1]; ++j)
                for (int i = 0; i < g.dims[0]; ++i) {
                    const std::size_t idx = g.index(i, j, k);
                    if (mask && mask->data[idx] == 0.0) continue;
                    const double d2 = (g.world(i, j, k) - p).squaredNorm();
                    if (d2 > r * r) continue;
                    const double w = std::exp(-d2 * inv2s2);
                    ws += w;
                    vs += w * vol.data[idx];
                }
        out[vi] = ws > 0.0 ? vs / ws : sample_trilinear(vol, p);
    }
    return out;
}

} // namespace

TEST_CASE("inflating a sphere")
{
    const auto sphere = icosphere(4).mesh();
    const auto r = inflate(sphere);
    CHECK(max_abs(r.sulcal_depth) < 1e-6);
    CHECK(std::abs(total_area(r.inflated) - total_area(sphere)) <= 1e-9 * total_area(sphere));
    CHECK(r.inflated.same_connectivity(sphere));
    CHECK(euler_characteristic(r.inflated) == 2);
}

TEST_CASE("inflating a bumpy sphere")
{
    const auto b = fixtures::bumpy(4, 0.1, 3);
    InflationConfig cfg;
    SUBCASE("area is restored after every iteration")
    {
        auto cur = b;
        cfg.iterations = 1;
        for (int it = 0; it < 20; ++it) {
            cur = inflate(cur, cfg).inflated;
            CHECK(std::abs(total_area(cur) - total_area(b)) <= 1e-9 * total_area(b));
        }
    }
    SUBCASE("depth is negative on bumps and positive in valleys")
    {
        const auto r = inflate(b, cfg);
        CHECK(euler_characteristic(r.inflated) == 2);
        // radial offset of the input against its mean radius
        double mean_r = 0.0;
        for (const auto& v : b.vertices()) mean_r += v.norm();
        mean_r /= static_cast<double>(b.num_vertices());
        int agree = 0, total = 0;
        for (std::size_t i = 0; i < b.num_vertices(); ++i) {
            const double offset = b.vertex(i).norm() - mean_r;
            if (std::abs(offset) < 0.03) continue;
            ++total;
            if ((offset > 0.0) == (r.sulcal_depth[i] < 0.0)) ++agree;
        }
        REQUIRE(total > 100);
        CHECK(agree == total);
    }
    SUBCASE("mean depth is consistent across mesh resolutions")
    {
        const double d3 = mean_abs(inflate(fixtures::bumpy(3, 0.1, 3), cfg).sulcal_depth);
        const double d5 = mean_abs(inflate(fixtures::bumpy(5, 0.1, 3), cfg).sulcal_depth);
        CHECK(std::abs(d3 - d5) <= 0.1 * d5);
    }
    SUBCASE("depth is rigid-motion invariant")
    {
        Rng rng(4);
        cfg.iterations = 30;
        const auto a = inflate(b, cfg).sulcal_depth;
        const auto m = inflate(rigid_transform(b, fixtures::random_rotation(rng), Vec3(2.0, 1.0, -3.0)), cfg).sulcal_depth;
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - m[i]) <= 1e-9);
    }
    SUBCASE("very inflated uses the larger budget")
    {
        InflationConfig v;
        v.mode = InflationMode::VeryInflated;
        CHECK(v.resolved_iterations() == 1000);
        CHECK(InflationConfig{}.resolved_iterations() == 200);
        v.smoothing_weight = 1.5;
        CHECK_THROWS_AS(v.validate(), Error);
    }
}

TEST_CASE("cortical thickness")
{
    const auto inner = icosphere(4).mesh();
    SUBCASE("identical meshes")
    {
        CHECK(max_abs(cortical_thickness(inner, inner)) == 0.0);
    }
    SUBCASE("concentric spheres")
    {
        const auto t = cortical_thickness(inner, scaled(inner, 1.2));
        for (double x : t.values) CHECK(std::abs(x - 0.2) <= 0.01 * 0.2);
    }
    SUBCASE("translated copy against the all-pairs oracle")
    {
        const auto shifted = rigid_transform(inner, Mat3::Identity(), Vec3(0.1, 0.0, 0.0));
        const auto t = cortical_thickness(inner, shifted);
        double mean = 0.0, brute = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < inner.num_vertices(); ++i) {
            const auto p = brute_nearest(shifted.vertices(), inner.vertex(i));
            const auto w = brute_nearest(inner.vertices(), shifted.vertex(p));
            const double b = 0.5 * ((inner.vertex(i) - shifted.vertex(p)).norm() +
                                    (shifted.vertex(p) - inner.vertex(w)).norm());
            CHECK(t[i] == b);
            mean += t[i];
            brute += b;
            hi = std::max(hi, t[i]);
        }
        CHECK(mean == brute);
        CHECK(hi <= 0.1 + 1e-12);
        CHECK(hi > 0.05);
    }
    SUBCASE("rigidly co-transformed pair")
    {
        Rng rng(5);
        const auto outer = fixtures::bumpy(4, 0.05, 2);
        const Mat3 R = fixtures::random_rotation(rng);
        const Vec3 tr(0.5, -1.0, 0.25);
        const auto a = cortical_thickness(inner, scaled(outer, 1.2));
        const auto b = cortical_thickness(rigid_transform(inner, R, tr), rigid_transform(scaled(outer, 1.2), R, tr));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, a[i]));
    }
    SUBCASE("empty mesh")
    {
        CHECK_THROWS_AS(cortical_thickness(TriangleMesh(), inner), Error);
    }
}

TEST_CASE("mean curvature")
{
    const auto sphere = icosphere(4).mesh();
    for (double s : {0.5, 1.0, 2.0}) {
        const auto h = mean_curvature(scaled(sphere, s)).mean_curvature;
        for (double x : h.values) CHECK(std::abs(x - 1.0 / s) <= 0.02 / s);
    }
    SUBCASE("large radius cap is flat")
    {
        const auto h = mean_curvature(scaled(sphere, 100.0)).mean_curvature;
        for (double x : h.values) CHECK(std::abs(x) < 0.02);
    }
    SUBCASE("bumpy sphere is convex on average")
    {
        const auto h = mean_curvature(fixtures::bumpy(4, 0.05, 3)).mean_curvature;
        double mean = 0.0;
        for (double x : h.values) mean += x;
        CHECK(mean / static_cast<double>(h.size()) > 0.5);
    }
}

TEST_CASE("midthickness")
{
    const auto wm = icosphere(3).mesh();
    CHECK(midthickness(wm, wm).vertices() == wm.vertices());
    const auto mid = midthickness(wm, scaled(wm, 1.2));
    for (const auto& v : mid.vertices()) CHECK(v.norm() == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(euler_characteristic(mid) == 2);
    CHECK_THROWS_AS(midthickness(wm, icosphere(2).mesh()), Error);
}

TEST_CASE("volume to surface sampling")
{
    const auto g = cube_grid(33, 2.0); // spacing 0.125
    const auto mesh = icosphere(2).mesh();
    const VertexScalarField thickness(std::vector<double>(mesh.num_vertices(), 0.5));
    SUBCASE("constant volume")
    {
        ScalarVolume c(g);
        for (auto& x : c.data) x = 2.5f;
        const auto mask = shell_mask(g, Vec3::Zero(), 0.0, 5.0);
        for (double x : volume_to_surface(c, mesh, thickness, &mask).values) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));
    }
    SUBCASE("linear ramp on a symmetric stencil")
    {
        // vertices on voxel centres see a point-symmetric neighbourhood
        const auto ramp = ramp_volume(g, Vec3(1.0, 0.0, 0.0));
        std::vector<Vec3> pts{g.world(16, 16, 16), g.world(10, 20, 14), g.world(22, 12, 18)};
        const TriangleMesh tri(pts, {{0, 1, 2}});
        const VertexScalarField t(std::vector<double>(3, 0.5));
        const auto out = volume_to_surface(ramp, tri, t);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(out[i] - pts[i].x()) <= 1e-3);
    }
    SUBCASE("half-space mask biases toward the kept side and matches recomputation")
    {
        const auto ramp = ramp_volume(g, Vec3(1.0, 0.0, 0.0));
        ScalarVolume mask(g);
        for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = g.world(i).x() >= mesh.vertex(0).x() ? 1.0f : 0.0f;
        const auto out = volume_to_surface(ramp, mesh, thickness, &mask);
        CHECK(out.values == brute_volume_sample(ramp, mesh, thickness, &mask));
        CHECK(out[0] > mesh.vertex(0).x());
    }
    SUBCASE("empty neighbourhood falls back to trilinear")
    {
        const auto ramp = ramp_volume(g, Vec3(0.0, 2.0, 0.0), 1.0);
        ScalarVolume mask(g);
        const auto out = volume_to_surface(ramp, mesh, thickness, &mask);
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i) CHECK(out[i] == sample_trilinear(ramp, mesh.vertex(i)));
    }
}
