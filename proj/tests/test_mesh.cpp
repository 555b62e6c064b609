#include "fixtures.hpp"

#include <dsurf/features.hpp>
#include <dsurf/mesh_io.hpp>
#include <dsurf/smoothing.hpp>

#include <doctest.h>

#include <sstream>

using namespace dsurf;
using fixtures::tetrahedron;

namespace {

double mean_radius(const TriangleMesh& m)
{
    double s = 0.0;
    for (const auto& v : m.vertices()) s += v.norm();
    return s / static_cast<double>(m.num_vertices());
}

} // namespace

TEST_CASE("euler characteristic of reference solids")
{
    const auto tet = tetrahedron();
    CHECK(tet.num_edges() == 6);
    CHECK(euler_characteristic(tet) == 2);
    const auto ico = icosphere(0).mesh();
    CHECK(ico.num_vertices() == 12);
    CHECK(ico.num_edges() == 30);
    CHECK(ico.num_faces() == 20);
    CHECK(euler_characteristic(ico) == 2);
    const auto torus = fixtures::flat_torus(3);
    CHECK(torus.num_vertices() == 9);
    CHECK(torus.num_edges() == 27);
    CHECK(torus.num_faces() == 18);
    CHECK(euler_characteristic(torus) == 0);
}

TEST_CASE("invalid face indices raise structural errors")
{
    std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    try {
        TriangleMesh m(v, {{0, 1, 3}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Structural);
    }
    try {
        TriangleMesh m(v, {{0, 1, 1}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Structural);
    }
}

TEST_CASE("edge list is unique and lexicographic")
{
    const auto m = icosphere(2).mesh();
    const auto& e = m.edges();
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(e[i][0] < e[i][1]);
        if (i > 0) CHECK(e[i - 1] < e[i]);
    }
    CHECK(m.is_closed());
}

TEST_CASE("face normals and areas of a right triangle")
{
    const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const auto ccw = face_normals_areas(TriangleMesh(v, {{0, 1, 2}}));
    CHECK(ccw.normals[0].isApprox(Vec3(0, 0, 1)));
    CHECK(ccw.areas[0] == doctest::Approx(0.5));
    const auto cw = face_normals_areas(TriangleMesh(v, {{0, 2, 1}}));
    CHECK(cw.normals[0].isApprox(Vec3(0, 0, -1)));
}

TEST_CASE("zero-area face is reported by index")
{
    const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
    try {
        face_normals_areas(TriangleMesh(v, {{0, 1, 2}, {0, 1, 3}}));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateGeometry);
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
}

TEST_CASE("icosphere level 4 area approaches 4 pi")
{
    const double a = total_area(icosphere(4).mesh());
    CHECK(std::abs(a - 4.0 * std::numbers::pi) < 0.01 * 4.0 * std::numbers::pi);
}

TEST_CASE("edge lengths: tetrahedron, scaling and brute force")
{
    for (double l : edge_lengths(tetrahedron())) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = icosphere(2).mesh();
    const auto base = edge_lengths(m);
    const auto doubled = edge_lengths(scaled(m, 2.0));
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(doubled[i] == doctest::Approx(2.0 * base[i]).epsilon(1e-14));

    Rng rng(3);
    std::vector<Vec3> pts(100);
    for (auto& p : pts) p = Vec3(rng.normal(), rng.normal(), rng.normal());
    std::vector<Face> faces;
    for (std::uint32_t i = 0; i + 2 < 100; ++i) faces.push_back({i, i + 1, i + 2});
    const TriangleMesh random(pts, faces);
    const auto lengths = edge_lengths(random);
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const auto& e = random.edges()[i];
        const Vec3 d = pts[e[0]] - pts[e[1]];
        CHECK(lengths[i] == std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()));
    }
}

TEST_CASE("lengths and areas are rigid-motion invariant")
{
    Rng rng(11);
    const auto m = fixtures::bumpy(3, 0.1, 4);
    const Mat3 R = fixtures::random_rotation(rng);
    const auto moved = rigid_transform(m, R, Vec3(0.3, -2.0, 5.0));
    const auto l0 = edge_lengths(m), l1 = edge_lengths(moved);
    for (std::size_t i = 0; i < l0.size(); ++i) CHECK(std::abs(l1[i] - l0[i]) <= 1e-9 * l0[i]);
    const auto a0 = face_normals_areas(m).areas, a1 = face_normals_areas(moved).areas;
    for (std::size_t i = 0; i < a0.size(); ++i) CHECK(std::abs(a1[i] - a0[i]) <= 1e-9 * a0[i]);
    CHECK(euler_characteristic(moved) == euler_characteristic(m));
}

TEST_CASE("taubin smoothing")
{
    const auto sphere = icosphere(3).mesh();
    SUBCASE("zero iterations is the identity")
    {
        const auto out = taubin_smooth(sphere, {0.33, -0.34, 0});
        CHECK(out.vertices() == sphere.vertices());
    }
    SUBCASE("radius is preserved where plain laplacian shrinks")
    {
        const auto out = taubin_smooth(sphere, {0.33, -0.34, 10});
        CHECK(std::abs(mean_radius(out) - 1.0) < 0.01);
        CHECK(out.same_connectivity(sphere));
        CHECK(out.faces() == sphere.faces());
        CHECK(euler_characteristic(out) == 2);
        const auto plain = laplacian_smooth(sphere, 0.33, 20);
        CHECK(1.0 - mean_radius(plain) > 0.01);
    }
    SUBCASE("bumpy sphere loses total curvature magnitude")
    {
        // bumps above the lambda|mu pass band; low orders pass with gain slightly above 1
        const auto b = fixtures::bumpy(3, 0.05, 7, 12);
        auto total = [](const TriangleMesh& m) {
            const auto h = mean_curvature(m).mean_curvature;
            const auto a = vertex_areas(m);
            double s = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) s += std::abs(h[i]) * a[i];
            return s;
        };
        CHECK(total(taubin_smooth(b)) < total(b));
    }
    SUBCASE("parameters outside the shrink-compensating regime are rejected")
    {
        CHECK_THROWS_AS(taubin_smooth(sphere, {0.33, 0.1, 1}), Error);
        CHECK_THROWS_AS(taubin_smooth(sphere, {0.5, -0.4, 1}), Error);
    }
}

TEST_CASE("laplacian smoothing of vertex vectors")
{
    const auto ico = icosphere(0).mesh();
    SUBCASE("constant field is unchanged")
    {
        std::vector<Vec3> c(ico.num_vertices(), Vec3(1.5, -2.0, 0.25));
        CHECK(laplacian_smooth_vertex_vectors(ico, c, 7, 1.0) == c);
        CHECK(laplacian_smooth_vertex_vectors(ico, c, 7) == c);
    }
    SUBCASE("impulse spreads to neighbours as impulse over degree")
    {
        std::vector<Vec3> f(ico.num_vertices(), Vec3::Zero());
        f[0] = Vec3(5.0, 0.0, 0.0);
        const auto out = laplacian_smooth_vertex_vectors(ico, f, 1, 1.0);
        CHECK(out[0] == Vec3::Zero());
        const auto nb = ico.neighbors(0);
        for (std::size_t v = 0; v < ico.num_vertices(); ++v) {
            const bool adjacent = std::find(nb.begin(), nb.end(), v) != nb.end();
            CHECK(out[v].x() == doctest::Approx(adjacent ? 5.0 / nb.size() : 0.0));
        }
    }
    SUBCASE("spread contracts monotonically")
    {
        const auto m = icosphere(2).mesh();
        Rng rng(8);
        std::vector<Vec3> f(m.num_vertices());
        for (auto& v : f) v = Vec3(rng.normal(), rng.normal(), rng.normal());
        for (double step : {1.0, 0.5}) {
            auto cur = f;
            Vec3 spread = Vec3::Constant(std::numeric_limits<double>::infinity());
            for (int it = 0; it < 50; ++it) {
                cur = laplacian_smooth_vertex_vectors(m, cur, 1, step);
                for (int c = 0; c < 3; ++c) {
                    double lo = cur[0][c], hi = cur[0][c];
                    for (const auto& v : cur) {
                        lo = std::min(lo, v[c]);
                        hi = std::max(hi, v[c]);
                    }
                    CHECK(hi - lo <= spread[c]);
                    spread[c] = hi - lo;
                }
            }
        }
    }
}

TEST_CASE("mesh codecs round-trip")
{
    Rng rng(2);
    const auto m = fixtures::bumpy(2, 0.1, 9);
    SUBCASE("obj")
    {
        std::stringstream ss;
        io::write_obj(ss, m);
        const auto back = io::read_obj(ss);
        REQUIRE(back.num_vertices() == m.num_vertices());
        CHECK(back.faces() == m.faces());
        for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK((back.vertex(i) - m.vertex(i)).norm() <= 1e-6);
    }
    SUBCASE("cfm is bit exact on float-representable coordinates")
    {
        std::vector<Vec3> v = m.vertices();
        for (auto& p : v) p = fixtures::float_rounded(p);
        const auto f32 = m.with_vertices(v);
        std::stringstream ss;
        io::write_cfm(ss, f32);
        const auto back = io::read_cfm(ss);
        CHECK(back.vertices() == f32.vertices());
        CHECK(back.faces() == f32.faces());
        std::stringstream again;
        io::write_cfm(again, back);
        CHECK(again.str() == ss.str());
    }
    SUBCASE("scalar fields")
    {
        std::vector<double> vals(50);
        for (auto& x : vals) x = static_cast<float>(rng.normal());
        const VertexScalarField f(vals);
        std::stringstream csv, bin;
        io::write_scalar_csv(csv, f);
        io::write_cfs(bin, f);
        const auto a = io::read_scalar_csv(csv);
        const auto b = io::read_cfs(bin);
        CHECK(b.values == vals);
        REQUIRE(a.size() == vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) CHECK(std::abs(a[i] - vals[i]) <= 1e-6);
    }
    SUBCASE("corrupt inputs raise io errors")
    {
        std::stringstream bad("XXXX1234");
        CHECK_THROWS_AS(io::read_cfm(bad), Error);
        std::stringstream obj("v 0 0 0\nv 1 0 0\nf 1 2 3\n");
        CHECK_THROWS_AS(io::read_obj(obj), Error);
    }
}
