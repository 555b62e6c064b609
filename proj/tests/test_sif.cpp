#include "fixtures.hpp"

#include <dsurf/sif.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace dsurf;
using fixtures::cube_grid;

namespace {

/// Level-2 icosphere plus two disjoint triangles crossing each other inside it.
TriangleMesh grafted()
{
    const auto base = icosphere(2).mesh();
    auto v = base.vertices();
    auto f = base.faces();
    const auto add = [&](const Vec3& p) {
        v.push_back(p);
        return static_cast<std::uint32_t>(v.size() - 1);
    };
    const auto a0 = add({-0.3, -0.2, 0.0}), a1 = add({0.3, -0.2, 0.0}), a2 = add({0.0, 0.3, 0.0});
    const auto b0 = add({0.0, 0.0, -0.3}), b1 = add({0.05, 0.0, 0.3}), b2 = add({-0.05, 0.1, 0.3});
    f.push_back({a0, a1, a2});
    f.push_back({b0, b1, b2});
    return TriangleMesh(std::move(v), std::move(f));
}

} // namespace

TEST_CASE("triangle pair predicate")
{
    const Vec3 a0(0, 0, 0), a1(1, 0, 0), a2(0, 1, 0);
    CHECK(triangles_intersect(a0, a1, a2, {0.2, 0.2, -1}, {0.2, 0.2, 1}, {0.3, 0.3, 1}));
    CHECK_FALSE(triangles_intersect(a0, a1, a2, {2, 2, -1}, {2, 2, 1}, {3, 3, 1}));
    CHECK_FALSE(triangles_intersect(a0, a1, a2, {0, 0, 0.5}, {1, 0, 0.5}, {0, 1, 0.5}));
    // coplanar overlap and touching both count
    CHECK(triangles_intersect(a0, a1, a2, {0.2, 0.2, 0}, {1.2, 0.2, 0}, {0.2, 1.2, 0}));
    CHECK(triangles_intersect(a0, a1, a2, {0.5, 0.5, 0}, {1, 1, -1}, {1, 1, 1}));
}

TEST_CASE("convex icospheres have no self-intersections")
{
    for (int level : {0, 1, 2, 3, 4}) {
        const auto m = icosphere(level).mesh();
        CHECK(count_sif(m).count == 0);
        if (level <= 2) CHECK(count_sif(m, SifMode::BruteForce).count == 0);
    }
}

TEST_CASE("grafted interpenetrating pair")
{
    const auto m = grafted();
    const auto r = count_sif(m);
    const auto n = static_cast<std::uint32_t>(m.num_faces());
    CHECK(r.count == 2);
    CHECK(r.faces == std::vector<std::uint32_t>{n - 2, n - 1});
    CHECK(count_sif(m, SifMode::BruteForce) == r);
    const auto j = to_json(r);
    CHECK(j["count"] == 2);
    CHECK(j["faces"].size() == 2);
}

TEST_CASE("accelerated and brute force agree on random deformations")
{
    const auto sphere = icosphere(3).mesh();
    const auto g = cube_grid(12, 1.6);
    IntegrationConfig cfg;
    cfg.smoothing_sigma = g.mean_spacing();
    std::size_t with_sif = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(300 + seed);
        // large raw displacements without a diffeomorphic guarantee also exercise intersecting cases
        auto v = sphere.vertices();
        for (auto& p : v) p += 0.08 * Vec3(rng.normal(), rng.normal(), rng.normal());
        const auto noisy = sphere.with_vertices(v);
        const auto a = count_sif(noisy), b = count_sif(noisy, SifMode::BruteForce);
        CHECK(a == b);
        with_sif += a.count > 0;
        const auto phi = scale_deformation(random_smooth_field(g, 1.0, 2.0 * g.mean_spacing(), rng), cfg);
        const auto smooth = apply_deformation(sphere, phi);
        CHECK(count_sif(smooth) == count_sif(smooth, SifMode::BruteForce));
    }
    CHECK(with_sif > 0);
}

TEST_CASE("sif set is invariant under rigid motion and shrinking")
{
    Rng rng(8);
    auto m = grafted();
    auto v = m.vertices();
    for (std::size_t i = 0; i < 162; ++i) v[i] += 0.06 * Vec3(rng.normal(), rng.normal(), rng.normal());
    m = m.with_vertices(v);
    const auto base = count_sif(m);
    CHECK(base.count >= 2);
    const auto moved = rigid_transform(m, fixtures::random_rotation(rng), Vec3(3.0, -4.0, 1.0));
    CHECK(count_sif(moved) == base);
    const Vec3 c = centroid(m);
    for (double s : {0.9, 0.5, 0.1}) {
        auto w = m.vertices();
        for (auto& p : w) p = c + s * (p - c);
        CHECK(count_sif(m.with_vertices(w)).count == base.count);
    }
}
