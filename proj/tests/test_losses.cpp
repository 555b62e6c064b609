#include "fixtures.hpp"

#include <dsurf/losses.hpp>

#include <doctest.h>

using namespace dsurf;
using fixtures::tetrahedron;

namespace {

std::vector<Vec3> random_points(std::size_t n, Rng& rng, double scale = 1.0)
{
    std::vector<Vec3> p(n);
    for (auto& x : p) x = scale * Vec3(rng.normal(), rng.normal(), rng.normal());
    return p;
}

double brute_chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& y)
{
    auto one_way = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
        double s = 0.0;
        for (const auto& p : a) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : b) best = std::min(best, squared_distance(p, q));
            s += best;
        }
        return s / (2.0 * static_cast<double>(a.size()));
    };
    return one_way(x, y) + one_way(y, x);
}

/// Central-difference check of an analytic per-vertex gradient.
void check_vertex_gradient(const TriangleMesh& mesh, const std::function<double(const TriangleMesh&)>& f,
                           const std::vector<Vec3>& grad, double h = 1e-6)
{
    auto v = mesh.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            const double x = v[i][a];
            v[i][a] = x + h;
            const double fp = f(mesh.with_vertices(v));
            v[i][a] = x - h;
            const double fm = f(mesh.with_vertices(v));
            v[i][a] = x;
            const double fd = (fp - fm) / (2.0 * h);
            CHECK(std::abs(fd - grad[i][a]) <= 1e-3 * std::abs(fd) + 1e-8);
        }
    }
}

} // namespace

TEST_CASE("chamfer distance")
{
    const std::vector<Vec3> a{{0, 0, 0}}, b{{1, 0, 0}};
    CHECK(chamfer_distance(a, b) == 1.0);
    Rng rng(1);
    const auto x = random_points(200, rng), y = random_points(200, rng);
    CHECK(chamfer_distance(x, x) == 0.0);
    CHECK(chamfer_distance(x, y) == brute_chamfer(x, y));
    CHECK(chamfer_distance(x, PointIndex(y)) == brute_chamfer(x, y));
    CHECK_THROWS_AS(chamfer_distance(std::vector<Vec3>{}, y), Error);
    CHECK_THROWS_AS(chamfer_distance(x, std::vector<Vec3>{}), Error);
}

TEST_CASE("nearest neighbour ties resolve to the lowest index")
{
    const PointIndex idx(std::vector<Vec3>{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {1, 0, 0}});
    CHECK(idx.nearest(Vec3(0, 0, 0)).index == 0);
    CHECK(idx.nearest(Vec3(1, 0, 0)).index == 0);
    Rng rng(2);
    // integer lattice points produce many exact ties
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) pts.emplace_back(std::floor(rng.uniform(0, 5)), std::floor(rng.uniform(0, 5)), 0.0);
    const PointIndex lattice(pts);
    for (int n = 0; n < 200; ++n) {
        const Vec3 q(std::floor(rng.uniform(0, 5)) + 0.5, std::floor(rng.uniform(0, 5)), 0.0);
        std::uint32_t best = 0;
        for (std::uint32_t i = 1; i < pts.size(); ++i) {
            if (squared_distance(q, pts[i]) < squared_distance(q, pts[best])) best = i;
        }
        CHECK(lattice.nearest(q).index == best);
    }
}

TEST_CASE("edge loss")
{
    CHECK(edge_loss(tetrahedron()) == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = fixtures::bumpy(2, 0.1, 3);
    CHECK(edge_loss(scaled(m, 2.0)) == doctest::Approx(4.0 * edge_loss(m)).epsilon(1e-13));
    double s = 0.0;
    const auto l = edge_lengths(m);
    for (double x : l) s += x * x;
    CHECK(edge_loss(m) == doctest::Approx(s / static_cast<double>(l.size())).epsilon(1e-14));
}

TEST_CASE("normal consistency loss")
{
    CHECK(normal_consistency_loss(tetrahedron()) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(normal_consistency_loss(icosphere(5).mesh()) < normal_consistency_loss(icosphere(3).mesh()));
    double previous = -1.0;
    for (double amp : {0.0, 0.05, 0.1, 0.2, 0.3}) {
        const double nc = normal_consistency_loss(fixtures::bumpy(3, amp, 5));
        CHECK(nc > previous);
        previous = nc;
    }
    const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    try {
        normal_consistency_loss(TriangleMesh(v, {{0, 1, 2}}));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Structural);
    }
}

TEST_CASE("rigid invariance of the losses")
{
    Rng rng(3);
    const auto m = fixtures::bumpy(3, 0.1, 6);
    const Mat3 R = fixtures::random_rotation(rng);
    const Vec3 t(1.0, -0.5, 2.0);
    const auto moved = rigid_transform(m, R, t);
    const double e0 = edge_loss(m), n0 = normal_consistency_loss(m);
    CHECK(std::abs(edge_loss(moved) - e0) <= 1e-12 * e0);
    CHECK(std::abs(normal_consistency_loss(moved) - n0) <= 1e-12 * n0);
    const auto y = random_points(150, rng);
    std::vector<Vec3> ym(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ym[i] = R * y[i] + t;
    const double c0 = chamfer_distance(m.vertices(), y);
    CHECK(std::abs(chamfer_distance(moved.vertices(), ym) - c0) <= 1e-12 * c0);
}

TEST_CASE("total loss composition")
{
    Rng rng(4);
    const auto m = fixtures::bumpy(3, 0.1, 2);
    const auto targets = random_points(300, rng, 0.6);
    const auto zero = total_loss(m, targets, LossWeights{0.0, 0.0});
    CHECK(zero.total == chamfer_distance(m.vertices(), targets));
    const auto self = total_loss(m, m.vertices(), LossWeights{});
    CHECK(self.chamfer == 0.0);
    CHECK(self.total == doctest::Approx(0.3 * edge_loss(m) + 3.0 * normal_consistency_loss(m)).epsilon(1e-14));
    const auto full = total_loss(m, targets, LossWeights{});
    const double hand = chamfer_distance(m.vertices(), targets) + 0.3 * edge_loss(m) + 3.0 * normal_consistency_loss(m);
    CHECK(full.total == doctest::Approx(hand).epsilon(1e-14));
    CHECK(full.edge == edge_loss(m));
    CHECK(full.normal_consistency == normal_consistency_loss(m));
    CHECK_THROWS_AS(LossWeights({-0.1, 1.0}).validate(), Error);
}

TEST_CASE("vertex gradients of each loss term match central differences")
{
    Rng rng(5);
    const auto m = fixtures::bumpy(1, 0.15, 8);
    const auto targets = random_points(60, rng, 0.7);
    const PointIndex idx(targets);
    SUBCASE("edge")
    {
        std::vector<Vec3> g(m.num_vertices(), Vec3::Zero());
        edge_loss_gradient(m, 1.0, g);
        check_vertex_gradient(m, [](const TriangleMesh& x) { return edge_loss(x); }, g);
    }
    SUBCASE("normal consistency")
    {
        std::vector<Vec3> g(m.num_vertices(), Vec3::Zero());
        normal_consistency_gradient(m, 1.0, g);
        check_vertex_gradient(m, [](const TriangleMesh& x) { return normal_consistency_loss(x); }, g);
    }
    SUBCASE("chamfer")
    {
        std::vector<Vec3> g(m.num_vertices(), Vec3::Zero());
        chamfer_gradient(m.vertices(), idx, 1.0, g);
        // h small enough that no nearest-neighbour match switches
        check_vertex_gradient(m, [&](const TriangleMesh& x) { return chamfer_distance(x.vertices(), idx); }, g, 1e-7);
    }
    SUBCASE("joint")
    {
        std::vector<Vec3> g;
        const auto value = total_loss_with_gradient(m, idx, LossWeights{}, g);
        CHECK(value.total == doctest::Approx(total_loss(m, idx, LossWeights{}).total).epsilon(1e-14));
        check_vertex_gradient(m, [&](const TriangleMesh& x) { return total_loss(x, idx, LossWeights{}).total; }, g, 1e-7);
    }
}
