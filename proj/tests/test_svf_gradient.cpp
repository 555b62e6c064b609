#include "fixtures.hpp"

#include <doctest.h>

using namespace dsurf;

TEST_CASE("svf gradient matches central differences away from trilinear kinks")
{
    for (std::uint64_t seed : {1u, 2u}) {
        const auto inst = fixtures::gradient_instance(seed);
        const auto r = fixtures::check_stack_gradient(inst, 1e-4, 1e-3, 1e-8);
        INFO("seed " << seed << " worst " << r.worst_excess << " failures " << r.failures);
        CHECK(r.checked == 2 * 512 * 3);
        CHECK(r.failures <= r.checked / 200);
        CHECK(r.kink_explained == r.failures);
    }
}

TEST_CASE("zero stack with targets on the template has zero chamfer gradient")
{
    const auto surface = icosphere(2).mesh();
    const PointIndex targets(surface.vertices());
    StackGeometry geom{fixtures::cube_grid(8, 1.6), 2};
    const auto stack = SvfStack::zeros(geom, {});
    const auto r = loss_gradient_wrt_svf(surface, stack, targets, LossWeights{0.0, 0.0});
    CHECK(r.loss.chamfer == 0.0);
    for (const auto& g : r.gradients) CHECK(g.max_norm() == 0.0);
}

TEST_CASE("translation discrepancy yields a descent direction toward +x")
{
    const auto surface = icosphere(2).mesh();
    std::vector<Vec3> shifted = surface.vertices();
    for (auto& p : shifted) p.x() += 1.0;
    const PointIndex targets(shifted);
    StackGeometry geom{fixtures::cube_grid(8, 2.5), 1};
    const auto stack = SvfStack::zeros(geom, {});
    const auto r = loss_gradient_wrt_svf(surface, stack, targets, LossWeights{});
    const auto& g = r.gradients[0];
    Vec3 mean = Vec3::Zero();
    int n = 0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double d = g.geometry.world(i).norm();
        if (d > 0.6 && d < 1.4) {
            mean += g.data[i];
            ++n;
        }
    }
    REQUIRE(n > 0);
    CHECK(mean.x() < 0.0);
}

TEST_CASE("squaring adjoint is the transpose of the linearized squaring step")
{
    Rng rng(5);
    const auto grid = fixtures::cube_grid(6, 1.0);
    const auto u = random_smooth_field(grid, 1.0, 0.2, rng);
    const auto du = random_smooth_field(grid, 1.0, 1.0, rng);
    const auto w = random_smooth_field(grid, 1.0, 1.0, rng);
    const double h = 1e-6;
    VectorField3 up(grid), um(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        up.data[i] = u.data[i] + h * du.data[i];
        um.data[i] = u.data[i] - h * du.data[i];
    }
    const auto fp = compose(up, up);
    const auto fm = compose(um, um);
    double lhs = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) lhs += w.data[i].dot(fp.data[i] - fm.data[i]) / (2 * h);
    const auto adj = adjoint::squaring_step(u, w);
    double rhs = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) rhs += adj.data[i].dot(du.data[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("forward Euler stacks are rejected by the reverse pass")
{
    StackGeometry geom{fixtures::cube_grid(8, 1.6), 1};
    IntegrationConfig integ;
    integ.method = IntegrationMethod::ForwardEuler;
    const auto stack = SvfStack::zeros(geom, integ);
    const auto surface = icosphere(1).mesh();
    CHECK_THROWS_AS(loss_gradient_wrt_svf(surface, stack, PointIndex(surface.vertices()), {}), Error);
}
