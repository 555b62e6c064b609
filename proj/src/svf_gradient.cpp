#include <dsurf/parallel.hpp>
#include <dsurf/svf_gradient.hpp>

namespace dsurf {

namespace adjoint {

void scatter_sample(const VectorField3& field, std::span<const Vec3> points, std::span<const Vec3> out_grad,
                    VectorField3& field_grad)
{
    const auto& g = field.geometry;
    std::vector<TrilinearStencil> stencils(points.size());
    parallel_for(points.size(), [&](std::size_t i) { stencils[i] = trilinear_stencil(g, points[i]); });
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int c = 0; c < 8; ++c) field_grad.data[stencils[i].index[c]] += stencils[i].weight[c] * out_grad[i];
    }
}

VectorField3 squaring_step(const VectorField3& u, const VectorField3& grad_next)
{
    // u_next(x) = u(x) + u(x + u(x))
    const auto& g = u.geometry;
    std::vector<Vec3> positions(g.size());
    VectorField3 grad(g);
    parallel_for(g.size(), [&](std::size_t i) {
        positions[i] = g.world(i) + u.data[i];
        Mat3 jac;
        sample_trilinear(u, positions[i], jac);
        grad.data[i] = grad_next.data[i] + jac.transpose() * grad_next.data[i];
    });
    scatter_sample(u, positions, grad_next.data, grad);
    return grad;
}

} // namespace adjoint

StackLoss evaluate_stack_loss(const TriangleMesh& surface, const SvfStack& stack, const PointIndex& targets,
                              const LossWeights& weights, bool with_jacobians)
{
    auto r = multiscale_deform_detailed(surface, stack);
    StackLoss out{total_loss(r.surfaces.back(), targets, weights), r.surfaces.back(), {}, {}};
    if (with_jacobians) {
        for (const auto& phi : r.deformations) out.min_jacobians.push_back(jacobian_min_determinant(phi));
    }
    return out;
}

StackLoss loss_gradient_wrt_svf(const TriangleMesh& surface, const SvfStack& stack, const PointIndex& targets,
                                const LossWeights& weights)
{
    stack.validate();
    const auto& integ = stack.integration;
    integ.validate();
    if (integ.method != IntegrationMethod::ScalingSquaring) {
        fail(ErrorKind::Argument, "reverse-mode gradient requires scaling-and-squaring integration");
    }

    const std::size_t L = stack.svfs.size();
    std::vector<std::vector<VectorField3>> trajectories(L);
    std::vector<VectorField3> deformations(L);
    std::vector<TriangleMesh> surfaces{surface};
    for (std::size_t l = 0; l < L; ++l) {
        trajectories[l] = scaling_squaring_trajectory(stack.svfs[l], integ.steps_K);
        deformations[l] = gaussian_smooth(trajectories[l].back(), integ.smoothing_sigma);
        surfaces.push_back(apply_deformation(surfaces.back(), deformations[l]));
    }

    StackLoss out;
    out.final_surface = surfaces.back();
    std::vector<Vec3> g_vertices;
    out.loss = total_loss_with_gradient(out.final_surface, targets, weights, g_vertices);
    for (const auto& phi : deformations) out.min_jacobians.push_back(jacobian_min_determinant(phi));

    out.gradients.resize(L);
    const double inv_scale = std::ldexp(1.0, -integ.steps_K);
    for (std::size_t l = L; l-- > 0;) {
        const auto& phi = deformations[l];
        const auto& points = surfaces[l].vertices();

        // y = p + phi(p)
        VectorField3 g_phi(phi.geometry);
        adjoint::scatter_sample(phi, points, g_vertices, g_phi);
        std::vector<Vec3> g_prev(points.size());
        parallel_for(points.size(), [&](std::size_t i) {
            Mat3 jac;
            sample_trilinear(phi, points[i], jac);
            g_prev[i] = g_vertices[i] + jac.transpose() * g_vertices[i];
        });
        g_vertices = std::move(g_prev);

        VectorField3 g_u = gaussian_smooth_adjoint(g_phi, integ.smoothing_sigma);
        const auto& traj = trajectories[l];
        for (int k = integ.steps_K - 1; k >= 0; --k) g_u = adjoint::squaring_step(traj[static_cast<std::size_t>(k)], g_u);
        for (auto& v : g_u.data) v *= inv_scale;
        out.gradients[l] = std::move(g_u);
    }
    return out;
}

} // namespace dsurf
