#pragma once

#include <dsurf/losses.hpp>
#include <dsurf/multiscale.hpp>

namespace dsurf {

struct StackLoss
{
    LossBreakdown loss;
    TriangleMesh final_surface;
    /// d total / d svf value, one field per scale (mm^-1 units of the loss per mm of velocity).
    std::vector<VectorField3> gradients;
    /// min det of every integrated field, coarse first.
    std::vector<double> min_jacobians;
};

/// Forward pass only: deform the template with the stack and evaluate the loss.
StackLoss evaluate_stack_loss(const TriangleMesh& surface, const SvfStack& stack, const PointIndex& targets,
                              const LossWeights& weights, bool with_jacobians = false);

/// Loss and its exact reverse-mode gradient through vertex sampling, Gaussian
/// smoothing and the scaling-and-squaring composition chain. Forward-Euler
/// stacks are rejected (argument-error).
StackLoss loss_gradient_wrt_svf(const TriangleMesh& surface, const SvfStack& stack, const PointIndex& targets,
                                const LossWeights& weights);

/// Transposes of the sampling/composition steps, exposed for testing.
namespace adjoint {

/// Gradient flowing into `field` values from per-point output gradients of
/// y_i = sample(field, p_i), accumulated into field_grad.
void scatter_sample(const VectorField3& field, std::span<const Vec3> points, std::span<const Vec3> out_grad,
                    VectorField3& field_grad);

/// Reverse of u_next = compose(u, u): turns d/du_next into d/du.
VectorField3 squaring_step(const VectorField3& u, const VectorField3& grad_next);

} // namespace adjoint

} // namespace dsurf
