#pragma once

#include <dsurf/field.hpp>

namespace dsurf {

enum class IntegrationMethod { ScalingSquaring, ForwardEuler };

struct IntegrationConfig
{
    int steps_K = 7;
    IntegrationMethod method = IntegrationMethod::ScalingSquaring;
    double smoothing_sigma = 1.0; ///< mm; applied to the integrated field, 0 disables.

    /// 1 <= K <= 16, sigma >= 0.
    void validate() const;
};

/// result(x) = inner(x) + outer(x + inner(x)), both displacement fields on the
/// same grid. Throws shape-error on a grid mismatch.
VectorField3 compose(const VectorField3& outer, const VectorField3& inner);

/// Flow of a stationary velocity field to T = 1 by K squarings of
/// u0 = v / 2^K. Returns a displacement field.
VectorField3 integrate_scaling_squaring(const VectorField3& svf, const IntegrationConfig& config);

/// The K + 1 intermediate displacement fields u0 .. uK (needed for reverse mode).
std::vector<VectorField3> scaling_squaring_trajectory(const VectorField3& svf, int steps_K);

/// x <- x + v(x) / steps, `steps` times, tracked as displacement per voxel.
VectorField3 integrate_forward_euler(const VectorField3& svf, int steps);

/// Dispatches on config.method (Euler uses 2^K steps). No smoothing.
VectorField3 integrate(const VectorField3& svf, const IntegrationConfig& config);

/// Minimum over interior voxels of det(I + du/dx), central differences.
double jacobian_min_determinant(const VectorField3& deformation);

/// Max norm of (a - b) over voxels at least `margin` voxels from every face, in mm.
double interior_sup_distance(const VectorField3& a, const VectorField3& b, int margin);

} // namespace dsurf
