#pragma once

#include <dsurf/mesh.hpp>

namespace dsurf {

struct TaubinParams
{
    double lambda_step = 0.33;
    double mu_step = -0.34;
    int iterations = 10; ///< each iteration is one lambda pass followed by one mu pass
};

/// Uniform-Laplacian Taubin smoothing. Requires lambda > 0 > mu and |mu| > lambda.
TriangleMesh taubin_smooth(const TriangleMesh& mesh, const TaubinParams& params = {});

/// Plain uniform Laplacian smoothing, x <- x + step * (mean(neighbours) - x).
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double step, int iterations);

/// x <- x + step * (mean(neighbour values) - x), `iterations` Jacobi passes.
/// step 1 replaces each value with the neighbour mean.
std::vector<Vec3> laplacian_smooth_vertex_vectors(const TriangleMesh& mesh, std::vector<Vec3> values,
                                                  int iterations, double step = 0.5);

} // namespace dsurf
