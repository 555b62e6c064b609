#pragma once

#include <dsurf/mesh.hpp>
#include <dsurf/nearest.hpp>

namespace dsurf {

struct LossWeights
{
    double lambda_edge = 0.3;
    double lambda_nc = 3.0;

    void validate() const;
};

struct LossBreakdown
{
    double total = 0.0;
    double chamfer = 0.0;
    double edge = 0.0;
    double normal_consistency = 0.0;
};

/// Symmetric Chamfer distance with the 1/2 factors on each direction (mm^2).
/// Throws argument-error if either set is empty.
double chamfer_distance(std::span<const Vec3> x, std::span<const Vec3> y);

/// Same quantity with a prebuilt index over y.
double chamfer_distance(std::span<const Vec3> x, const PointIndex& y_index);

/// Mean squared edge length over unique edges (mm^2).
double edge_loss(const TriangleMesh& mesh);

/// 1 - mean over edges of the dot product of the two incident face normals.
/// Throws structural-error on a boundary or non-manifold edge.
double normal_consistency_loss(const TriangleMesh& mesh);

/// Chamfer(mesh vertices, targets) + lambda_edge * edge + lambda_nc * nc.
LossBreakdown total_loss(const TriangleMesh& mesh, std::span<const Vec3> targets, const LossWeights& weights);
LossBreakdown total_loss(const TriangleMesh& mesh, const PointIndex& targets, const LossWeights& weights);

/// Analytic gradients with respect to vertex positions. Chamfer matches are
/// held fixed at the current configuration.
void chamfer_gradient(std::span<const Vec3> x, const PointIndex& y_index, double scale, std::vector<Vec3>& grad,
                      double* value = nullptr);
void edge_loss_gradient(const TriangleMesh& mesh, double scale, std::vector<Vec3>& grad, double* value = nullptr);
void normal_consistency_gradient(const TriangleMesh& mesh, double scale, std::vector<Vec3>& grad,
                                 double* value = nullptr);

/// Value and per-vertex gradient of total_loss.
LossBreakdown total_loss_with_gradient(const TriangleMesh& mesh, const PointIndex& targets, const LossWeights& weights,
                                       std::vector<Vec3>& grad);

} // namespace dsurf
