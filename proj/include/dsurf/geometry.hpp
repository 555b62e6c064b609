#pragma once

#include <dsurf/mesh.hpp>

namespace dsurf {

/// V - E + F.
long euler_characteristic(const TriangleMesh& mesh);

struct FaceGeometry
{
    std::vector<Vec3> normals; ///< unit length
    std::vector<double> areas; ///< mm^2
};

/// Throws degenerate-geometry naming the first zero-area face.
FaceGeometry face_normals_areas(const TriangleMesh& mesh);

/// Unnormalized (b - a) x (c - a) per face; twice the area, no degeneracy check.
std::vector<Vec3> face_area_vectors(const TriangleMesh& mesh);

double total_area(const TriangleMesh& mesh);

/// One length per entry of mesh.edges().
std::vector<double> edge_lengths(const TriangleMesh& mesh);

/// Area-weighted average of incident face normals, normalized.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// Barycentric (one third of incident face area) vertex areas.
std::vector<double> vertex_areas(const TriangleMesh& mesh);

Vec3 centroid(const TriangleMesh& mesh);

struct BoundingBox
{
    Vec3 min;
    Vec3 max;
    double diagonal() const { return (max - min).norm(); }
};

BoundingBox bounding_box(std::span<const Vec3> points);

/// x -> R x + t applied to every vertex.
TriangleMesh rigid_transform(const TriangleMesh& mesh, const Mat3& rotation, const Vec3& translation);

/// Uniform scale about the origin.
TriangleMesh scaled(const TriangleMesh& mesh, double factor);

} // namespace dsurf
