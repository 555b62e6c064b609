#pragma once

#include <dsurf/mesh.hpp>

#include <nlohmann/json_fwd.hpp>

namespace dsurf {

struct SifResult
{
    std::size_t count = 0;
    std::vector<std::uint32_t> faces; ///< sorted, unique

    bool operator==(const SifResult&) const = default;
};

enum class SifMode { Accelerated, BruteForce };

/// Exact triangle-triangle intersection on coordinates normalized to the
/// pair's bounding box (centred, unit extent), epsilon 1e-12. Touching and
/// coplanar-overlapping pairs count as intersecting.
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                         const Vec3& b2);

/// Faces intersecting any face that shares none of their vertices. Both
/// faces of a pair are reported. The accelerated mode filters candidates with
/// an AABB tree; brute force visits every pair. Results are identical.
SifResult count_sif(const TriangleMesh& mesh, SifMode mode = SifMode::Accelerated);

/// {"count": n, "faces": [...]}
nlohmann::json to_json(const SifResult& result);

} // namespace dsurf
