#pragma once

#include <dsurf/common.hpp>

#include <memory>
#include <span>
#include <vector>

namespace dsurf {

/// Connectivity derived once from a face array and shared between every mesh
/// that carries it (deformation never touches it).
struct MeshTopology
{
    std::size_t num_vertices = 0;
    std::vector<Face> faces;
    /// Unique unordered pairs, lexicographic by (min, max).
    std::vector<Edge> edges;
    /// Up to two incident faces per edge; absent slot holds kNoFace.
    std::vector<std::array<std::uint32_t, 2>> edge_faces;
    /// Number of faces incident to each edge (> 2 means non-manifold).
    std::vector<std::uint32_t> edge_face_count;
    /// CSR vertex adjacency, neighbours sorted ascending.
    std::vector<std::uint32_t> adjacency_offsets;
    std::vector<std::uint32_t> adjacency;
    /// CSR vertex-to-face incidence.
    std::vector<std::uint32_t> vertex_face_offsets;
    std::vector<std::uint32_t> vertex_faces;

    static constexpr std::uint32_t kNoFace = 0xffffffffu;
};

/// Indexed triangle surface. Immutable: every deforming operation returns a new
/// mesh with the same topology object.
class TriangleMesh
{
public:
    TriangleMesh() = default;

    /// Validates indices and builds connectivity caches.
    /// Throws structural-error on out-of-range or repeated face indices.
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    /// Same connectivity, new positions. Vertex count must match.
    TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

    std::size_t num_vertices() const { return m_vertices.size(); }
    std::size_t num_faces() const { return m_topology ? m_topology->faces.size() : 0; }
    std::size_t num_edges() const { return m_topology ? m_topology->edges.size() : 0; }

    const std::vector<Vec3>& vertices() const { return m_vertices; }
    const Vec3& vertex(std::size_t i) const { return m_vertices[i]; }
    const std::vector<Face>& faces() const { return m_topology->faces; }
    const std::vector<Edge>& edges() const { return m_topology->edges; }
    const MeshTopology& topology() const { return *m_topology; }

    std::span<const std::uint32_t> neighbors(std::size_t v) const;
    std::span<const std::uint32_t> incident_faces(std::size_t v) const;

    /// True when every edge borders exactly two faces.
    bool is_closed() const;

    /// Same face array object (or bit-identical faces).
    bool same_connectivity(const TriangleMesh& other) const;

private:
    std::vector<Vec3> m_vertices;
    std::shared_ptr<const MeshTopology> m_topology;
};

/// One scalar per vertex (sulcal depth, thickness, curvature, ...).
struct VertexScalarField
{
    std::vector<double> values;

    VertexScalarField() = default;
    explicit VertexScalarField(std::vector<double> v)
        : values(std::move(v))
    {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    /// Throws argument-error when the length is wrong or a value is not finite.
    void validate_against(const TriangleMesh& mesh) const;
};

} // namespace dsurf
