#include <dsurf/mesh.hpp>

#include <algorithm>
#include <string>

namespace dsurf {

namespace {

std::shared_ptr<const MeshTopology> build_topology(std::size_t nv, std::vector<Face> faces)
{
    auto topo = std::make_shared<MeshTopology>();
    topo->num_vertices = nv;

    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        for (auto idx : t) {
            if (idx >= nv) {
                fail(ErrorKind::Structural,
                     "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                         " but mesh has " + std::to_string(nv) + " vertices");
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            fail(ErrorKind::Structural, "face " + std::to_string(f) + " repeats a vertex index");
        }
    }

    // (min, max, face) triples sorted lexicographically give the unique edge list.
    struct HalfKey
    {
        std::uint32_t a, b, face;
    };
    std::vector<HalfKey> keys;
    keys.reserve(faces.size() * 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int k = 0; k < 3; ++k) {
            std::uint32_t i = faces[f][k];
            std::uint32_t j = faces[f][(k + 1) % 3];
            keys.push_back({std::min(i, j), std::max(i, j), static_cast<std::uint32_t>(f)});
        }
    }
    std::sort(keys.begin(), keys.end(), [](const HalfKey& x, const HalfKey& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.face < y.face;
    });
    for (std::size_t k = 0; k < keys.size();) {
        std::size_t end = k;
        while (end < keys.size() && keys[end].a == keys[k].a && keys[end].b == keys[k].b) ++end;
        topo->edges.push_back({keys[k].a, keys[k].b});
        std::array<std::uint32_t, 2> ef{MeshTopology::kNoFace, MeshTopology::kNoFace};
        for (std::size_t s = k; s < end && s - k < 2; ++s) ef[s - k] = keys[s].face;
        topo->edge_faces.push_back(ef);
        topo->edge_face_count.push_back(static_cast<std::uint32_t>(end - k));
        k = end;
    }

    std::vector<std::uint32_t> degree(nv, 0);
    for (const Edge& e : topo->edges) {
        ++degree[e[0]];
        ++degree[e[1]];
    }
    topo->adjacency_offsets.assign(nv + 1, 0);
    for (std::size_t v = 0; v < nv; ++v) topo->adjacency_offsets[v + 1] = topo->adjacency_offsets[v] + degree[v];
    topo->adjacency.resize(topo->adjacency_offsets[nv]);
    std::vector<std::uint32_t> cursor(topo->adjacency_offsets.begin(), topo->adjacency_offsets.end() - 1);
    for (const Edge& e : topo->edges) {
        topo->adjacency[cursor[e[0]]++] = e[1];
        topo->adjacency[cursor[e[1]]++] = e[0];
    }
    for (std::size_t v = 0; v < nv; ++v) {
        std::sort(topo->adjacency.begin() + topo->adjacency_offsets[v],
                  topo->adjacency.begin() + topo->adjacency_offsets[v + 1]);
    }

    std::vector<std::uint32_t> fdeg(nv, 0);
    for (const Face& t : faces)
        for (auto idx : t) ++fdeg[idx];
    topo->vertex_face_offsets.assign(nv + 1, 0);
    for (std::size_t v = 0; v < nv; ++v) topo->vertex_face_offsets[v + 1] = topo->vertex_face_offsets[v] + fdeg[v];
    topo->vertex_faces.resize(topo->vertex_face_offsets[nv]);
    cursor.assign(topo->vertex_face_offsets.begin(), topo->vertex_face_offsets.end() - 1);
    for (std::size_t f = 0; f < faces.size(); ++f)
        for (auto idx : faces[f]) topo->vertex_faces[cursor[idx]++] = static_cast<std::uint32_t>(f);

    topo->faces = std::move(faces);
    return topo;
}

} // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : m_vertices(std::move(vertices))
    , m_topology(build_topology(m_vertices.size(), std::move(faces)))
{}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const
{
    if (vertices.size() != m_vertices.size()) {
        fail(ErrorKind::Argument, "with_vertices: expected " + std::to_string(m_vertices.size()) +
                                      " vertices, got " + std::to_string(vertices.size()));
    }
    TriangleMesh out;
    out.m_vertices = std::move(vertices);
    out.m_topology = m_topology;
    return out;
}

std::span<const std::uint32_t> TriangleMesh::neighbors(std::size_t v) const
{
    const auto& t = *m_topology;
    return {t.adjacency.data() + t.adjacency_offsets[v], t.adjacency.data() + t.adjacency_offsets[v + 1]};
}

std::span<const std::uint32_t> TriangleMesh::incident_faces(std::size_t v) const
{
    const auto& t = *m_topology;
    return {t.vertex_faces.data() + t.vertex_face_offsets[v],
            t.vertex_faces.data() + t.vertex_face_offsets[v + 1]};
}

bool TriangleMesh::is_closed() const
{
    const auto& counts = m_topology->edge_face_count;
    return std::all_of(counts.begin(), counts.end(), [](std::uint32_t c) { return c == 2; });
}

bool TriangleMesh::same_connectivity(const TriangleMesh& other) const
{
    if (m_topology == other.m_topology) return true;
    return num_vertices() == other.num_vertices() && faces() == other.faces();
}

void VertexScalarField::validate_against(const TriangleMesh& mesh) const
{
    if (values.size() != mesh.num_vertices()) {
        fail(ErrorKind::Argument, "scalar field has " + std::to_string(values.size()) + " values for " +
                                      std::to_string(mesh.num_vertices()) + " vertices");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) fail(ErrorKind::Argument, "non-finite value at vertex " + std::to_string(i));
    }
}

} // namespace dsurf
