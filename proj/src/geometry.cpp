#include <dsurf/geometry.hpp>
#include <dsurf/parallel.hpp>

#include <limits>
#include <string>

namespace dsurf {

long euler_characteristic(const TriangleMesh& mesh)
{
    return static_cast<long>(mesh.num_vertices()) - static_cast<long>(mesh.num_edges()) +
           static_cast<long>(mesh.num_faces());
}

std::vector<Vec3> face_area_vectors(const TriangleMesh& mesh)
{
    const auto& faces = mesh.faces();
    const auto& v = mesh.vertices();
    std::vector<Vec3> out(faces.size());
    parallel_for(faces.size(), [&](std::size_t f) {
        const Face& t = faces[f];
        out[f] = (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]);
    });
    return out;
}

FaceGeometry face_normals_areas(const TriangleMesh& mesh)
{
    const auto cross = face_area_vectors(mesh);
    FaceGeometry out;
    out.normals.resize(cross.size());
    out.areas.resize(cross.size());
    for (std::size_t f = 0; f < cross.size(); ++f) {
        const double len = cross[f].norm();
        if (!(len > 0.0) || !std::isfinite(len)) {
            fail(ErrorKind::DegenerateGeometry, "face " + std::to_string(f) + " has zero area");
        }
        out.normals[f] = cross[f] / len;
        out.areas[f] = 0.5 * len;
    }
    return out;
}

double total_area(const TriangleMesh& mesh)
{
    double sum = 0.0;
    for (const Vec3& c : face_area_vectors(mesh)) sum += 0.5 * c.norm();
    return sum;
}

std::vector<double> edge_lengths(const TriangleMesh& mesh)
{
    const auto& edges = mesh.edges();
    const auto& v = mesh.vertices();
    std::vector<double> out(edges.size());
    parallel_for(edges.size(), [&](std::size_t e) { out[e] = (v[edges[e][0]] - v[edges[e][1]]).norm(); });
    return out;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh)
{
    const auto cross = face_area_vectors(mesh);
    std::vector<Vec3> out(mesh.num_vertices());
    parallel_for(mesh.num_vertices(), [&](std::size_t i) {
        Vec3 n = Vec3::Zero();
        for (auto f : mesh.incident_faces(i)) n += cross[f];
        const double len = n.norm();
        out[i] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    });
    return out;
}

std::vector<double> vertex_areas(const TriangleMesh& mesh)
{
    const auto cross = face_area_vectors(mesh);
    std::vector<double> out(mesh.num_vertices(), 0.0);
    for (std::size_t f = 0; f < cross.size(); ++f) {
        const double a = cross[f].norm() / 6.0;
        for (auto idx : mesh.faces()[f]) out[idx] += a;
    }
    return out;
}

Vec3 centroid(const TriangleMesh& mesh)
{
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : mesh.vertices()) c += p;
    return mesh.num_vertices() ? Vec3(c / static_cast<double>(mesh.num_vertices())) : c;
}

BoundingBox bounding_box(std::span<const Vec3> points)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    BoundingBox box{Vec3::Constant(inf), Vec3::Constant(-inf)};
    for (const Vec3& p : points) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
    }
    return box;
}

TriangleMesh rigid_transform(const TriangleMesh& mesh, const Mat3& rotation, const Vec3& translation)
{
    std::vector<Vec3> out(mesh.num_vertices());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rotation * mesh.vertex(i) + translation;
    return mesh.with_vertices(std::move(out));
}

TriangleMesh scaled(const TriangleMesh& mesh, double factor)
{
    std::vector<Vec3> out(mesh.num_vertices());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * mesh.vertex(i);
    return mesh.with_vertices(std::move(out));
}

} // namespace dsurf
