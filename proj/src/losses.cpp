#include <dsurf/geometry.hpp>
#include <dsurf/losses.hpp>
#include <dsurf/parallel.hpp>

#include <string>

namespace dsurf {

void LossWeights::validate() const
{
    if (!(lambda_edge >= 0.0) || !(lambda_nc >= 0.0)) fail(ErrorKind::Argument, "loss weights must be >= 0");
}

namespace {

std::vector<NearestHit> nearest_all(std::span<const Vec3> queries, const PointIndex& index)
{
    std::vector<NearestHit> hits(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) { hits[i] = index.nearest(queries[i]); }, 64);
    return hits;
}

double one_sided_mean(const std::vector<NearestHit>& hits)
{
    double sum = 0.0;
    for (const auto& h : hits) sum += h.distance2;
    return sum / static_cast<double>(hits.size());
}

void require_closed(const TriangleMesh& mesh)
{
    const auto& counts = mesh.topology().edge_face_count;
    for (std::size_t e = 0; e < counts.size(); ++e) {
        if (counts[e] != 2) {
            fail(ErrorKind::Structural, "edge " + std::to_string(e) + " borders " + std::to_string(counts[e]) +
                                            " faces; normal consistency needs a closed manifold mesh");
        }
    }
}

} // namespace

double chamfer_distance(std::span<const Vec3> x, const PointIndex& y_index)
{
    if (x.empty() || y_index.empty()) fail(ErrorKind::Argument, "chamfer_distance: empty point set");
    const PointIndex x_index(std::vector<Vec3>(x.begin(), x.end()));
    const auto xy = nearest_all(x, y_index);
    const auto yx = nearest_all(y_index.points(), x_index);
    return 0.5 * one_sided_mean(xy) + 0.5 * one_sided_mean(yx);
}

double chamfer_distance(std::span<const Vec3> x, std::span<const Vec3> y)
{
    if (x.empty() || y.empty()) fail(ErrorKind::Argument, "chamfer_distance: empty point set");
    return chamfer_distance(x, PointIndex(std::vector<Vec3>(y.begin(), y.end())));
}

double edge_loss(const TriangleMesh& mesh)
{
    if (mesh.num_edges() == 0) fail(ErrorKind::Argument, "edge_loss: mesh has no edges");
    const auto& v = mesh.vertices();
    double sum = 0.0;
    for (const Edge& e : mesh.edges()) sum += (v[e[0]] - v[e[1]]).squaredNorm();
    return sum / static_cast<double>(mesh.num_edges());
}

double normal_consistency_loss(const TriangleMesh& mesh)
{
    require_closed(mesh);
    const auto geom = face_normals_areas(mesh);
    const auto& ef = mesh.topology().edge_faces;
    double sum = 0.0;
    for (const auto& pair : ef) sum += geom.normals[pair[0]].dot(geom.normals[pair[1]]);
    return 1.0 - sum / static_cast<double>(ef.size());
}

LossBreakdown total_loss(const TriangleMesh& mesh, const PointIndex& targets, const LossWeights& weights)
{
    weights.validate();
    LossBreakdown b;
    b.chamfer = chamfer_distance(mesh.vertices(), targets);
    b.edge = edge_loss(mesh);
    b.normal_consistency = normal_consistency_loss(mesh);
    b.total = b.chamfer + weights.lambda_edge * b.edge + weights.lambda_nc * b.normal_consistency;
    return b;
}

LossBreakdown total_loss(const TriangleMesh& mesh, std::span<const Vec3> targets, const LossWeights& weights)
{
    if (targets.empty()) fail(ErrorKind::Argument, "total_loss: empty target set");
    return total_loss(mesh, PointIndex(std::vector<Vec3>(targets.begin(), targets.end())), weights);
}

void chamfer_gradient(std::span<const Vec3> x, const PointIndex& y_index, double scale, std::vector<Vec3>& grad,
                      double* value)
{
    if (x.empty() || y_index.empty()) fail(ErrorKind::Argument, "chamfer_gradient: empty point set");
    const PointIndex x_index(std::vector<Vec3>(x.begin(), x.end()));
    const auto xy = nearest_all(x, y_index);
    const auto yx = nearest_all(y_index.points(), x_index);
    const auto& y = y_index.points();
    const double wx = scale / static_cast<double>(x.size());
    const double wy = scale / static_cast<double>(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] += wx * (x[i] - y[xy[i].index]);
    for (std::size_t j = 0; j < y.size(); ++j) grad[yx[j].index] += wy * (x[yx[j].index] - y[j]);
    if (value) *value = 0.5 * one_sided_mean(xy) + 0.5 * one_sided_mean(yx);
}

void edge_loss_gradient(const TriangleMesh& mesh, double scale, std::vector<Vec3>& grad, double* value)
{
    if (mesh.num_edges() == 0) fail(ErrorKind::Argument, "edge_loss: mesh has no edges");
    const auto& v = mesh.vertices();
    const double w = 2.0 * scale / static_cast<double>(mesh.num_edges());
    double sum = 0.0;
    for (const Edge& e : mesh.edges()) {
        const Vec3 d = v[e[0]] - v[e[1]];
        sum += d.squaredNorm();
        grad[e[0]] += w * d;
        grad[e[1]] -= w * d;
    }
    if (value) *value = sum / static_cast<double>(mesh.num_edges());
}

void normal_consistency_gradient(const TriangleMesh& mesh, double scale, std::vector<Vec3>& grad, double* value)
{
    require_closed(mesh);
    const auto cross = face_area_vectors(mesh);
    std::vector<Vec3> normals(cross.size());
    for (std::size_t f = 0; f < cross.size(); ++f) {
        const double len = cross[f].norm();
        if (!(len > 0.0)) fail(ErrorKind::DegenerateGeometry, "face " + std::to_string(f) + " has zero area");
        normals[f] = cross[f] / len;
    }
    const auto& ef = mesh.topology().edge_faces;
    const double w = -scale / static_cast<double>(ef.size());
    std::vector<Vec3> g_normal(cross.size(), Vec3::Zero());
    double sum = 0.0;
    for (const auto& pair : ef) {
        sum += normals[pair[0]].dot(normals[pair[1]]);
        g_normal[pair[0]] += w * normals[pair[1]];
        g_normal[pair[1]] += w * normals[pair[0]];
    }
    const auto& faces = mesh.faces();
    const auto& v = mesh.vertices();
    for (std::size_t f = 0; f < faces.size(); ++f) {
        // n = c / |c|  =>  dL/dc = (I - n n^T) dL/dn / |c|
        const Vec3& n = normals[f];
        const Vec3 gc = (g_normal[f] - n * n.dot(g_normal[f])) / cross[f].norm();
        const Face& t = faces[f];
        const Vec3 e1 = v[t[1]] - v[t[0]];
        const Vec3 e2 = v[t[2]] - v[t[0]];
        const Vec3 g1 = e2.cross(gc);
        const Vec3 g2 = gc.cross(e1);
        grad[t[1]] += g1;
        grad[t[2]] += g2;
        grad[t[0]] -= g1 + g2;
    }
    if (value) *value = 1.0 - sum / static_cast<double>(ef.size());
}

LossBreakdown total_loss_with_gradient(const TriangleMesh& mesh, const PointIndex& targets, const LossWeights& weights,
                                       std::vector<Vec3>& grad)
{
    weights.validate();
    grad.assign(mesh.num_vertices(), Vec3::Zero());
    LossBreakdown b;
    chamfer_gradient(mesh.vertices(), targets, 1.0, grad, &b.chamfer);
    edge_loss_gradient(mesh, weights.lambda_edge, grad, &b.edge);
    normal_consistency_gradient(mesh, weights.lambda_nc, grad, &b.normal_consistency);
    b.total = b.chamfer + weights.lambda_edge * b.edge + weights.lambda_nc * b.normal_consistency;
    return b;
}

} // namespace dsurf
