#include <dsurf/geometry.hpp>
#include <dsurf/nearest.hpp>
#include <dsurf/parallel.hpp>
#include <dsurf/smoothing.hpp>
#include <dsurf/sphere.hpp>

#include <nlohmann/json.hpp>

#include <cstring>
#include <limits>
#include <unordered_map>

namespace dsurf {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return a.dot(b.cross(c));
}

} // namespace

std::size_t count_inverted_faces(const TriangleMesh& mesh)
{
    const auto& v = mesh.vertices();
    std::size_t n = 0;
    for (const Face& f : mesh.faces()) {
        if (!(signed_volume(v[f[0]], v[f[1]], v[f[2]]) > 0.0)) ++n;
    }
    return n;
}

SphereMesh::SphereMesh(TriangleMesh mesh, double radius)
    : m_mesh(std::move(mesh))
    , m_radius(radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorKind::Argument, "sphere radius must be positive");
    for (std::size_t i = 0; i < m_mesh.num_vertices(); ++i) {
        const double r = m_mesh.vertex(i).norm();
        if (!(std::abs(r - radius) <= 1e-6 * radius)) {
            fail(ErrorKind::Argument, "vertex " + std::to_string(i) + " is off the sphere (|v| = " + std::to_string(r) + ")");
        }
    }
    if (euler_characteristic(m_mesh) != 2) fail(ErrorKind::Argument, "sphere mesh must have Euler characteristic 2");
    if (const auto inv = count_inverted_faces(m_mesh); inv > 0) {
        fail(ErrorKind::Argument, "sphere mesh has " + std::to_string(inv) + " inverted triangles");
    }
}

SphereMesh SphereMesh::from_mesh(TriangleMesh mesh)
{
    double sum = 0.0;
    for (const auto& p : mesh.vertices()) sum += p.norm();
    const double r = sum / static_cast<double>(mesh.num_vertices());
    return SphereMesh(std::move(mesh), r);
}

SphereMesh SphereMesh::radial_projection(const TriangleMesh& mesh, double radius)
{
    std::vector<Vec3> out(mesh.num_vertices());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double n = mesh.vertex(i).norm();
        if (!(n > 0.0)) fail(ErrorKind::Argument, "radial projection: vertex " + std::to_string(i) + " at the origin");
        out[i] = mesh.vertex(i) * (radius / n);
    }
    return SphereMesh(mesh.with_vertices(std::move(out)), radius);
}

SphereMesh icosphere(int level, double radius)
{
    if (level < 0 || level > 9) fail(ErrorKind::Argument, "icosphere level must be in [0, 9]");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                           {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                           {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (auto& p : v) p.normalize();
    for (int l = 0; l < level; ++l) {
        std::unordered_map<std::uint64_t, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const auto idx = static_cast<std::uint32_t>(v.size() - 1);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const Face& face : f) {
            const auto ab = mid(face[0], face[1]);
            const auto bc = mid(face[1], face[2]);
            const auto ca = mid(face[2], face[0]);
            next.push_back({face[0], ab, ca});
            next.push_back({face[1], bc, ab});
            next.push_back({face[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p *= radius;
    return SphereMesh(TriangleMesh(std::move(v), std::move(f)), radius);
}

namespace {

std::uint64_t content_hash(const TriangleMesh& mesh)
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& p : mesh.vertices()) mix(p.data(), sizeof(double) * 3);
    for (const auto& f : mesh.faces()) mix(f.data(), sizeof(std::uint32_t) * 3);
    return h;
}

/// Normalized central-projection barycentrics; sum <= 0 means the face is on
/// the far hemisphere.
bool central_barycentric(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c, std::array<double, 3>& w)
{
    const double wa = signed_volume(q, b, c);
    const double wb = signed_volume(a, q, c);
    const double wc = signed_volume(a, b, q);
    const double sum = wa + wb + wc;
    if (!(sum > 0.0)) return false;
    w = {wa / sum, wb / sum, wc / sum};
    return true;
}

constexpr double kContainEps = 1e-12;

bool contains(const std::array<double, 3>& w)
{
    return w[0] >= -kContainEps && w[1] >= -kContainEps && w[2] >= -kContainEps;
}

} // namespace

BarycentricTable barycentric_table(const SphereMesh& source, const SphereMesh& query)
{
    if (std::abs(source.radius() - query.radius()) > 1e-6 * source.radius()) {
        fail(ErrorKind::Argument, "barycentric_resample: spheres have different radii");
    }
    const auto& sm = source.mesh();
    const auto& sv = sm.vertices();
    const auto& sf = sm.faces();
    const PointIndex index(sv);
    const std::size_t nq = query.mesh().num_vertices();
    BarycentricTable table;
    table.face.resize(nq);
    table.weights.resize(nq);
    std::vector<char> fallback(nq, 0);

    parallel_for(nq, [&](std::size_t qi) {
        const Vec3& q = query.mesh().vertex(qi);
        const auto hit = index.nearest(q);
        if (hit.distance2 == 0.0) {
            // coincident vertex: exact reproduction
            const auto fid = sm.incident_faces(hit.index)[0];
            const Face& face = sf[fid];
            std::array<double, 3> w{0.0, 0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                if (face[k] == hit.index) w[k] = 1.0;
            }
            table.face[qi] = fid;
            table.weights[qi] = w;
            return;
        }
        auto try_faces = [&](std::span<const std::uint32_t> faces) {
            std::array<double, 3> w;
            for (const auto fid : faces) {
                const Face& face = sf[fid];
                if (central_barycentric(q, sv[face[0]], sv[face[1]], sv[face[2]], w) && contains(w)) {
                    table.face[qi] = fid;
                    table.weights[qi] = w;
                    return true;
                }
            }
            return false;
        };
        if (try_faces(sm.incident_faces(hit.index))) return;
        for (const auto nb : sm.neighbors(hit.index)) {
            if (try_faces(sm.incident_faces(nb))) return;
        }
        // exhaustive search, then closest triangle
        double best_min = -std::numeric_limits<double>::infinity();
        std::uint32_t best_face = 0;
        std::array<double, 3> best_w{1.0, 0.0, 0.0};
        for (std::uint32_t fid = 0; fid < sf.size(); ++fid) {
            std::array<double, 3> w;
            const Face& face = sf[fid];
            if (!central_barycentric(q, sv[face[0]], sv[face[1]], sv[face[2]], w)) continue;
            if (contains(w)) {
                table.face[qi] = fid;
                table.weights[qi] = w;
                return;
            }
            const double m = std::min({w[0], w[1], w[2]});
            if (m > best_min) {
                best_min = m;
                best_face = fid;
                best_w = w;
            }
        }
        double sum = 0.0;
        for (auto& x : best_w) {
            x = std::max(x, 0.0);
            sum += x;
        }
        for (auto& x : best_w) x /= sum;
        table.face[qi] = best_face;
        table.weights[qi] = best_w;
        fallback[qi] = 1;
    }, 64);
    for (char c : fallback) table.n_fallback_queries += static_cast<std::size_t>(c);
    return table;
}

const BarycentricTable& BarycentricCache::get(const SphereMesh& source, const SphereMesh& query)
{
    const auto key = std::make_pair(content_hash(source.mesh()), content_hash(query.mesh()));
    {
        std::lock_guard lock(m_mutex);
        if (auto it = m_tables.find(key); it != m_tables.end()) return it->second;
    }
    auto table = barycentric_table(source, query);
    std::lock_guard lock(m_mutex);
    return m_tables.emplace(key, std::move(table)).first->second;
}

std::size_t BarycentricCache::size() const
{
    std::lock_guard lock(m_mutex);
    return m_tables.size();
}

namespace {

template <typename T>
std::vector<T> resample_impl(std::span<const T> values, const SphereMesh& source, const SphereMesh& query,
                             BarycentricCache* cache)
{
    if (values.size() != source.mesh().num_vertices()) {
        fail(ErrorKind::Argument, "barycentric_resample: one value per source vertex required");
    }
    BarycentricTable local;
    const BarycentricTable* table;
    if (cache) {
        table = &cache->get(source, query);
    } else {
        local = barycentric_table(source, query);
        table = &local;
    }
    const auto& sf = source.mesh().faces();
    std::vector<T> out(table->face.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Face& f = sf[table->face[i]];
        const auto& w = table->weights[i];
        if (w[0] == 1.0 && w[1] == 0.0 && w[2] == 0.0) {
            out[i] = values[f[0]];
        } else if (w[1] == 1.0 && w[0] == 0.0 && w[2] == 0.0) {
            out[i] = values[f[1]];
        } else if (w[2] == 1.0 && w[0] == 0.0 && w[1] == 0.0) {
            out[i] = values[f[2]];
        } else {
            out[i] = w[0] * values[f[0]] + w[1] * values[f[1]] + w[2] * values[f[2]];
        }
    }
    return out;
}

} // namespace

std::vector<double> barycentric_resample(std::span<const double> values, const SphereMesh& source,
                                         const SphereMesh& query, BarycentricCache* cache)
{
    return resample_impl(values, source, query, cache);
}

std::vector<Vec3> barycentric_resample(std::span<const Vec3> values, const SphereMesh& source,
                                       const SphereMesh& query, BarycentricCache* cache)
{
    return resample_impl(values, source, query, cache);
}

double optimal_beta(std::span<const double> xs, std::span<const double> xf)
{
    if (xs.size() != xf.size()) fail(ErrorKind::Argument, "optimal_beta: arrays differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += xs[i] * xf[i];
        den += xs[i] * xs[i];
    }
    if (!(den > 0.0)) fail(ErrorKind::Argument, "optimal_beta: sphere metrics are all zero");
    return num / den;
}

double rmsd_at(double beta, std::span<const double> xs, std::span<const double> xf)
{
    if (xs.size() != xf.size() || xs.empty()) fail(ErrorKind::Argument, "rmsd: arrays differ in length or are empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = beta * xs[i] - xf[i];
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(xs.size()));
}

std::vector<double> mesh_metrics(const TriangleMesh& mesh, DistortionMetric metric)
{
    if (metric == DistortionMetric::Edge) return edge_lengths(mesh);
    const auto c = face_area_vectors(mesh);
    std::vector<double> a(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) a[i] = 0.5 * c[i].norm();
    return a;
}

DistortionEntry metric_distortion(const TriangleMesh& sphere, const TriangleMesh& surface, DistortionMetric metric)
{
    if (!sphere.same_connectivity(surface)) fail(ErrorKind::Argument, "metric_distortion: connectivity mismatch");
    const auto xs = mesh_metrics(sphere, metric);
    const auto xf = mesh_metrics(surface, metric);
    DistortionEntry e;
    e.beta = optimal_beta(xs, xf);
    e.residuals.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) e.residuals[i] = e.beta * xs[i] - xf[i];
    e.rmsd = rmsd_at(e.beta, xs, xf);
    return e;
}

DistortionReport distortion_report(const TriangleMesh& sphere, const TriangleMesh& surface)
{
    auto e = metric_distortion(sphere, surface, DistortionMetric::Edge);
    auto a = metric_distortion(sphere, surface, DistortionMetric::Area);
    DistortionReport r;
    r.edge_rmsd = e.rmsd;
    r.beta_edge = e.beta;
    r.edge_residuals = std::move(e.residuals);
    r.area_rmsd = a.rmsd;
    r.beta_area = a.beta;
    r.area_residuals = std::move(a.residuals);
    return r;
}

nlohmann::json to_json(const DistortionReport& r)
{
    return {{"edge_rmsd", r.edge_rmsd},
            {"area_rmsd", r.area_rmsd},
            {"beta_edge", r.beta_edge},
            {"beta_area", r.beta_area},
            {"n_fallback_queries", r.n_fallback_queries}};
}

void ProjectionConfig::validate() const
{
    if (!(lambda_e >= 0.0) || !(lambda_a >= 0.0)) fail(ErrorKind::Argument, "projection weights must be >= 0");
    if (iterations < 0) fail(ErrorKind::Argument, "projection iterations must be >= 0");
    if (!(step_size > 0.0)) fail(ErrorKind::Argument, "projection step size must be > 0");
    if (smoothing_passes < 0) fail(ErrorKind::Argument, "smoothing passes must be >= 0");
}

namespace {

/// dRMSD/dx_i at the optimal beta (beta is stationary, so its dependence drops out).
std::vector<double> rmsd_metric_gradient(std::span<const double> xs, std::span<const double> xf, double& value)
{
    const double beta = optimal_beta(xs, xf);
    value = rmsd_at(beta, xs, xf);
    std::vector<double> g(xs.size(), 0.0);
    if (!(value > 0.0)) return g;
    const double s = beta / (static_cast<double>(xs.size()) * value);
    for (std::size_t i = 0; i < xs.size(); ++i) g[i] = s * (beta * xs[i] - xf[i]);
    return g;
}

double weighted_loss(const TriangleMesh& sphere, std::span<const double> se, std::span<const double> sa,
                     const ProjectionConfig& c, double* edge, double* area)
{
    const auto xe = mesh_metrics(sphere, DistortionMetric::Edge);
    const auto xa = mesh_metrics(sphere, DistortionMetric::Area);
    const double le = rmsd_at(optimal_beta(xe, se), xe, se);
    const double la = rmsd_at(optimal_beta(xa, sa), xa, sa);
    if (edge) *edge = le;
    if (area) *area = la;
    return c.lambda_e * le + c.lambda_a * la;
}

} // namespace

double distortion_loss_gradient(const TriangleMesh& sphere, std::span<const double> surf_edges,
                                std::span<const double> surf_areas, double lambda_e, double lambda_a,
                                std::vector<Vec3>& grad)
{
    const auto& v = sphere.vertices();
    grad.assign(v.size(), Vec3::Zero());
    const auto xe = mesh_metrics(sphere, DistortionMetric::Edge);
    double le = 0.0, la = 0.0;
    const auto ge = rmsd_metric_gradient(xe, surf_edges, le);
    const auto& edges = sphere.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const Vec3 d = v[edges[e][0]] - v[edges[e][1]];
        const Vec3 g = lambda_e * ge[e] * d / xe[e];
        grad[edges[e][0]] += g;
        grad[edges[e][1]] -= g;
    }
    const auto cross = face_area_vectors(sphere);
    std::vector<double> xa(cross.size());
    for (std::size_t f = 0; f < cross.size(); ++f) xa[f] = 0.5 * cross[f].norm();
    const auto ga = rmsd_metric_gradient(xa, surf_areas, la);
    const auto& faces = sphere.faces();
    for (std::size_t f = 0; f < faces.size(); ++f) {
        // A = |c| / 2  =>  dA/dc = c / (2 |c|)
        const Vec3 gc = lambda_a * ga[f] * cross[f] / (4.0 * xa[f]);
        const Face& t = faces[f];
        const Vec3 e1 = v[t[1]] - v[t[0]];
        const Vec3 e2 = v[t[2]] - v[t[0]];
        const Vec3 g1 = e2.cross(gc);
        const Vec3 g2 = gc.cross(e1);
        grad[t[1]] += g1;
        grad[t[2]] += g2;
        grad[t[0]] -= g1 + g2;
    }
    return lambda_e * le + lambda_a * la;
}

ProjectionResult project_to_sphere(const TriangleMesh& surface, const SphereMesh& initial,
                                   const ProjectionConfig& config)
{
    config.validate();
    const auto& start = initial.mesh();
    if (!start.same_connectivity(surface)) fail(ErrorKind::Argument, "project_to_sphere: connectivity mismatch");
    const double radius = initial.radius();
    const auto se = mesh_metrics(surface, DistortionMetric::Edge);
    const auto sa = mesh_metrics(surface, DistortionMetric::Area);

    TriangleMesh current = start;
    ProjectionResult result;
    result.initial = distortion_report(start, surface);
    double loss = result.initial.weighted(config.lambda_e, config.lambda_a);
    result.history.push_back({0, loss, result.initial.edge_rmsd, result.initial.area_rmsd, 0.0});

    double mean_edge = 0.0;
    for (double x : mesh_metrics(start, DistortionMetric::Edge)) mean_edge += x;
    mean_edge /= static_cast<double>(start.num_edges());

    double step = config.step_size;
    std::vector<Vec3> grad;
    for (int it = 1; it <= config.iterations && loss > 0.0; ++it) {
        distortion_loss_gradient(current, se, sa, config.lambda_e, config.lambda_a, grad);
        const auto& v = current.vertices();
        std::vector<Vec3> dir(v.size());
        auto tangent = [&](std::vector<Vec3>& d) {
            for (std::size_t i = 0; i < d.size(); ++i) {
                const Vec3 r = v[i] / v[i].norm();
                d[i] -= r * r.dot(d[i]);
            }
        };
        for (std::size_t i = 0; i < v.size(); ++i) dir[i] = -grad[i];
        tangent(dir);
        dir = laplacian_smooth_vertex_vectors(current, std::move(dir), config.smoothing_passes);
        tangent(dir);
        double max_norm = 0.0;
        for (const auto& d : dir) max_norm = std::max(max_norm, d.norm());
        if (!(max_norm > 0.0)) break;

        double scale = step * mean_edge / max_norm;
        bool accepted = false;
        bool any_valid = false;
        double trial_loss = loss, trial_edge = 0.0, trial_area = 0.0;
        TriangleMesh trial;
        for (int h = 0; h <= 20; ++h, scale *= 0.5) {
            std::vector<Vec3> moved(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) moved[i] = (v[i] + scale * dir[i]).normalized() * radius;
            trial = current.with_vertices(std::move(moved));
            if (count_inverted_faces(trial) > 0) continue;
            any_valid = true;
            trial_loss = weighted_loss(trial, se, sa, config, &trial_edge, &trial_area);
            if (trial_loss < loss) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_valid) {
                fail(ErrorKind::ProjectionFailure, "iteration " + std::to_string(it) +
                                                       ": every trial step inverted a spherical triangle (loss " +
                                                       std::to_string(loss) + ")");
            }
            break;
        }
        const double used = scale * max_norm / mean_edge;
        const double rel = (loss - trial_loss) / loss;
        current = std::move(trial);
        loss = trial_loss;
        result.history.push_back({it, loss, trial_edge, trial_area, used});
        step = std::min(config.step_size, 2.0 * used);
        if (rel < config.tolerance) break;
    }
    result.sphere = SphereMesh(current, radius);
    result.final = distortion_report(current, surface);
    return result;
}

} // namespace dsurf
