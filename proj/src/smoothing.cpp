#include <dsurf/parallel.hpp>
#include <dsurf/smoothing.hpp>

#include <string>

namespace dsurf {

namespace {

void umbrella_step(const TriangleMesh& mesh, const std::vector<Vec3>& in, std::vector<Vec3>& out, double step)
{
    parallel_for(in.size(), [&](std::size_t i) {
        const auto nbrs = mesh.neighbors(i);
        if (nbrs.empty()) {
            out[i] = in[i];
            return;
        }
        Vec3 mean = Vec3::Zero();
        for (auto j : nbrs) mean += in[j];
        mean /= static_cast<double>(nbrs.size());
        out[i] = step == 1.0 ? mean : Vec3(in[i] + step * (mean - in[i]));
    });
}

void check_finite(const std::vector<Vec3>& v, const char* what)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_finite(v[i])) fail(ErrorKind::Numeric, std::string(what) + ": non-finite vertex " + std::to_string(i));
    }
}

} // namespace

TriangleMesh taubin_smooth(const TriangleMesh& mesh, const TaubinParams& params)
{
    if (!(params.lambda_step > 0.0 && params.mu_step < 0.0 && -params.mu_step > params.lambda_step)) {
        fail(ErrorKind::Argument, "taubin_smooth requires lambda > 0 > mu and |mu| > lambda");
    }
    if (params.iterations < 0) fail(ErrorKind::Argument, "taubin_smooth: negative iteration count");
    std::vector<Vec3> a = mesh.vertices();
    std::vector<Vec3> b(a.size());
    for (int it = 0; it < params.iterations; ++it) {
        umbrella_step(mesh, a, b, params.lambda_step);
        umbrella_step(mesh, b, a, params.mu_step);
    }
    check_finite(a, "taubin_smooth");
    return mesh.with_vertices(std::move(a));
}

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double step, int iterations)
{
    std::vector<Vec3> a = mesh.vertices();
    std::vector<Vec3> b(a.size());
    for (int it = 0; it < iterations; ++it) {
        umbrella_step(mesh, a, b, step);
        a.swap(b);
    }
    check_finite(a, "laplacian_smooth");
    return mesh.with_vertices(std::move(a));
}

std::vector<Vec3> laplacian_smooth_vertex_vectors(const TriangleMesh& mesh, std::vector<Vec3> values, int iterations,
                                                  double step)
{
    if (!(step > 0.0 && step <= 1.0)) fail(ErrorKind::Argument, "laplacian_smooth_vertex_vectors: step must lie in (0, 1]");
    if (values.size() != mesh.num_vertices()) {
        fail(ErrorKind::Argument, "laplacian_smooth_vertex_vectors: " + std::to_string(values.size()) +
                                      " vectors for " + std::to_string(mesh.num_vertices()) + " vertices");
    }
    std::vector<Vec3> next(values.size());
    for (int it = 0; it < iterations; ++it) {
        umbrella_step(mesh, values, next, step);
        values.swap(next);
    }
    return values;
}

} // namespace dsurf
