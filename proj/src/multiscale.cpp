#include <dsurf/multiscale.hpp>
#include <dsurf/parallel.hpp>

#include <json.hpp>

#include <fstream>

namespace dsurf {

int StackGeometry::factor(int scale) const
{
    if (scale < 1 || scale > levels) fail(ErrorKind::Argument, "scale index out of range");
    return scale < levels ? 1 << (levels - scale - 1) : 1;
}

GridGeometry StackGeometry::scale_geometry(int scale) const
{
    const int f = factor(scale);
    GridGeometry g = full;
    for (int a = 0; a < 3; ++a) g.dims[a] = std::max(2, (full.dims[a] + f - 1) / f);
    g.spacing = full.spacing * f;
    return g;
}

void StackGeometry::validate() const
{
    if (levels < 1) fail(ErrorKind::Argument, "stack needs at least one scale");
    if (levels > 12) fail(ErrorKind::Argument, "stack has too many scales");
    full.validate();
}

SvfStack SvfStack::zeros(const StackGeometry& geometry, const IntegrationConfig& integration)
{
    geometry.validate();
    SvfStack s;
    s.integration = integration;
    for (int l = 1; l <= geometry.levels; ++l) s.svfs.emplace_back(geometry.scale_geometry(l));
    return s;
}

StackGeometry SvfStack::geometry() const
{
    if (svfs.empty()) fail(ErrorKind::Argument, "empty SVF stack");
    return {svfs.back().geometry, levels()};
}

void SvfStack::validate() const
{
    if (svfs.empty()) fail(ErrorKind::Argument, "SVF stack needs at least one field");
    integration.validate();
    const StackGeometry geom = geometry();
    geom.validate();
    for (int l = 1; l <= levels(); ++l) {
        const auto& f = svfs[l - 1];
        f.validate();
        if (!(f.geometry == geom.scale_geometry(l))) {
            fail(ErrorKind::Shape, "scale " + std::to_string(l) + " grid does not match the dyadic factor " +
                                       std::to_string(geom.factor(l)));
        }
    }
}

TriangleMesh apply_deformation(const TriangleMesh& mesh, const VectorField3& deformation)
{
    std::vector<Vec3> out(mesh.num_vertices());
    parallel_for(out.size(), [&](std::size_t i) {
        const Vec3& p = mesh.vertex(i);
        out[i] = p + sample_trilinear(deformation, p);
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!is_finite(out[i])) fail(ErrorKind::Numeric, "apply_deformation: non-finite vertex " + std::to_string(i));
    }
    return mesh.with_vertices(std::move(out));
}

VectorField3 scale_deformation(const VectorField3& svf, const IntegrationConfig& integration)
{
    return gaussian_smooth(integrate(svf, integration), integration.smoothing_sigma);
}

MultiscaleResult multiscale_deform_detailed(const TriangleMesh& surface, const SvfStack& stack)
{
    stack.validate();
    MultiscaleResult r;
    r.surfaces.push_back(surface);
    for (const auto& svf : stack.svfs) {
        r.deformations.push_back(scale_deformation(svf, stack.integration));
        r.surfaces.push_back(apply_deformation(r.surfaces.back(), r.deformations.back()));
    }
    return r;
}

std::vector<TriangleMesh> multiscale_deform(const TriangleMesh& surface, const SvfStack& stack)
{
    return multiscale_deform_detailed(surface, stack).surfaces;
}

namespace io {

void write_stack(const std::filesystem::path& manifest, const SvfStack& stack)
{
    stack.validate();
    const auto geom = stack.geometry();
    nlohmann::json j;
    j["levels"] = stack.levels();
    j["steps_K"] = stack.integration.steps_K;
    j["sigma_mm"] = stack.integration.smoothing_sigma;
    j["method"] = stack.integration.method == IntegrationMethod::ForwardEuler ? "forward-euler" : "scaling-squaring";
    j["scale_factors"] = nlohmann::json::array();
    j["fields"] = nlohmann::json::array();
    const auto stem = manifest.stem().string();
    for (int l = 1; l <= stack.levels(); ++l) {
        const std::string name = stem + "_scale" + std::to_string(l) + ".json";
        write_vector_field(manifest.parent_path() / name, stack.svfs[l - 1]);
        j["scale_factors"].push_back(geom.factor(l));
        j["fields"].push_back(name);
    }
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + manifest.string());
    out << j.dump(2) << '\n';
}

SvfStack read_stack(const std::filesystem::path& manifest)
{
    std::ifstream in(manifest);
    if (!in) fail(ErrorKind::Io, "cannot open " + manifest.string());
    nlohmann::json j;
    SvfStack stack;
    std::vector<int> factors;
    try {
        in >> j;
        const int levels = j.at("levels").get<int>();
        stack.integration.steps_K = j.at("steps_K").get<int>();
        stack.integration.smoothing_sigma = j.at("sigma_mm").get<double>();
        const std::string method = j.value("method", "scaling-squaring");
        if (method == "forward-euler") stack.integration.method = IntegrationMethod::ForwardEuler;
        else if (method != "scaling-squaring") fail(ErrorKind::Config, "unknown integration method '" + method + "'");
        factors = j.at("scale_factors").get<std::vector<int>>();
        const auto files = j.at("fields").get<std::vector<std::string>>();
        if (static_cast<int>(files.size()) != levels || static_cast<int>(factors.size()) != levels) {
            fail(ErrorKind::Config, manifest.string() + ": fields/scale_factors must list one entry per scale");
        }
        for (const auto& f : files) stack.svfs.push_back(read_vector_field(manifest.parent_path() / f));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, manifest.string() + ": " + e.what());
    }
    const auto geom = stack.geometry();
    for (int l = 1; l <= stack.levels(); ++l) {
        if (factors[l - 1] != geom.factor(l)) {
            fail(ErrorKind::Config, "scale " + std::to_string(l) + " declares factor " + std::to_string(factors[l - 1]) +
                                        ", expected " + std::to_string(geom.factor(l)));
        }
    }
    stack.validate();
    return stack;
}

} // namespace io

} // namespace dsurf
