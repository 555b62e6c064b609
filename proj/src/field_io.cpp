#include <dsurf/binary.hpp>
#include <dsurf/field.hpp>

#include <json.hpp>

#include <fstream>

namespace dsurf {

namespace {

std::filesystem::path raw_path_for(const std::filesystem::path& sidecar)
{
    auto p = sidecar;
    p.replace_extension(".raw");
    return p;
}

nlohmann::json geometry_json(const GridGeometry& g, int components)
{
    return {{"dims", {g.dims[0], g.dims[1], g.dims[2]}},
            {"spacing_mm", {g.spacing[0], g.spacing[1], g.spacing[2]}},
            {"origin_mm", {g.origin[0], g.origin[1], g.origin[2]}},
            {"components", components}};
}

GridGeometry read_sidecar(const std::filesystem::path& sidecar, int expected_components)
{
    std::ifstream in(sidecar);
    if (!in) fail(ErrorKind::Io, "cannot open " + sidecar.string());
    nlohmann::json j;
    try {
        in >> j;
        GridGeometry g;
        for (int a = 0; a < 3; ++a) {
            g.dims[a] = j.at("dims").at(a).get<int>();
            g.spacing[a] = j.at("spacing_mm").at(a).get<double>();
            g.origin[a] = j.at("origin_mm").at(a).get<double>();
        }
        if (j.at("components").get<int>() != expected_components) {
            fail(ErrorKind::Io, sidecar.string() + ": expected " + std::to_string(expected_components) + " components");
        }
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Io, sidecar.string() + ": " + e.what());
    }
}

void write_sidecar(const std::filesystem::path& sidecar, const GridGeometry& g, int components)
{
    std::ofstream out(sidecar, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + sidecar.string());
    out << geometry_json(g, components).dump(2) << '\n';
}

} // namespace

namespace io {

void write_vector_field(const std::filesystem::path& sidecar, const VectorField3& field)
{
    write_sidecar(sidecar, field.geometry, 3);
    std::ofstream out(raw_path_for(sidecar), std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + raw_path_for(sidecar).string());
    for (const Vec3& v : field.data)
        for (int k = 0; k < 3; ++k) detail::put<float>(out, static_cast<float>(v[k]));
}

VectorField3 read_vector_field(const std::filesystem::path& sidecar)
{
    VectorField3 field(read_sidecar(sidecar, 3));
    std::ifstream in(raw_path_for(sidecar), std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + raw_path_for(sidecar).string());
    for (Vec3& v : field.data)
        for (int k = 0; k < 3; ++k) v[k] = detail::get<float>(in, "vector field");
    return field;
}

void write_scalar_volume(const std::filesystem::path& sidecar, const ScalarVolume& volume)
{
    write_sidecar(sidecar, volume.geometry, 1);
    std::ofstream out(raw_path_for(sidecar), std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + raw_path_for(sidecar).string());
    for (double v : volume.data) detail::put<float>(out, static_cast<float>(v));
}

ScalarVolume read_scalar_volume(const std::filesystem::path& sidecar)
{
    ScalarVolume volume(read_sidecar(sidecar, 1));
    std::ifstream in(raw_path_for(sidecar), std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + raw_path_for(sidecar).string());
    for (double& v : volume.data) v = detail::get<float>(in, "scalar volume");
    return volume;
}

} // namespace io

} // namespace dsurf
