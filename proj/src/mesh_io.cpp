#include <dsurf/binary.hpp>
#include <dsurf/mesh_io.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dsurf::io {

using detail::get;
using detail::put;

namespace {

std::uint32_t parse_obj_index(const std::string& token, std::size_t nv, std::size_t line)
{
    // "f 1/2/3" style: only the position index matters
    const std::string head = token.substr(0, token.find('/'));
    long idx = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
    if (ec != std::errc() || ptr != head.data() + head.size()) {
        fail(ErrorKind::Io, "obj line " + std::to_string(line) + ": bad index '" + token + "'");
    }
    if (idx < 0) idx = static_cast<long>(nv) + idx + 1;
    if (idx <= 0) fail(ErrorKind::Io, "obj line " + std::to_string(line) + ": index out of range");
    return static_cast<std::uint32_t>(idx - 1);
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

} // namespace

TriangleMesh read_obj(std::istream& in)
{
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) fail(ErrorKind::Io, "obj line " + std::to_string(lineno) + ": bad vertex");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) idx.push_back(parse_obj_index(tok, verts.size(), lineno));
            if (idx.size() != 3) {
                fail(ErrorKind::Io, "obj line " + std::to_string(lineno) + ": only triangles are supported");
            }
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces));
}

void write_obj(std::ostream& out, const TriangleMesh& mesh)
{
    out << std::setprecision(17);
    for (const Vec3& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

TriangleMesh read_cfm(std::istream& in)
{
    detail::expect_magic(in, "CFM1");
    const auto nv = get<std::uint32_t>(in, "vertex count");
    const auto nf = get<std::uint32_t>(in, "face count");
    std::vector<Vec3> verts(nv);
    for (auto& p : verts) {
        for (int k = 0; k < 3; ++k) p[k] = get<float>(in, "vertex");
    }
    std::vector<Face> faces(nf);
    for (auto& f : faces) {
        for (int k = 0; k < 3; ++k) f[k] = get<std::uint32_t>(in, "face");
    }
    return TriangleMesh(std::move(verts), std::move(faces));
}

void write_cfm(std::ostream& out, const TriangleMesh& mesh)
{
    out.write("CFM1", 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.num_vertices()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.num_faces()));
    for (const Vec3& p : mesh.vertices())
        for (int k = 0; k < 3; ++k) put<float>(out, static_cast<float>(p[k]));
    for (const Face& f : mesh.faces())
        for (auto idx : f) put<std::uint32_t>(out, idx);
}

TriangleMesh read_mesh(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return path.extension() == ".obj" ? read_obj(in) : read_cfm(in);
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh)
{
    auto out = open_out(path);
    if (path.extension() == ".obj") write_obj(out, mesh);
    else write_cfm(out, mesh);
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

VertexScalarField read_scalar_csv(std::istream& in)
{
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(ErrorKind::Io, "csv line " + std::to_string(lineno) + ": expected 'vertex,value'");
        std::size_t index = 0;
        const std::string first = line.substr(0, comma);
        auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), index);
        if (ec != std::errc()) {
            if (lineno == 1) continue; // header
            fail(ErrorKind::Io, "csv line " + std::to_string(lineno) + ": bad vertex index");
        }
        if (index != values.size()) fail(ErrorKind::Io, "csv line " + std::to_string(lineno) + ": vertex indices must be consecutive");
        try {
            values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            fail(ErrorKind::Io, "csv line " + std::to_string(lineno) + ": bad value");
        }
    }
    return VertexScalarField(std::move(values));
}

void write_scalar_csv(std::ostream& out, const VertexScalarField& field)
{
    out << "vertex,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < field.size(); ++i) out << i << ',' << field[i] << '\n';
}

VertexScalarField read_cfs(std::istream& in)
{
    detail::expect_magic(in, "CFS1");
    const auto n = get<std::uint32_t>(in, "value count");
    std::vector<double> values(n);
    for (auto& v : values) v = get<float>(in, "value");
    return VertexScalarField(std::move(values));
}

void write_cfs(std::ostream& out, const VertexScalarField& field)
{
    out.write("CFS1", 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(field.size()));
    for (double v : field.values) put<float>(out, static_cast<float>(v));
}

VertexScalarField read_scalars(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return path.extension() == ".csv" ? read_scalar_csv(in) : read_cfs(in);
}

void write_scalars(const std::filesystem::path& path, const VertexScalarField& field)
{
    auto out = open_out(path);
    if (path.extension() == ".csv") write_scalar_csv(out, field);
    else write_cfs(out, field);
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

} // namespace dsurf::io
