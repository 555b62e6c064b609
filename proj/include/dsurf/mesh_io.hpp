#pragma once

#include <dsurf/mesh.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dsurf::io {

/// ASCII Wavefront OBJ, `v` and `f` records only (1-based indices, polygon
/// records must be triangles).
TriangleMesh read_obj(std::istream& in);
void write_obj(std::ostream& out, const TriangleMesh& mesh);

/// Binary mesh: "CFM1", u32 vertex count, u32 face count, f32 xyz triples,
/// u32 index triples, all little-endian.
TriangleMesh read_cfm(std::istream& in);
void write_cfm(std::ostream& out, const TriangleMesh& mesh);

/// Dispatches on extension: ".obj" is ASCII, anything else is CFM1.
TriangleMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Scalar fields: CSV "vertex,value" rows (header optional on read) or
/// binary "CFS1", u32 count, f32 values.
VertexScalarField read_scalar_csv(std::istream& in);
void write_scalar_csv(std::ostream& out, const VertexScalarField& field);
VertexScalarField read_cfs(std::istream& in);
void write_cfs(std::ostream& out, const VertexScalarField& field);

/// ".csv" is CSV, anything else is CFS1.
VertexScalarField read_scalars(const std::filesystem::path& path);
void write_scalars(const std::filesystem::path& path, const VertexScalarField& field);

} // namespace dsurf::io
