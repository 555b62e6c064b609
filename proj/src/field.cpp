#include <dsurf/field.hpp>
#include <dsurf/parallel.hpp>

namespace dsurf {

void GridGeometry::validate() const
{
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 2) fail(ErrorKind::Shape, "grid dims must be >= 2 along every axis");
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) fail(ErrorKind::Shape, "grid spacing must be positive");
        if (!std::isfinite(origin[a])) fail(ErrorKind::Shape, "grid origin must be finite");
    }
}

void VectorField3::validate() const
{
    geometry.validate();
    if (data.size() != geometry.size()) fail(ErrorKind::Structural, "vector field data does not match its grid");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!is_finite(data[i])) fail(ErrorKind::Numeric, "non-finite vector at voxel " + std::to_string(i));
    }
}

double VectorField3::max_norm() const
{
    double m = 0.0;
    for (const Vec3& v : data) m = std::max(m, v.norm());
    return m;
}

namespace {

struct CellCoords
{
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    std::array<bool, 3> clamped{};
};

inline CellCoords locate(const GridGeometry& grid, const Vec3& point)
{
    CellCoords cc;
    for (int a = 0; a < 3; ++a) {
        const int n = grid.dims[a];
        double c = (point[a] - grid.origin[a]) / grid.spacing[a];
        // voxel centres land exactly on a corner despite rounding in origin + i * spacing;
        // outside this range the clamp below decides
        if (c > -0.5 && c < n - 0.5) {
            const double r = static_cast<int>(c + 0.5);
            if (std::abs(c - r) <= 1e-12 * std::max(1.0, r)) c = r;
        }
        cc.clamped[a] = false;
        if (!(c >= 0.0)) {
            c = 0.0;
            cc.clamped[a] = true;
        } else if (c > n - 1) {
            c = n - 1;
            cc.clamped[a] = true;
        }
        int i0 = static_cast<int>(c); // c >= 0 here
        if (i0 > n - 2) i0 = n - 2;
        cc.base[a] = i0;
        cc.frac[a] = c - i0;
    }
    return cc;
}

} // namespace

TrilinearStencil trilinear_stencil(const GridGeometry& grid, const Vec3& point, bool with_gradient)
{
    const auto cc = locate(grid, point);
    const auto& base = cc.base;
    const auto& frac = cc.frac;
    const auto& clamped = cc.clamped;

    TrilinearStencil s;
    for (int corner = 0; corner < 8; ++corner) {
        const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
        const double wx = dx ? frac[0] : 1.0 - frac[0];
        const double wy = dy ? frac[1] : 1.0 - frac[1];
        const double wz = dz ? frac[2] : 1.0 - frac[2];
        s.index[corner] = grid.index(base[0] + dx, base[1] + dy, base[2] + dz);
        s.weight[corner] = wx * wy * wz;
        if (with_gradient) {
            const double gx = clamped[0] ? 0.0 : (dx ? 1.0 : -1.0) / grid.spacing[0];
            const double gy = clamped[1] ? 0.0 : (dy ? 1.0 : -1.0) / grid.spacing[1];
            const double gz = clamped[2] ? 0.0 : (dz ? 1.0 : -1.0) / grid.spacing[2];
            s.weight_gradient[corner] = Vec3(gx * wy * wz, wx * gy * wz, wx * wy * gz);
        }
    }
    return s;
}

Vec3 sample_trilinear(const VectorField3& field, const Vec3& point)
{
    // same weights and summation order as trilinear_stencil, without the gradient table
    const auto& grid = field.geometry;
    const auto cc = locate(grid, point);
    const std::size_t sx = 1, sy = static_cast<std::size_t>(grid.dims[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(grid.dims[1]);
    const std::size_t i000 = grid.index(cc.base[0], cc.base[1], cc.base[2]);
    const double fx = cc.frac[0], fy = cc.frac[1], fz = cc.frac[2];
    const double gx = 1.0 - fx, gy = 1.0 - fy, gz = 1.0 - fz;
    const Vec3* d = field.data.data();
    Vec3 out = Vec3::Zero();
    out += (gx * gy * gz) * d[i000];
    out += (fx * gy * gz) * d[i000 + sx];
    out += (gx * fy * gz) * d[i000 + sy];
    out += (fx * fy * gz) * d[i000 + sx + sy];
    out += (gx * gy * fz) * d[i000 + sz];
    out += (fx * gy * fz) * d[i000 + sx + sz];
    out += (gx * fy * fz) * d[i000 + sy + sz];
    out += (fx * fy * fz) * d[i000 + sx + sy + sz];
    return out;
}

Vec3 sample_trilinear(const VectorField3& field, const Vec3& point, Mat3& jacobian)
{
    const auto s = trilinear_stencil(field.geometry, point, true);
    Vec3 out = Vec3::Zero();
    jacobian.setZero();
    for (int c = 0; c < 8; ++c) {
        const Vec3& v = field.data[s.index[c]];
        out += s.weight[c] * v;
        jacobian += v * s.weight_gradient[c].transpose();
    }
    return out;
}

double sample_trilinear(const ScalarVolume& volume, const Vec3& point)
{
    const auto s = trilinear_stencil(volume.geometry, point);
    double out = 0.0;
    for (int c = 0; c < 8; ++c) out += s.weight[c] * volume.data[s.index[c]];
    return out;
}

std::vector<double> gaussian_kernel(double sigma_voxels)
{
    if (!(sigma_voxels > 0.0)) return {1.0};
    const int radius = static_cast<int>(std::floor(3.0 * sigma_voxels + 1e-9));
    std::vector<double> k(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int t = 0; t <= radius; ++t) {
        k[t] = std::exp(-0.5 * t * t / (sigma_voxels * sigma_voxels));
        sum += t == 0 ? k[t] : 2.0 * k[t];
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

/// One separable pass along `axis`. The forward pass gathers from replicated
/// edges; the transpose scatters back into the clamped source voxel.
void convolve_axis(const VectorField3& in, VectorField3& out, int axis, const std::vector<double>& kernel, bool transpose)
{
    const auto& g = in.geometry;
    const int n = g.dims[axis];
    const int radius = static_cast<int>(kernel.size()) - 1;
    const std::array<int, 3> dims = g.dims;
    const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
    const std::size_t lines = static_cast<std::size_t>(dims[o1]) * dims[o2];

    parallel_for(lines, [&](std::size_t line) {
        std::array<int, 3> c{};
        c[o1] = static_cast<int>(line % dims[o1]);
        c[o2] = static_cast<int>(line / dims[o1]);
        const std::size_t first = g.index(c[0], c[1], c[2]);
        const std::size_t stride = axis == 0 ? 1 : axis == 1 ? dims[0] : static_cast<std::size_t>(dims[0]) * dims[1];
        auto idx = [&](int i) { return first + static_cast<std::size_t>(std::clamp(i, 0, n - 1)) * stride; };
        if (!transpose) {
            for (int i = 0; i < n; ++i) {
                Vec3 acc = Vec3::Zero();
                for (int t = -radius; t <= radius; ++t) acc += kernel[std::abs(t)] * in.data[idx(i + t)];
                out.data[idx(i)] = acc;
            }
        } else {
            for (int i = 0; i < n; ++i) out.data[idx(i)] = Vec3::Zero();
            for (int i = 0; i < n; ++i) {
                const Vec3 v = in.data[idx(i)];
                for (int t = -radius; t <= radius; ++t) out.data[idx(i + t)] += kernel[std::abs(t)] * v;
            }
        }
    }, 1);
}

VectorField3 smooth_impl(const VectorField3& field, double sigma_mm, bool transpose)
{
    if (sigma_mm < 0.0) fail(ErrorKind::Argument, "gaussian_smooth: sigma must be >= 0");
    if (sigma_mm == 0.0) return field;
    VectorField3 a = field;
    VectorField3 b(field.geometry);
    // forward applies x, y, z; the transpose runs the same passes in reverse
    const std::array<int, 3> order = transpose ? std::array<int, 3>{2, 1, 0} : std::array<int, 3>{0, 1, 2};
    for (int axis : order) {
        const auto kernel = gaussian_kernel(sigma_mm / field.geometry.spacing[axis]);
        if (kernel.size() == 1) continue;
        convolve_axis(a, b, axis, kernel, transpose);
        std::swap(a, b);
    }
    return a;
}

} // namespace

VectorField3 gaussian_smooth(const VectorField3& field, double sigma_mm)
{
    return smooth_impl(field, sigma_mm, false);
}

VectorField3 gaussian_smooth_adjoint(const VectorField3& field, double sigma_mm)
{
    return smooth_impl(field, sigma_mm, true);
}

} // namespace dsurf
