#include <dsurf/sphere.hpp>
#include <dsurf/synthetic.hpp>

#include <numbers>

namespace dsurf {

double Rng::normal()
{
    if (m_spare) {
        const double s = *m_spare;
        m_spare.reset();
        return s;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    m_spare = r * std::sin(a);
    return r * std::cos(a);
}

BumpField BumpField::random(int lobes, std::uint64_t seed)
{
    if (lobes < 1) fail(ErrorKind::Argument, "bumpy sphere needs lobes >= 1");
    Rng rng(seed);
    BumpField b;
    b.lobes = lobes;
    double total = 0.0;
    for (auto& c : b.coeff) {
        c = rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        total += std::abs(c);
    }
    for (auto& c : b.coeff) c /= total;
    for (auto& p : b.phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return b;
}

double BumpField::operator()(const Vec3& u) const
{
    const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
    const double phi = std::atan2(u.y(), u.x());
    const double s = std::sin(theta);
    const int m = lobes;
    const double sectoral = std::pow(s, m) * std::cos(m * phi + phase[0]);
    const double zonal = std::cos(m * theta);
    const double tesseral = m >= 2 ? std::pow(s, m - 1) * std::cos(theta) * std::cos((m - 1) * phi + phase[1]) : 0.0;
    return coeff[0] * sectoral + coeff[1] * zonal + coeff[2] * tesseral;
}

SyntheticKind parse_synthetic_kind(const std::string& name)
{
    if (name == "sphere") return SyntheticKind::Sphere;
    if (name == "ellipsoid") return SyntheticKind::Ellipsoid;
    if (name == "bumpy_sphere") return SyntheticKind::BumpySphere;
    fail(ErrorKind::Argument, "unknown synthetic kind '" + name + "' (sphere|ellipsoid|bumpy_sphere)");
}

ScalarVolume ramp_volume(const GridGeometry& grid, const Vec3& gradient, double offset)
{
    grid.validate();
    ScalarVolume v(grid);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const auto c = grid.coords(i);
        v.data[i] = offset + gradient.dot(grid.world(c[0], c[1], c[2]));
    }
    return v;
}

ScalarVolume shell_mask(const GridGeometry& grid, const Vec3& centre, double r_inner, double r_outer)
{
    grid.validate();
    if (!(r_inner >= 0.0 && r_outer >= r_inner)) fail(ErrorKind::Argument, "shell_mask needs 0 <= r_inner <= r_outer");
    ScalarVolume v(grid);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const auto c = grid.coords(i);
        const double r = (grid.world(c[0], c[1], c[2]) - centre).norm();
        v.data[i] = r >= r_inner && r <= r_outer ? 1.0 : 0.0;
    }
    return v;
}

SyntheticSurface gen_synthetic(const SyntheticParams& p, std::uint64_t seed)
{
    if (!(p.radius > 0.0)) fail(ErrorKind::Argument, "radius must be > 0");
    if (p.inner_scale < 0.0) fail(ErrorKind::Argument, "inner_scale must be >= 0");
    const auto ico = icosphere(p.level, 1.0);
    std::vector<Vec3> v = ico.mesh().vertices();
    switch (p.kind) {
    case SyntheticKind::Sphere:
        for (auto& x : v) x *= p.radius;
        break;
    case SyntheticKind::Ellipsoid:
        if (!(p.axes.minCoeff() > 0.0)) fail(ErrorKind::Argument, "ellipsoid axes must be > 0");
        for (auto& x : v) x = x.cwiseProduct(p.axes);
        break;
    case SyntheticKind::BumpySphere: {
        if (!(p.amplitude >= 0.0 && p.amplitude < 1.0)) {
            fail(ErrorKind::Argument, "bump amplitude must be in [0, 1) of the radius");
        }
        const auto bump = BumpField::random(p.lobes, seed);
        for (auto& x : v) x *= p.radius * (1.0 + p.amplitude * bump(x));
        break;
    }
    }
    SyntheticSurface out{ico.mesh().with_vertices(v), std::nullopt};
    if (p.inner_scale > 0.0) {
        for (auto& x : v) x *= p.inner_scale;
        out.inner = ico.mesh().with_vertices(std::move(v));
    }
    return out;
}

VectorField3 random_smooth_field(const GridGeometry& grid, double sigma_voxels, double max_norm_mm, Rng& rng)
{
    VectorField3 f(grid);
    for (auto& x : f.data) x = Vec3(rng.normal(), rng.normal(), rng.normal());
    f = gaussian_smooth(f, sigma_voxels * grid.mean_spacing());
    const double m = f.max_norm();
    if (m > 0.0) {
        for (auto& x : f.data) x *= max_norm_mm / m;
    }
    return f;
}

SvfStack random_svf_stack(const StackGeometry& geometry, const IntegrationConfig& integration, double max_voxels,
                          double sigma_voxels, double decay, Rng& rng)
{
    geometry.validate();
    SvfStack s;
    s.integration = integration;
    for (int l = 1; l <= geometry.levels; ++l) {
        const auto g = geometry.scale_geometry(l);
        const double amp = max_voxels * g.mean_spacing() * std::pow(decay, l - 1);
        s.svfs.push_back(random_smooth_field(g, sigma_voxels, amp, rng));
    }
    return s;
}

} // namespace dsurf
