#include <dsurf/geometry.hpp>
#include <dsurf/nearest.hpp>

#include <limits>

namespace dsurf {

PointIndex::PointIndex(std::vector<Vec3> points)
    : m_points(std::move(points))
{
    if (m_points.empty()) return;
    const auto box = bounding_box(m_points);
    const Vec3 extent = box.max - box.min;
    // roughly two points per occupied cell on a surface-like sample
    const double volume_like = std::max({extent.x() * extent.y(), extent.y() * extent.z(), extent.x() * extent.z(), 1e-300});
    double cell = std::sqrt(2.0 * volume_like / static_cast<double>(m_points.size()));
    const double diag = extent.norm();
    if (!(cell > 0.0) || !std::isfinite(cell)) cell = diag > 0.0 ? diag : 1.0;
    cell = std::max({cell, diag * 1e-6, extent.maxCoeff() / 1000.0});
    if (!(cell > 0.0)) cell = 1.0;
    m_origin = box.min;
    const double max_cells = std::max(64.0, 8.0 * static_cast<double>(m_points.size()));
    for (;;) {
        double total = 1.0;
        for (int a = 0; a < 3; ++a) {
            m_dims[a] = static_cast<int>(std::floor(extent[a] / cell) + 1.0);
            total *= m_dims[a];
        }
        if (total <= max_cells) break;
        cell *= 1.25;
    }
    m_cell = cell;

    const std::size_t ncells = static_cast<std::size_t>(m_dims[0]) * m_dims[1] * m_dims[2];
    std::vector<std::uint32_t> counts(ncells + 1, 0);
    std::vector<std::uint32_t> cell_id(m_points.size());
    for (std::size_t i = 0; i < m_points.size(); ++i) {
        cell_id[i] = static_cast<std::uint32_t>(cell_index(cell_of(m_points[i])));
        ++counts[cell_id[i] + 1];
    }
    for (std::size_t c = 0; c < ncells; ++c) counts[c + 1] += counts[c];
    m_cell_start = counts;
    m_sorted.resize(m_points.size());
    // stable fill keeps indices ascending inside each cell
    for (std::size_t i = 0; i < m_points.size(); ++i) m_sorted[counts[cell_id[i]]++] = static_cast<std::uint32_t>(i);
}

std::array<int, 3> PointIndex::cell_of(const Vec3& p) const
{
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
        const double t = std::floor((p[a] - m_origin[a]) / m_cell);
        c[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(m_dims[a] - 1)));
    }
    return c;
}

std::size_t PointIndex::cell_index(const std::array<int, 3>& c) const
{
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(m_dims[0]) * (c[1] + static_cast<std::size_t>(m_dims[1]) * c[2]);
}

NearestHit PointIndex::nearest(const Vec3& query) const
{
    if (m_points.empty()) fail(ErrorKind::Argument, "nearest query on an empty point set");
    NearestHit best{0, std::numeric_limits<double>::infinity()};
    const auto c0 = cell_of(query);
    const int max_ring = std::max({m_dims[0], m_dims[1], m_dims[2]});
    auto visit = [&](const std::array<int, 3>& c) {
        const std::size_t ci = cell_index(c);
        for (std::uint32_t s = m_cell_start[ci]; s < m_cell_start[ci + 1]; ++s) {
            const std::uint32_t idx = m_sorted[s];
            const double d2 = squared_distance(m_points[idx], query);
            if (d2 < best.distance2 || (d2 == best.distance2 && idx < best.index)) best = {idx, d2};
        }
    };
    for (int r = 0; r <= max_ring; ++r) {
        // every point in ring r is at least (r - 1) cells away from the query
        if (r >= 1) {
            const double bound = (r - 1) * m_cell;
            if (bound * bound > best.distance2) break;
        }
        const int lo[3] = {c0[0] - r, c0[1] - r, c0[2] - r};
        const int hi[3] = {c0[0] + r, c0[1] + r, c0[2] + r};
        for (int z = std::max(lo[2], 0); z <= std::min(hi[2], m_dims[2] - 1); ++z)
            for (int y = std::max(lo[1], 0); y <= std::min(hi[1], m_dims[1] - 1); ++y) {
                const bool yz_shell = z == lo[2] || z == hi[2] || y == lo[1] || y == hi[1];
                if (yz_shell) {
                    for (int x = std::max(lo[0], 0); x <= std::min(hi[0], m_dims[0] - 1); ++x) visit({x, y, z});
                } else {
                    if (lo[0] >= 0) visit({lo[0], y, z});
                    if (hi[0] != lo[0] && hi[0] < m_dims[0]) visit({hi[0], y, z});
                }
            }
    }
    return best;
}

} // namespace dsurf
