#pragma once

#include <dsurf/common.hpp>

#include <span>

namespace dsurf {

struct NearestHit
{
    std::uint32_t index = 0;
    double distance2 = 0.0;
};

/// Squared distance used by every nearest-neighbour path (accelerated and
/// brute force), so both produce bit-identical results.
inline double squared_distance(const Vec3& a, const Vec3& b)
{
    return (a - b).squaredNorm();
}

/// Exact nearest-neighbour queries over a fixed point set using a uniform
/// hash grid. Ties resolve to the lowest point index.
class PointIndex
{
public:
    PointIndex() = default;
    explicit PointIndex(std::vector<Vec3> points);

    bool empty() const { return m_points.empty(); }
    std::size_t size() const { return m_points.size(); }
    const std::vector<Vec3>& points() const { return m_points; }

    NearestHit nearest(const Vec3& query) const;

private:
    std::size_t cell_index(const std::array<int, 3>& c) const;
    std::array<int, 3> cell_of(const Vec3& p) const;

    std::vector<Vec3> m_points;
    Vec3 m_origin = Vec3::Zero();
    double m_cell = 1.0;
    std::array<int, 3> m_dims{1, 1, 1};
    std::vector<std::uint32_t> m_cell_start;
    std::vector<std::uint32_t> m_sorted;
};

} // namespace dsurf
